//! Sharded map from canonical posets to sortability status.
//!
//! The directory of shards is fixed at construction. Each shard is an
//! independently locked hash map keyed by the congruence hash; colliding
//! entries are told apart with [`congruent`].

use std::collections::HashMap;
use std::fs::File;
use std::hash::{BuildHasherDefault, Hasher};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use sortbound_core::canonical::{congruent, Canonical};
use sortbound_core::poset::{FLAG_SORTABLE, FLAG_UNKNOWN};
use sortbound_core::{packed_len, Poset};

use crate::advice::{self, LevelHeader};
use crate::error::SearchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    NotSortable,
    Sortable,
    Unknown,
}

impl Status {
    pub fn bits(self) -> u8 {
        match self {
            Status::NotSortable => 0,
            Status::Sortable => FLAG_SORTABLE,
            Status::Unknown => FLAG_UNKNOWN,
        }
    }

    pub fn from_bits(b: u8) -> Self {
        if b & FLAG_SORTABLE != 0 {
            Status::Sortable
        } else if b & FLAG_UNKNOWN != 0 {
            Status::Unknown
        } else {
            Status::NotSortable
        }
    }

    pub fn is_definite(self) -> bool {
        self != Status::Unknown
    }

    /// Combination of two pieces of information about one poset.
    /// `Unknown` carries none.
    pub fn merge(self, other: Status) -> Result<Status, ()> {
        match (self, other) {
            (a, Status::Unknown) => Ok(a),
            (Status::Unknown, b) => Ok(b),
            (a, b) if a == b => Ok(a),
            _ => Err(()),
        }
    }
}

const IDENTITY_MASK: u8 = 0b11;
const STATUS_MASK: u8 = FLAG_SORTABLE | FLAG_UNKNOWN;

/// The hash is already mixed; use it as is.
#[derive(Default)]
struct IdHasher(u64);

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ b as u64;
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = x;
    }
}

type IdMap<V> = HashMap<u64, V, BuildHasherDefault<IdHasher>>;

enum Slot {
    One(Box<[u8]>),
    Many(Vec<Box<[u8]>>),
}

impl Slot {
    fn records(&self) -> &[Box<[u8]>] {
        match self {
            Slot::One(r) => std::slice::from_ref(r),
            Slot::Many(v) => v,
        }
    }

    fn records_mut(&mut self) -> &mut [Box<[u8]>] {
        match self {
            Slot::One(r) => std::slice::from_mut(r),
            Slot::Many(v) => v,
        }
    }

    fn push(&mut self, rec: Box<[u8]>) {
        match self {
            Slot::One(_) => {
                let Slot::One(first) = std::mem::replace(self, Slot::Many(Vec::with_capacity(2))) else {
                    unreachable!()
                };
                if let Slot::Many(v) = self {
                    v.push(first);
                    v.push(rec);
                }
            }
            Slot::Many(v) => v.push(rec),
        }
    }
}

/// True when the stored record `rec` denotes the same congruence class as
/// `p`.
pub(crate) fn same_class(rec: &[u8], p: &Poset, scratch: &mut Vec<u8>) -> bool {
    scratch.clear();
    scratch.resize(packed_len(p.n()), 0);
    p.write_bytes(scratch);
    if rec[0] & IDENTITY_MASK == scratch[0] & IDENTITY_MASK && rec[1..] == scratch[1..] {
        return true;
    }
    if p.is_fully_canonical() || rec[0] & IDENTITY_MASK != p.flags() & IDENTITY_MASK {
        return false;
    }
    match Poset::from_bytes(p.n(), rec) {
        Ok(q) => congruent(&q, p),
        Err(_) => false,
    }
}

pub struct LayerStore {
    n: usize,
    shard_bits: u32,
    shards: Box<[Mutex<IdMap<Slot>>]>,
    len: AtomicUsize,
    evicted: AtomicU64,
}

impl LayerStore {
    /// Directory of `4 * threads` shards, rounded up to a power of two.
    pub fn new(n: usize, threads: usize) -> Self {
        Self::with_shards(n, (4 * threads.max(1)).next_power_of_two())
    }

    pub fn with_shards(n: usize, shards: usize) -> Self {
        let shards = shards.max(1).next_power_of_two();
        LayerStore {
            n,
            shard_bits: shards.trailing_zeros(),
            shards: (0..shards).map(|_| Mutex::new(IdMap::default())).collect(),
            len: AtomicUsize::new(0),
            evicted: AtomicU64::new(0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shard_count(&self) -> usize {
        self.shards.len()
    }

    fn shard(&self, hash: u64) -> &Mutex<IdMap<Slot>> {
        let i = if self.shard_bits == 0 {
            0
        } else {
            (hash >> (64 - self.shard_bits)) as usize
        };
        &self.shards[i]
    }

    pub fn len(&self) -> usize {
        self.len.load(Ordering::Relaxed)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn evicted(&self) -> u64 {
        self.evicted.load(Ordering::Relaxed)
    }

    fn encode(c: &Canonical, status: Status) -> Box<[u8]> {
        c.poset.with_status_bits(status.bits()).to_bytes().into_boxed_slice()
    }

    pub fn get(&self, c: &Canonical) -> Option<Status> {
        let shard = self.shard(c.hash).lock().unwrap();
        let slot = shard.get(&c.hash)?;
        let mut scratch = Vec::new();
        slot.records()
            .iter()
            .find(|r| same_class(r, &c.poset, &mut scratch))
            .map(|r| Status::from_bits(r[0]))
    }

    /// Inserts `c` with `status` unless a congruent poset is present, in
    /// which case its status is returned and nothing changes.
    pub fn insert_or_get(&self, c: &Canonical, status: Status) -> Option<Status> {
        let mut shard = self.shard(c.hash).lock().unwrap();
        let mut scratch = Vec::new();
        match shard.get_mut(&c.hash) {
            Some(slot) => {
                if let Some(r) = slot.records().iter().find(|r| same_class(r, &c.poset, &mut scratch)) {
                    return Some(Status::from_bits(r[0]));
                }
                slot.push(Self::encode(c, status));
            }
            None => {
                shard.insert(c.hash, Slot::One(Self::encode(c, status)));
            }
        }
        self.len.fetch_add(1, Ordering::Relaxed);
        None
    }

    /// Inserts or combines with the stored status; returns the result.
    /// Contradicting definite statuses are an error.
    pub fn merge(&self, c: &Canonical, status: Status) -> Result<Status, SearchError> {
        let mut shard = self.shard(c.hash).lock().unwrap();
        let mut scratch = Vec::new();
        match shard.get_mut(&c.hash) {
            Some(slot) => {
                if let Some(r) = slot
                    .records_mut()
                    .iter_mut()
                    .find(|r| same_class(r, &c.poset, &mut scratch))
                {
                    let old = Status::from_bits(r[0]);
                    let new = old.merge(status).map_err(|_| SearchError::Inconsistent {
                        what: "stored verdict contradicts a new one",
                    })?;
                    r[0] = (r[0] & !STATUS_MASK) | new.bits();
                    return Ok(new);
                }
                slot.push(Self::encode(c, status));
            }
            None => {
                shard.insert(c.hash, Slot::One(Self::encode(c, status)));
            }
        }
        self.len.fetch_add(1, Ordering::Relaxed);
        Ok(status)
    }

    /// Drops entries until at most `cap` remain: not sortable first, then
    /// unknown, then sortable. Returns the number removed.
    pub fn evict_to(&self, cap: usize) -> usize {
        let len = self.len();
        if len <= cap {
            return 0;
        }
        let mut excess = len - cap;
        let mut removed = 0;
        for class in [Status::NotSortable, Status::Unknown, Status::Sortable] {
            for shard in self.shards.iter() {
                if excess == 0 {
                    break;
                }
                let mut map = shard.lock().unwrap();
                map.retain(|_, slot| {
                    let keep: Vec<Box<[u8]>> = slot
                        .records()
                        .iter()
                        .filter(|r| {
                            if excess > 0 && Status::from_bits(r[0]) == class {
                                excess -= 1;
                                removed += 1;
                                false
                            } else {
                                true
                            }
                        })
                        .cloned()
                        .collect();
                    match keep.len() {
                        0 => false,
                        1 => {
                            *slot = Slot::One(keep.into_iter().next().unwrap());
                            true
                        }
                        _ => {
                            *slot = Slot::Many(keep);
                            true
                        }
                    }
                });
            }
        }
        self.len.fetch_sub(removed, Ordering::Relaxed);
        self.evicted.fetch_add(removed as u64, Ordering::Relaxed);
        removed
    }

    /// Every record with its hash, sorted by bytes.
    pub fn records(&self) -> Vec<(u64, Box<[u8]>)> {
        let mut out = Vec::with_capacity(self.len());
        for shard in self.shards.iter() {
            let map = shard.lock().unwrap();
            for (&h, slot) in map.iter() {
                for r in slot.records() {
                    out.push((h, r.clone()));
                }
            }
        }
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }

    /// Number of entries per status: (not sortable, sortable, unknown).
    pub fn census(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for shard in self.shards.iter() {
            for slot in shard.lock().unwrap().values() {
                for r in slot.records() {
                    match Status::from_bits(r[0]) {
                        Status::NotSortable => c.0 += 1,
                        Status::Sortable => c.1 += 1,
                        Status::Unknown => c.2 += 1,
                    }
                }
            }
        }
        c
    }

    /// Inserts a raw record as read from a level file.
    pub fn insert_record(&self, hash: u64, rec: Box<[u8]>) {
        let mut shard = self.shard(hash).lock().unwrap();
        match shard.get_mut(&hash) {
            Some(slot) => slot.push(rec),
            None => {
                shard.insert(hash, Slot::One(rec));
            }
        }
        self.len.fetch_add(1, Ordering::Relaxed);
    }
}

/// A completed level written to disk. A 16-bit fragment of each record's
/// hash stays in memory; lookups read the file only on a fragment match.
pub struct SpilledLevel {
    n: usize,
    path: PathBuf,
    file: Mutex<File>,
    data_offset: u64,
    record_len: usize,
    // (fragment, record index), sorted
    index: Vec<(u16, u32)>,
}

fn fragment(hash: u64) -> u16 {
    (hash >> 48) as u16
}

impl SpilledLevel {
    pub fn write(store: &LayerStore, path: &Path, header: &LevelHeader) -> Result<Self, SearchError> {
        let records = store.records();
        let mut header = header.clone();
        header.count = records.len() as u64;
        let bytes: Vec<&[u8]> = records.iter().map(|(_, r)| &r[..]).collect();
        advice::write_level_file(path, &header, &bytes)?;
        let mut index: Vec<(u16, u32)> = records
            .iter()
            .enumerate()
            .map(|(i, (h, _))| (fragment(*h), i as u32))
            .collect();
        index.sort_unstable();
        let file = File::open(path).map_err(|e| SearchError::io(path, e))?;
        Ok(SpilledLevel {
            n: store.n(),
            path: path.to_path_buf(),
            file: Mutex::new(file),
            data_offset: header.encoded_len() as u64,
            record_len: packed_len(store.n()),
            index,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, c: &Canonical) -> Result<Option<Status>, SearchError> {
        let f = fragment(c.hash);
        let start = self.index.partition_point(|&(g, _)| g < f);
        let mut buf = vec![0u8; self.record_len];
        let mut scratch = Vec::new();
        for &(g, i) in &self.index[start..] {
            if g != f {
                break;
            }
            {
                let mut file = self.file.lock().unwrap();
                file.seek(SeekFrom::Start(self.data_offset + i as u64 * self.record_len as u64))
                    .and_then(|_| file.read_exact(&mut buf))
                    .map_err(|e| SearchError::io(&self.path, e))?;
            }
            if same_class(&buf, &c.poset, &mut scratch) {
                return Ok(Some(Status::from_bits(buf[0])));
            }
        }
        Ok(None)
    }

    /// Loads every record back into memory.
    pub fn load(&self, threads: usize) -> Result<LayerStore, SearchError> {
        let (_, records) = advice::read_level_file(&self.path)?;
        let store = LayerStore::new(self.n, threads);
        fill_from_records(&store, records)?;
        Ok(store)
    }
}

pub(crate) fn fill_from_records(store: &LayerStore, records: Vec<Box<[u8]>>) -> Result<(), SearchError> {
    use rayon::prelude::*;
    let n = store.n();
    records.into_par_iter().try_for_each(|rec| {
        let p = Poset::from_bytes(n, &rec).map_err(SearchError::Core)?;
        store.insert_record(sortbound_core::poset_hash(&p), rec);
        Ok(())
    })
}

/// A completed level, resident or on disk.
pub enum Level {
    Resident(LayerStore),
    Spilled(SpilledLevel),
}

impl Level {
    pub fn len(&self) -> usize {
        match self {
            Level::Resident(s) => s.len(),
            Level::Spilled(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, c: &Canonical) -> Result<Option<Status>, SearchError> {
        match self {
            Level::Resident(s) => Ok(s.get(c)),
            Level::Spilled(s) => s.get(c),
        }
    }

    pub fn is_resident(&self) -> bool {
        matches!(self, Level::Resident(_))
    }
}
