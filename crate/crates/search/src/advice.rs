//! Backward-search results consulted by the forward search, and the level
//! file format shared with spilled store levels.
//!
//! A level file is a header followed by fixed-width packed posets in
//! increasing byte order:
//!
//! ```text
//! magic      8 bytes  "SLBADV01"
//! n          u32
//! budget     u32
//! first_full u32      lowest level stored without threshold
//! level      u32
//! thr_num    u32 length + little-endian bytes   E_thr of this level
//! thr_den    u32 length + little-endian bytes
//! count      u64
//! record_len u32
//! ```
//!
//! All integers are little-endian.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use sortbound_core::canonical::Canonical;
use sortbound_core::efficiency::Bandwidth;
use sortbound_core::{packed_len, Thresholds};

use crate::error::SearchError;
use crate::store::{fill_from_records, LayerStore, Level, Status};

pub const MAGIC: &[u8; 8] = b"SLBADV01";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelHeader {
    pub n: u32,
    pub budget: u32,
    pub first_full: u32,
    pub level: u32,
    pub thr_num: BigUint,
    pub thr_den: BigUint,
    pub count: u64,
}

impl LevelHeader {
    pub fn for_level(t: &Thresholds, first_full: usize, level: usize) -> Self {
        let (thr_num, thr_den) = t.bandwidth_at(level).threshold_ratio(t.n(), t.budget());
        LevelHeader {
            n: t.n() as u32,
            budget: t.budget() as u32,
            first_full: first_full as u32,
            level: level as u32,
            thr_num,
            thr_den,
            count: 0,
        }
    }

    pub fn record_len(&self) -> usize {
        packed_len(self.n as usize)
    }

    pub fn encoded_len(&self) -> usize {
        8 + 16 + 8 + self.thr_num.to_bytes_le().len() + self.thr_den.to_bytes_le().len() + 8 + 4
    }

    pub fn bandwidth(&self) -> Result<Bandwidth, SearchError> {
        Ok(Bandwidth::from_threshold_ratio(
            self.n as usize,
            self.budget as usize,
            &self.thr_num,
            &self.thr_den,
        )?)
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        for x in [self.n, self.budget, self.first_full, self.level] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for big in [&self.thr_num, &self.thr_den] {
            let b = big.to_bytes_le();
            out.extend_from_slice(&(b.len() as u32).to_le_bytes());
            out.extend_from_slice(&b);
        }
        out.extend_from_slice(&self.count.to_le_bytes());
        out.extend_from_slice(&(self.record_len() as u32).to_le_bytes());
        out
    }

    fn decode(path: &Path, r: &mut impl Read) -> Result<Self, SearchError> {
        let io = |e| SearchError::io(path, e);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(SearchError::format(path, "not a level file"));
        }
        let mut u32s = [0u32; 4];
        for x in u32s.iter_mut() {
            *x = read_u32(r).map_err(io)?;
        }
        let mut big = || -> Result<BigUint, SearchError> {
            let len = read_u32(r).map_err(io)? as usize;
            if len > 1 << 16 {
                return Err(SearchError::format(path, "threshold field too long"));
            }
            let mut b = vec![0u8; len];
            r.read_exact(&mut b).map_err(io)?;
            Ok(BigUint::from_bytes_le(&b))
        };
        let thr_num = big()?;
        let thr_den = big()?;
        let mut c = [0u8; 8];
        r.read_exact(&mut c).map_err(io)?;
        let record_len = read_u32(r).map_err(io)? as usize;
        let h = LevelHeader {
            n: u32s[0],
            budget: u32s[1],
            first_full: u32s[2],
            level: u32s[3],
            thr_num,
            thr_den,
            count: u64::from_le_bytes(c),
        };
        if h.n as usize > sortbound_core::MAX_N || h.level > h.budget {
            return Err(SearchError::format(path, "header out of range"));
        }
        if record_len != h.record_len() {
            return Err(SearchError::format(path, "record length does not match n"));
        }
        Ok(h)
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Writes a level file; `records` must already be sorted.
pub fn write_level_file(path: &Path, header: &LevelHeader, records: &[&[u8]]) -> Result<(), SearchError> {
    let io = |e| SearchError::io(path, e);
    let mut h = header.clone();
    h.count = records.len() as u64;
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(&h.encode()).map_err(io)?;
    for r in records {
        debug_assert_eq!(r.len(), h.record_len());
        w.write_all(r).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_level_file(path: &Path) -> Result<(LevelHeader, Vec<Box<[u8]>>), SearchError> {
    let io = |e| SearchError::io(path, e);
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let h = LevelHeader::decode(path, &mut r)?;
    let len = h.record_len();
    let mut out = Vec::with_capacity(h.count.min(1 << 24) as usize);
    for _ in 0..h.count {
        let mut b = vec![0u8; len].into_boxed_slice();
        r.read_exact(&mut b).map_err(io)?;
        out.push(b);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra).map_err(io)? != 0 {
        return Err(SearchError::format(path, "trailing bytes after records"));
    }
    Ok((h, out))
}

pub fn level_file_name(level: usize) -> String {
    format!("level_{level:03}.adv")
}

/// Result of consulting the advice for a poset at some level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Sortable,
    NotSortable,
    /// Stored with the unknown flag; the forward search has to decide.
    Unknown,
    /// The poset is above the level's threshold; the advice says nothing.
    NotCovered,
}

/// Per-level sets of posets found sortable by the backward search.
///
/// Level `c` holds posets sortable in `budget - c` more comparisons that
/// are not stored at any higher level. Levels `first_full..=budget` are
/// complete; lower levels hold only posets within the level's efficiency
/// threshold.
pub struct Advice {
    thresholds: Thresholds,
    first_full: usize,
    levels: Vec<Level>,
}

impl Advice {
    pub fn new(thresholds: Thresholds, first_full: usize, levels: Vec<Level>) -> Self {
        assert_eq!(levels.len(), thresholds.budget() + 1);
        Advice {
            thresholds,
            first_full,
            levels,
        }
    }

    pub fn n(&self) -> usize {
        self.thresholds.n()
    }

    pub fn budget(&self) -> usize {
        self.thresholds.budget()
    }

    pub fn first_full(&self) -> usize {
        self.first_full
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn level(&self, c: usize) -> &Level {
        &self.levels[c]
    }

    pub fn level_len(&self, c: usize) -> usize {
        self.levels[c].len()
    }

    pub fn total_len(&self) -> usize {
        self.levels.iter().map(Level::len).sum()
    }

    /// Searches the levels `from..` where a poset with `e` extensions can
    /// be stored.
    pub fn find(&self, c: &Canonical, e: u128, from: usize) -> Result<Option<(usize, Status)>, SearchError> {
        find_in(&self.levels, &self.thresholds, self.first_full, c, e, from)
    }

    pub fn query(&self, c: &Canonical, e: u128, level: usize) -> Result<Answer, SearchError> {
        let t = &self.thresholds;
        if t.prunable(e, level) {
            return Ok(Answer::NotSortable);
        }
        let full = level >= self.first_full;
        if !full && !t.within_threshold(e, level) {
            return Ok(Answer::NotCovered);
        }
        Ok(match self.find(c, e, level)? {
            Some((_, Status::Sortable)) => Answer::Sortable,
            Some((_, Status::Unknown)) => Answer::Unknown,
            Some((_, Status::NotSortable)) => {
                return Err(SearchError::Inconsistent {
                    what: "advice stores a poset as not sortable",
                })
            }
            None => Answer::NotSortable,
        })
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), SearchError> {
        fs::create_dir_all(dir).map_err(|e| SearchError::io(dir, e))?;
        for (c, level) in self.levels.iter().enumerate() {
            let path = dir.join(level_file_name(c));
            let header = LevelHeader::for_level(&self.thresholds, self.first_full, c);
            match level {
                Level::Resident(s) => {
                    let recs = s.records();
                    let refs: Vec<&[u8]> = recs.iter().map(|(_, r)| &r[..]).collect();
                    write_level_file(&path, &header, &refs)?;
                }
                Level::Spilled(s) => {
                    if s.path() != path {
                        fs::copy(s.path(), &path).map_err(|e| SearchError::io(&path, e))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Loads `level_000.adv ..= level_{budget}.adv` from `dir` into memory.
    pub fn read_dir(dir: &Path, threads: usize) -> Result<Self, SearchError> {
        let first = dir.join(level_file_name(0));
        let (h0, _) = read_level_file(&first)?;
        let n = h0.n as usize;
        let budget = h0.budget as usize;
        let mut schedule = Vec::with_capacity(budget + 1);
        let mut levels = Vec::with_capacity(budget + 1);
        for c in 0..=budget {
            let path: PathBuf = dir.join(level_file_name(c));
            let (h, records) = read_level_file(&path)?;
            if h.n != h0.n || h.budget != h0.budget || h.first_full != h0.first_full || h.level as usize != c {
                return Err(SearchError::format(&path, "header does not match level_000.adv"));
            }
            schedule.push(h.bandwidth()?);
            let store = LayerStore::new(n, threads);
            fill_from_records(&store, records)?;
            levels.push(Level::Resident(store));
        }
        let thresholds = Thresholds::scheduled(n, budget, schedule)?;
        Ok(Advice::new(thresholds, h0.first_full as usize, levels))
    }
}

/// Lookup shared by the backward search (over its finished levels) and
/// [`Advice::find`]. A poset at a partial level `d` is stored only if
/// `min_extensions(d) <= e <= max_extensions(d)`; since the threshold is
/// below twice `E_tot`, at most one partial level qualifies.
pub(crate) fn find_in(
    levels: &[Level],
    t: &Thresholds,
    first_full: usize,
    c: &Canonical,
    e: u128,
    from: usize,
) -> Result<Option<(usize, Status)>, SearchError> {
    let budget = t.budget();
    for d in from..first_full.min(budget + 1) {
        if t.within_threshold(e, d) && !t.prunable(e, d) {
            if let Some(s) = levels[d].get(c)? {
                return Ok(Some((d, s)));
            }
        }
    }
    for d in from.max(first_full)..=budget {
        if t.prunable(e, d) {
            break;
        }
        if let Some(s) = levels[d].get(c)? {
            return Ok(Some((d, s)));
        }
    }
    Ok(None)
}
