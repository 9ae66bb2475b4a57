//! Posets stored as topologically ordered Hasse diagrams.
//!
//! Elements are `0..n`. A [`Poset`] keeps, for every element `i`, the mask of
//! its upper covers. Every cover `(i, j)` satisfies `i < j`, so only the upper
//! triangle of the adjacency matrix carries information. A [`Relation`] is the
//! reflexive-transitive closure, stored as one "up-set" mask per element, and
//! may use any labeling.

use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

use crate::error::CoreError;

/// Largest supported element count. A down-set then fits in one `u32`.
pub const MAX_N: usize = 31;

/// Bit mask over the elements of a poset.
pub type Mask = u32;

/// Canonical representation is unique.
pub const FLAG_CANONICAL: u8 = 1 << 0;
/// Representation is unique with respect to the dual.
pub const FLAG_DUAL_CANONICAL: u8 = 1 << 1;
pub const FLAG_SORTABLE: u8 = 1 << 2;
pub const FLAG_UNKNOWN: u8 = 1 << 3;
pub const FLAG_RESERVED: u8 = 1 << 4;

const IDENTITY_FLAGS: u8 = FLAG_CANONICAL | FLAG_DUAL_CANONICAL;
const STATUS_FLAGS: u8 = FLAG_SORTABLE | FLAG_UNKNOWN | FLAG_RESERVED;

/// Number of bits of Hasse-diagram payload for `n` elements.
pub const fn triangle_bits(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// Serialized size in bytes: `n(n-1)/2 + 5` bits rounded up.
pub const fn packed_len(n: usize) -> usize {
    (triangle_bits(n) + 5).div_ceil(8)
}

#[inline]
pub(crate) fn bit(i: usize) -> Mask {
    1 << i
}

#[inline]
pub(crate) fn full_mask(n: usize) -> Mask {
    if n >= 32 {
        Mask::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Iterator over the set bits of a mask, lowest first.
#[derive(Clone, Copy)]
pub struct Bits(pub Mask);

impl Iterator for Bits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let i = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(i)
        }
    }
}

/// A poset on `n` elements, represented by its Hasse diagram in a topological
/// labeling, plus five flag bits.
///
/// Equality and hashing look only at `n`, the Hasse diagram and the two
/// canonicality flags; the status bits are storage metadata.
#[derive(Clone, Copy)]
pub struct Poset {
    n: u8,
    flags: u8,
    succ: [Mask; MAX_N],
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && (self.flags & IDENTITY_FLAGS) == (other.flags & IDENTITY_FLAGS)
            && self.covers() == other.covers()
    }
}

impl Eq for Poset {}

impl Hash for Poset {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        (self.flags & IDENTITY_FLAGS).hash(state);
        self.covers().hash(state);
    }
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for (i, j) in self.edges() {
            list.entry(&(i, j));
        }
        list.finish()?;
        write!(f, " n={} flags={:05b}", self.n, self.flags)
    }
}

impl Poset {
    /// The unordered poset `P0`.
    pub fn antichain(n: usize) -> Self {
        assert!(n <= MAX_N, "n = {n} exceeds the supported maximum {MAX_N}");
        Poset {
            n: n as u8,
            flags: 0,
            succ: [0; MAX_N],
        }
    }

    /// The total order `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let mut p = Self::antichain(n);
        for i in 1..n {
            p.succ[i - 1] = bit(i);
        }
        p
    }

    /// Poset generated by an acyclic edge set over arbitrary labels.
    ///
    /// The result is reduced and relabeled in stable topological order.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, CoreError> {
        if n > MAX_N {
            return Err(CoreError::TooManyElements(n));
        }
        let mut succ = [0 as Mask; MAX_N];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(CoreError::ElementOutOfRange { element: u.max(v), n });
            }
            if u == v {
                return Err(CoreError::Cyclic);
            }
            succ[u] |= bit(v);
        }
        let rel = Relation::closure_of(n, &succ)?;
        hasse_reduce(&rel)
    }

    /// Builds a poset from cover masks that are already topologically labeled
    /// and transitively reduced. Intended for trusted internal callers.
    pub(crate) fn from_covers_unchecked(n: usize, covers: &[Mask]) -> Self {
        let mut p = Self::antichain(n);
        p.succ[..n].copy_from_slice(&covers[..n]);
        p
    }

    /// Validating counterpart of [`Poset::from_covers_unchecked`].
    pub fn from_covers(n: usize, covers: &[Mask]) -> Result<Self, CoreError> {
        if n > MAX_N {
            return Err(CoreError::TooManyElements(n));
        }
        for i in 0..n {
            let row = covers[i];
            if row & !full_mask(n) != 0 {
                return Err(CoreError::ElementOutOfRange { element: 31 - row.leading_zeros() as usize, n });
            }
            if row & full_mask(i + 1) != 0 {
                return Err(CoreError::NotTopological);
            }
        }
        let p = Self::from_covers_unchecked(n, covers);
        if !p.is_reduced() {
            return Err(CoreError::NotReduced);
        }
        Ok(p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn flags(&self) -> u8 {
        self.flags
    }

    #[inline]
    pub fn is_canonical(&self) -> bool {
        self.flags & FLAG_CANONICAL != 0
    }

    #[inline]
    pub fn is_dual_canonical(&self) -> bool {
        self.flags & FLAG_DUAL_CANONICAL != 0
    }

    /// Canonical and unique with respect to the dual: bitwise comparison
    /// decides congruence.
    #[inline]
    pub fn is_fully_canonical(&self) -> bool {
        self.flags & IDENTITY_FLAGS == IDENTITY_FLAGS
    }

    pub(crate) fn set_identity_flags(&mut self, canonical: bool, dual_canonical: bool) {
        self.flags &= !IDENTITY_FLAGS;
        if canonical {
            self.flags |= FLAG_CANONICAL;
        }
        if dual_canonical {
            self.flags |= FLAG_DUAL_CANONICAL;
        }
    }

    /// Status bits (sortable, unknown, reserved).
    #[inline]
    pub fn status_bits(&self) -> u8 {
        self.flags & STATUS_FLAGS
    }

    pub fn with_status_bits(mut self, bits: u8) -> Self {
        self.flags = (self.flags & IDENTITY_FLAGS) | (bits & STATUS_FLAGS);
        self
    }

    /// Upper covers of every element.
    #[inline]
    pub fn covers(&self) -> &[Mask] {
        &self.succ[..self.n as usize]
    }

    #[inline]
    pub fn upper_covers(&self, i: usize) -> Mask {
        self.succ[i]
    }

    pub fn lower_covers(&self) -> [Mask; MAX_N] {
        let mut pred = [0; MAX_N];
        for i in 0..self.n() {
            for j in Bits(self.succ[i]) {
                pred[j] |= bit(i);
            }
        }
        pred
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n() && self.succ[i] & bit(j) != 0
    }

    pub fn edge_count(&self) -> usize {
        self.covers().iter().map(|m| m.count_ones() as usize).sum()
    }

    /// Hasse edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| Bits(self.succ[i]).map(move |j| (i, j)))
    }

    pub fn transitive_closure(&self) -> Relation {
        let n = self.n();
        let mut up = [0 as Mask; MAX_N];
        for i in (0..n).rev() {
            let mut m = bit(i);
            for j in Bits(self.succ[i]) {
                m |= up[j];
            }
            up[i] = m;
        }
        Relation { n: self.n, up }
    }

    /// `p[u<v]`: the poset generated by adding the comparison `u < v`.
    pub fn add_comparison(&self, u: usize, v: usize) -> Result<Poset, CoreError> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(CoreError::ElementOutOfRange { element: u.max(v), n });
        }
        let rel = self.transitive_closure();
        if u == v || rel.comparable(u, v) {
            return Err(CoreError::AlreadyComparable { u, v });
        }
        Ok(hasse_reduce_trusted(&rel.with_comparison(u, v)))
    }

    /// The dual poset (all edges reversed), re-topologized.
    pub fn dual(&self) -> Poset {
        let n = self.n();
        let pred = self.lower_covers();
        relabel_stable_kahn(n, &pred)
    }

    pub fn is_total_order(&self) -> bool {
        let n = self.n();
        (0..n.saturating_sub(1)).all(|i| self.succ[i] == bit(i + 1))
    }

    pub fn is_unordered(&self) -> bool {
        self.covers().iter().all(|&m| m == 0)
    }

    /// Elements without incident Hasse edges.
    pub fn singleton_mask(&self) -> Mask {
        let mut touched = 0;
        for i in 0..self.n() {
            if self.succ[i] != 0 {
                touched |= bit(i) | self.succ[i];
            }
        }
        full_mask(self.n()) & !touched
    }

    pub fn singletons(&self) -> Vec<usize> {
        Bits(self.singleton_mask()).collect()
    }

    /// Connected components with exactly two elements, as `(lower, upper)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let pred = self.lower_covers();
        let mut out = Vec::new();
        for i in 0..self.n() {
            let s = self.succ[i];
            if s.count_ones() == 1 && pred[i] == 0 {
                let j = s.trailing_zeros() as usize;
                if self.succ[j] == 0 && pred[j] == bit(i) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True when no stored edge is implied by a longer path.
    pub fn is_reduced(&self) -> bool {
        let rel = self.transitive_closure();
        (0..self.n()).all(|i| {
            let mut implied = 0;
            for j in Bits(self.succ[i]) {
                implied |= rel.strictly_above(j);
            }
            implied & self.succ[i] == 0
        })
    }

    /// Serializes into `packed_len(n)` bytes: flag bits 0..5 of byte 0, then
    /// the triangle row-major, least significant bit first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = alloc::vec![0u8; packed_len(self.n())];
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut [u8]) {
        let n = self.n();
        let len = packed_len(n);
        out[..len].fill(0);
        out[0] = self.flags & 0x1f;
        let mut pos = 5usize;
        for i in 0..n {
            let row = self.succ[i];
            for j in i + 1..n {
                if row & bit(j) != 0 {
                    out[pos / 8] |= 1 << (pos % 8);
                }
                pos += 1;
            }
        }
    }

    pub fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self, CoreError> {
        if n > MAX_N {
            return Err(CoreError::TooManyElements(n));
        }
        let len = packed_len(n);
        if bytes.len() < len {
            return Err(CoreError::Truncated { expected: len, got: bytes.len() });
        }
        let used = triangle_bits(n) + 5;
        if !used.is_multiple_of(8) && bytes[len - 1] >> (used % 8) != 0 {
            return Err(CoreError::NonZeroPadding);
        }
        let mut p = Self::antichain(n);
        p.flags = bytes[0] & 0x1f;
        let mut pos = 5usize;
        for i in 0..n {
            for j in i + 1..n {
                if bytes[pos / 8] & (1 << (pos % 8)) != 0 {
                    p.succ[i] |= bit(j);
                }
                pos += 1;
            }
        }
        if !p.is_reduced() {
            return Err(CoreError::NotReduced);
        }
        Ok(p)
    }
}

/// Reflexive-transitive closure: `up[i]` holds every `j` with `i <= j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Relation {
    n: u8,
    up: [Mask; MAX_N],
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.n() {
            for j in Bits(self.strictly_above(i)) {
                list.entry(&(i, j));
            }
        }
        list.finish()
    }
}

impl Relation {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_N);
        let mut up = [0; MAX_N];
        for (i, m) in up.iter_mut().enumerate().take(n) {
            *m = bit(i);
        }
        Relation { n: n as u8, up }
    }

    /// Relation from raw up-set masks. The reflexive bits are added; no other
    /// property is checked (see [`Relation::is_partial_order`]).
    pub fn from_up_sets(n: usize, up_sets: &[Mask]) -> Self {
        let mut r = Self::identity(n);
        for i in 0..n {
            r.up[i] |= up_sets[i] & full_mask(n);
        }
        r
    }

    /// Closure of an arbitrary edge relation given as successor masks.
    pub fn closure_of(n: usize, succ: &[Mask]) -> Result<Self, CoreError> {
        let order = kahn_order(n, succ).ok_or(CoreError::Cyclic)?;
        let mut up = [0 as Mask; MAX_N];
        for &i in order[..n].iter().rev() {
            let i = i as usize;
            let mut m = bit(i);
            for j in Bits(succ[i]) {
                m |= up[j];
            }
            up[i] = m;
        }
        Ok(Relation { n: n as u8, up })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn up_sets(&self) -> &[Mask] {
        &self.up[..self.n()]
    }

    #[inline]
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.up[i] & bit(j) != 0
    }

    #[inline]
    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.le(i, j) || self.le(j, i)
    }

    #[inline]
    pub fn strictly_above(&self, i: usize) -> Mask {
        self.up[i] & !bit(i)
    }

    /// Elements strictly below each element.
    pub fn down_sets_of_elements(&self) -> [Mask; MAX_N] {
        let mut down = [0; MAX_N];
        for i in 0..self.n() {
            for j in Bits(self.strictly_above(i)) {
                down[j] |= bit(i);
            }
        }
        down
    }

    /// Number of strictly comparable pairs.
    pub fn comparable_pairs(&self) -> usize {
        (0..self.n()).map(|i| self.strictly_above(i).count_ones() as usize).sum()
    }

    pub fn is_partial_order(&self) -> bool {
        let n = self.n();
        for i in 0..n {
            if self.up[i] & bit(i) == 0 || self.up[i] & !full_mask(n) != 0 {
                return false;
            }
            for j in Bits(self.strictly_above(i)) {
                if self.le(j, i) || self.up[j] & !self.up[i] != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Closure after adding `u <= v`.
    pub fn with_comparison(&self, u: usize, v: usize) -> Relation {
        let mut r = *self;
        let add = self.up[v];
        for x in 0..self.n() {
            if self.up[x] & bit(u) != 0 {
                r.up[x] |= add;
            }
        }
        r
    }

    /// Cover relation in the relation's own labeling.
    pub fn covers(&self) -> [Mask; MAX_N] {
        let mut cover = [0; MAX_N];
        for i in 0..self.n() {
            let strict = self.strictly_above(i);
            let mut implied = 0;
            for k in Bits(strict) {
                implied |= self.strictly_above(k);
            }
            cover[i] = strict & !implied;
        }
        cover
    }
}

/// Stable Kahn order: repeatedly take the smallest-index element whose
/// predecessors are all placed. `None` if the relation has a cycle.
pub(crate) fn kahn_order(n: usize, succ: &[Mask]) -> Option<[u8; MAX_N]> {
    let mut pred = [0 as Mask; MAX_N];
    for i in 0..n {
        for j in Bits(succ[i] & full_mask(n)) {
            pred[j] |= bit(i);
        }
    }
    let mut order = [0u8; MAX_N];
    let mut placed: Mask = 0;
    for slot in order.iter_mut().take(n) {
        let avail = (0..n).find(|&i| placed & bit(i) == 0 && pred[i] & !placed == 0)?;
        *slot = avail as u8;
        placed |= bit(avail);
    }
    Some(order)
}

/// Relabels an acyclic cover relation by stable Kahn order.
pub(crate) fn relabel_stable_kahn(n: usize, covers: &[Mask]) -> Poset {
    let order = kahn_order(n, covers).expect("cover relation must be acyclic");
    relabel(n, covers, &order)
}

/// `order[k]` is the old label of the element that gets new label `k`.
pub(crate) fn relabel(n: usize, covers: &[Mask], order: &[u8]) -> Poset {
    let mut new_of = [0u8; MAX_N];
    for (k, &old) in order[..n].iter().enumerate() {
        new_of[old as usize] = k as u8;
    }
    let mut p = Poset::antichain(n);
    for (k, &old) in order[..n].iter().enumerate() {
        let mut row = 0;
        for j in Bits(covers[old as usize]) {
            row |= bit(new_of[j] as usize);
        }
        p.succ[k] = row;
    }
    p
}

fn hasse_reduce_trusted(r: &Relation) -> Poset {
    relabel_stable_kahn(r.n(), &r.covers())
}

/// Minimal edge set generating `r`, re-indexed in stable topological order.
pub fn hasse_reduce(r: &Relation) -> Result<Poset, CoreError> {
    let n = r.n();
    for i in 0..n {
        for j in Bits(r.strictly_above(i)) {
            if r.le(j, i) {
                return Err(CoreError::Cyclic);
            }
        }
    }
    if !r.is_partial_order() {
        return Err(CoreError::NotTransitive);
    }
    Ok(hasse_reduce_trusted(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The seven-element poset of the predecessor-enumeration figure, with
    /// elements renumbered from zero.
    pub(crate) fn figure_poset() -> Poset {
        Poset::from_edges(7, &[(0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)]).unwrap()
    }

    #[test]
    fn closure_of_antichain_is_identity() {
        let r = Poset::antichain(3).transitive_closure();
        assert_eq!(r, Relation::identity(3));
    }

    #[test]
    fn closure_of_chain_adds_transitive_pair() {
        let r = Poset::chain(3).transitive_closure();
        assert!(r.le(0, 2));
        assert_eq!(r.comparable_pairs(), 3);
    }

    #[test]
    fn figure_closure_contains_implied_edges() {
        let p = figure_poset();
        assert_eq!(p.edge_count(), 7);
        let r = p.transitive_closure();
        // The comparison (3,4) of the figure is (2,3) here; it implies every
        // pair from {0,1,2} to {3,4,5,6} except itself.
        let implied: Vec<(usize, usize)> = (0..3)
            .flat_map(|x| (3..7).map(move |y| (x, y)))
            .filter(|&e| e != (2, 3))
            .collect();
        assert_eq!(implied.len(), 11);
        assert!(implied.iter().all(|&(x, y)| r.le(x, y)));
        assert_eq!(r.comparable_pairs(), 19);
    }

    #[test]
    fn reduce_chain_closure() {
        let p = hasse_reduce(&Poset::chain(3).transitive_closure()).unwrap();
        assert_eq!(p.edges().collect::<Vec<_>>(), alloc::vec![(0, 1), (1, 2)]);
        assert!(hasse_reduce(&Relation::identity(5)).unwrap().is_unordered());
    }

    #[test]
    fn reduce_rejects_cycles() {
        let r = Relation::from_up_sets(2, &[0b11, 0b11]);
        assert_eq!(hasse_reduce(&r), Err(CoreError::Cyclic));
        assert_eq!(Poset::from_edges(3, &[(0, 1), (1, 2), (2, 0)]), Err(CoreError::Cyclic));
    }

    #[test]
    fn add_comparison_examples() {
        let p = Poset::antichain(2).add_comparison(0, 1).unwrap();
        assert!(p.is_total_order());
        let two_pairs = Poset::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let (b, c) = (1, 2);
        let q = two_pairs.add_comparison(b, c).unwrap();
        assert!(q.is_total_order());
        assert_eq!(q.edge_count(), 3);
        assert_eq!(
            two_pairs.add_comparison(0, 1),
            Err(CoreError::AlreadyComparable { u: 0, v: 1 })
        );
    }

    #[test]
    fn dual_examples() {
        assert!(Poset::chain(3).dual().is_total_order());
        let vee = Poset::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let lambda = vee.dual();
        assert_eq!(lambda.edges().collect::<Vec<_>>(), alloc::vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn singletons_and_pairs() {
        assert!(Poset::chain(6).is_total_order());
        let a = Poset::antichain(5);
        assert_eq!(a.singletons().len(), 5);
        assert!(a.pairs().is_empty());
        let p = Poset::from_edges(4, &[(0, 1)]).unwrap();
        assert_eq!(p.singletons(), alloc::vec![2, 3]);
        assert_eq!(p.pairs(), alloc::vec![(0, 1)]);
        assert!(!p.is_total_order());
    }

    #[test]
    fn packed_sizes() {
        assert_eq!(packed_len(16), 16);
        assert_eq!(packed_len(13), 11);
        assert_eq!(packed_len(31), 59);
        assert_eq!(Poset::chain(13).to_bytes().len(), 11);
    }

    #[test]
    fn bytes_reject_unreduced_and_padding() {
        let mut bytes = Poset::chain(3).to_bytes();
        // Set the transitive bit (0,2): second triangle bit.
        bytes[0] |= 1 << 6;
        assert_eq!(Poset::from_bytes(3, &bytes), Err(CoreError::NotReduced));
        let mut bytes = Poset::chain(4).to_bytes();
        bytes[1] |= 0x80;
        assert_eq!(Poset::from_bytes(4, &bytes), Err(CoreError::NonZeroPadding));
    }

    #[test]
    fn from_covers_validates() {
        assert_eq!(Poset::from_covers(2, &[0, 0b1]), Err(CoreError::NotTopological));
        assert_eq!(Poset::from_covers(3, &[0b110, 0b100, 0]), Err(CoreError::NotReduced));
        assert!(Poset::from_covers(3, &[0b10, 0b100, 0]).unwrap().is_total_order());
    }
}
