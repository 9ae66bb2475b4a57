//! Linear-extension counting over the lattice of down-sets.
//!
//! `e(D)` is the number of linear extensions of the subposet induced by a
//! down-set `D`, `f(D)` the number for its complement. Placing `u` right
//! after `D` contributes `e(D) * f(D + u)` extensions, which gives all
//! child counts `e(P[u<v])` in one pass.

use alloc::vec;
use alloc::vec::Vec;

use crate::poset::{bit, full_mask, Bits, Mask, Poset, MAX_N};

/// Default largest element count for the dense mask-indexed table.
pub const DENSE_LIMIT: usize = 18;

/// `e(P[u<v])` for every ordered pair of elements.
#[derive(Debug, Clone)]
pub struct ChildCounts {
    n: usize,
    total: u128,
    table: Vec<u128>,
    down_sets: usize,
    singletons: usize,
}

impl ChildCounts {
    pub fn total(&self) -> u128 {
        self.total
    }

    /// `e(P[u<v])`. Zero when `v < u` already holds, `e(P)` when `u < v` does.
    #[inline]
    pub fn with(&self, u: usize, v: usize) -> u128 {
        self.table[u * self.n + v]
    }

    /// Down-sets of the singleton-reduced poset that was counted.
    pub fn down_sets(&self) -> usize {
        self.down_sets
    }

    pub fn singletons(&self) -> usize {
        self.singletons
    }
}

/// Reusable tables for repeated counting.
#[derive(Debug, Clone)]
pub struct LinExtWorkspace {
    dense_limit: usize,
    downs: Vec<Mask>,
    e: Vec<u128>,
    f: Vec<u128>,
    index: Vec<u32>,
    acc: Vec<u128>,
}

impl Default for LinExtWorkspace {
    fn default() -> Self {
        Self::new()
    }
}

/// Strict down-sets and up-sets of the retained elements, relabeled
/// `0..m` in increasing original order.
struct Reduced {
    m: usize,
    below: [Mask; MAX_N],
    above: [Mask; MAX_N],
    /// Compressed index of every original element; dropped singletons map
    /// to the kept one.
    rep: [u8; MAX_N],
    singleton: Mask,
    factor: u128,
}

fn strict_up_sets(p: &Poset) -> [Mask; MAX_N] {
    let n = p.n();
    let mut up = [0; MAX_N];
    for i in (0..n).rev() {
        let mut s = p.upper_covers(i);
        for j in Bits(p.upper_covers(i)) {
            s |= up[j];
        }
        up[i] = s;
    }
    up
}

fn compress(mask: Mask, keep: Mask) -> Mask {
    let mut out = 0;
    let mut k = 0;
    for i in Bits(keep) {
        if mask & bit(i) != 0 {
            out |= bit(k);
        }
        k += 1;
    }
    out
}

fn reduce(p: &Poset) -> Reduced {
    let n = p.n();
    let up = strict_up_sets(p);
    let single = p.singleton_mask();
    let s = single.count_ones() as usize;
    let keep = if s > 1 {
        let first = single.trailing_zeros() as usize;
        full_mask(n) & !(single & !bit(first))
    } else {
        full_mask(n)
    };
    let m = keep.count_ones() as usize;
    let mut below = [0; MAX_N];
    let mut above = [0; MAX_N];
    let mut rep = [0u8; MAX_N];
    let mut k = 0;
    for i in 0..n {
        if keep & bit(i) != 0 {
            above[k] = compress(up[i], keep);
            rep[i] = k as u8;
            k += 1;
        }
    }
    for a in 0..m {
        for b in Bits(above[a]) {
            below[b] |= bit(a);
        }
    }
    if s > 1 {
        let kept = rep[single.trailing_zeros() as usize];
        for i in Bits(single) {
            rep[i] = kept;
        }
    }
    let mut factor: u128 = 1;
    for x in (m + 1)..=n {
        factor *= x as u128;
    }
    Reduced {
        m,
        below,
        above,
        rep,
        singleton: single,
        factor,
    }
}

/// Appends all down-sets in increasing numeric order.
fn push_down_sets(i: usize, d: Mask, forced: Mask, below: &[Mask], out: &mut Vec<Mask>) {
    if i == 0 {
        out.push(d);
        return;
    }
    let k = i - 1;
    if forced & bit(k) == 0 {
        push_down_sets(k, d, forced, below, out);
    }
    push_down_sets(k, d | bit(k), forced | below[k], below, out);
}

impl LinExtWorkspace {
    pub fn new() -> Self {
        Self::with_dense_limit(DENSE_LIMIT)
    }

    /// Posets on more than `dense_limit` (reduced) elements use a sorted
    /// down-set list with binary search instead of a `2^n` index table.
    pub fn with_dense_limit(dense_limit: usize) -> Self {
        LinExtWorkspace {
            dense_limit: dense_limit.min(MAX_N),
            downs: Vec::new(),
            e: Vec::new(),
            f: Vec::new(),
            index: Vec::new(),
            acc: Vec::new(),
        }
    }

    fn fill(&mut self, r: &Reduced, with_up: bool) {
        let m = r.m;
        self.downs.clear();
        push_down_sets(m, 0, 0, &r.below, &mut self.downs);
        let count = self.downs.len();
        let dense = m <= self.dense_limit;
        if dense {
            if self.index.len() < (1usize << m) {
                self.index.resize(1usize << m, 0);
            }
            for (k, &d) in self.downs.iter().enumerate() {
                self.index[d as usize] = k as u32;
            }
        }
        let downs = &self.downs;
        let index = &self.index;
        let lookup = |d: Mask| -> usize {
            if dense {
                index[d as usize] as usize
            } else {
                downs.binary_search(&d).expect("down-set closed under removal of maxima")
            }
        };
        self.e.clear();
        self.e.resize(count, 0);
        self.e[0] = 1;
        for k in 1..count {
            let d = downs[k];
            let mut s: u128 = 0;
            for u in Bits(d) {
                if r.above[u] & d == 0 {
                    s += self.e[lookup(d & !bit(u))];
                }
            }
            self.e[k] = s;
        }
        if with_up {
            let all = full_mask(m);
            self.f.clear();
            self.f.resize(count, 0);
            self.f[count - 1] = 1;
            for k in (0..count - 1).rev() {
                let d = downs[k];
                let mut s: u128 = 0;
                for u in Bits(all & !d) {
                    if r.below[u] & !d == 0 {
                        s += self.f[lookup(d | bit(u))];
                    }
                }
                self.f[k] = s;
            }
        }
    }

    /// Exact `e(p)`.
    pub fn count(&mut self, p: &Poset) -> u128 {
        let r = reduce(p);
        self.fill(&r, false);
        self.e[self.e.len() - 1] * r.factor
    }

    /// `e(p[u<v])` for all pairs together with `e(p)`.
    pub fn children(&mut self, p: &Poset) -> ChildCounts {
        let n = p.n();
        let r = reduce(p);
        self.fill(&r, true);
        let m = r.m;
        let total_reduced = self.e[self.e.len() - 1];
        self.acc.clear();
        self.acc.resize(m * m, 0);
        let dense = m <= self.dense_limit;
        let all = full_mask(m);
        for k in 0..self.downs.len() {
            let d = self.downs[k];
            let ed = self.e[k];
            for u in Bits(all & !d) {
                if r.below[u] & !d != 0 {
                    continue;
                }
                let du = d | bit(u);
                let j = if dense {
                    self.index[du as usize] as usize
                } else {
                    self.downs.binary_search(&du).expect("down-set")
                };
                let w = ed * self.f[j];
                let row = &mut self.acc[u * m..(u + 1) * m];
                for (v, cell) in row.iter_mut().enumerate() {
                    let keep = ((du >> v) & 1) as u128 ^ 1;
                    *cell += w & keep.wrapping_neg();
                }
            }
        }
        let total = total_reduced * r.factor;
        let mut table = vec![0u128; n * n];
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let both_single = r.singleton & bit(u) != 0 && r.singleton & bit(v) != 0;
                table[u * n + v] = if both_single {
                    total / 2
                } else {
                    self.acc[r.rep[u] as usize * m + r.rep[v] as usize] * r.factor
                };
            }
        }
        ChildCounts {
            n,
            total,
            table,
            down_sets: self.downs.len(),
            singletons: r.singleton.count_ones() as usize,
        }
    }
}

pub fn count_linear_extensions(p: &Poset) -> u128 {
    LinExtWorkspace::new().count(p)
}

pub fn count_all_children(p: &Poset) -> ChildCounts {
    LinExtWorkspace::new().children(p)
}

/// Number of down-sets of `p`, without singleton reduction.
pub fn count_down_sets(p: &Poset) -> u64 {
    let n = p.n();
    let up = strict_up_sets(p);
    let mut below = [0; MAX_N];
    for a in 0..n {
        for b in Bits(up[a]) {
            below[b] |= bit(a);
        }
    }
    fn walk(i: usize, forced: Mask, below: &[Mask]) -> u64 {
        if i == 0 {
            return 1;
        }
        let k = i - 1;
        let mut c = walk(k, forced | below[k], below);
        if forced & bit(k) == 0 {
            c += walk(k, forced, below);
        }
        c
    }
    walk(n, 0, &below)
}

/// `count <= sqrt(3)^(n + 2)`, decided in integers.
pub fn within_down_set_bound(n: usize, count: u64) -> bool {
    let bound = 3u128.pow(n as u32 + 2);
    (count as u128) * (count as u128) <= bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antichain_counts_factorial() {
        assert_eq!(count_linear_extensions(&Poset::antichain(4)), 24);
        assert_eq!(count_linear_extensions(&Poset::antichain(0)), 1);
        assert_eq!(count_linear_extensions(&Poset::antichain(1)), 1);
    }

    #[test]
    fn chain_counts_one() {
        assert_eq!(count_linear_extensions(&Poset::chain(9)), 1);
    }

    #[test]
    fn two_pairs_count_six() {
        let p = Poset::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(count_linear_extensions(&p), 6);
    }

    #[test]
    fn first_comparison_halves() {
        let c = count_all_children(&Poset::antichain(3));
        for u in 0..3 {
            for v in 0..3 {
                if u != v {
                    assert_eq!(c.with(u, v), 3);
                }
            }
        }
    }

    #[test]
    fn chain_plus_singleton_children() {
        // a=0 < b=1, c=2 free
        let p = Poset::from_edges(3, &[(0, 1)]).unwrap();
        let c = count_all_children(&p);
        assert_eq!(c.total(), 3);
        assert_eq!(c.with(2, 0), 1);
        assert_eq!(c.with(0, 2), 2);
        assert_eq!(c.with(0, 1), 3);
        assert_eq!(c.with(1, 0), 0);
    }

    #[test]
    fn compact_mode_matches_dense() {
        let p = Poset::from_edges(8, &[(0, 3), (1, 3), (2, 5), (3, 6), (4, 7)]).unwrap();
        let a = LinExtWorkspace::with_dense_limit(0).children(&p);
        let b = LinExtWorkspace::new().children(&p);
        assert_eq!(a.table, b.table);
        assert_eq!(a.total(), b.total());
    }

    #[test]
    fn down_set_examples() {
        assert_eq!(count_down_sets(&Poset::antichain(6)), 64);
        assert_eq!(count_down_sets(&Poset::chain(2)), 3);
        let m = Poset::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        assert_eq!(count_down_sets(&m), 27);
    }

    #[test]
    fn bound_check() {
        assert!(within_down_set_bound(13, 882));
        assert!(!within_down_set_bound(1, 6));
    }

    #[test]
    fn largest_count_fits() {
        let n = MAX_N;
        let f: u128 = (1..=n as u128).product();
        assert_eq!(count_linear_extensions(&Poset::antichain(n)), f);
    }
}
