//! Brute-force reference implementations for small posets.
//!
//! Nothing here shares code with the fast paths beyond reading a
//! [`Poset`]'s edges.

use alloc::vec::Vec;

use hashbrown::HashMap;
use num_bigint::BigUint;
use num_traits::One;

use crate::poset::{Mask, Poset, MAX_N};

/// Reflexive up-sets, computed by repeated squaring of the edge relation.
fn closure(p: &Poset) -> [Mask; MAX_N] {
    let n = p.n();
    let mut up = [0 as Mask; MAX_N];
    for (i, slot) in up.iter_mut().enumerate().take(n) {
        *slot = 1 << i;
    }
    for (i, j) in p.edges() {
        up[i] |= 1 << j;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            let mut m = up[i];
            for j in 0..n {
                if m & (1 << j) != 0 {
                    m |= up[j];
                }
            }
            if m != up[i] {
                up[i] = m;
                changed = true;
            }
        }
        if !changed {
            return up;
        }
    }
}

/// Number of linear extensions by enumerating compatible permutations.
pub fn brute_extensions(p: &Poset) -> u128 {
    let n = p.n();
    let up = closure(p);
    let mut below = [0 as Mask; MAX_N];
    for i in 0..n {
        for j in 0..n {
            if i != j && up[i] & (1 << j) != 0 {
                below[j] |= 1 << i;
            }
        }
    }
    fn go(n: usize, placed: Mask, below: &[Mask; MAX_N]) -> u128 {
        if placed.count_ones() as usize == n {
            return 1;
        }
        let mut total = 0;
        for x in 0..n {
            if placed & (1 << x) == 0 && below[x] & !placed == 0 {
                total += go(n, placed | (1 << x), below);
            }
        }
        total
    }
    go(n, 0, &below)
}

/// Game-tree evaluation of "sortable in `r` more comparisons", memoized on
/// the exact labeled relation. Intended for `n <= 8`.
pub struct Minimax {
    n: usize,
    // key -> (largest r known false, plus one; smallest r known true)
    memo: HashMap<u64, (u8, u8)>,
}

impl Minimax {
    pub fn new(n: usize) -> Self {
        assert!(n <= 8, "relation key holds at most 8 elements");
        Minimax {
            n,
            memo: HashMap::new(),
        }
    }

    fn key(&self, up: &[u8; 8]) -> u64 {
        u64::from_le_bytes(*up)
    }

    fn total(&self, up: &[u8; 8]) -> bool {
        let pairs: u32 = up[..self.n].iter().map(|m| m.count_ones() - 1).sum();
        pairs as usize == self.n * (self.n - 1) / 2
    }

    fn add(&self, up: &[u8; 8], u: usize, v: usize) -> [u8; 8] {
        let mut out = *up;
        for x in 0..self.n {
            if up[x] & (1 << u) != 0 {
                out[x] |= up[v];
            }
        }
        out
    }

    pub fn sortable(&mut self, p: &Poset, r: usize) -> bool {
        assert_eq!(p.n(), self.n);
        let c = closure(p);
        let mut up = [0u8; 8];
        for i in 0..self.n {
            up[i] = c[i] as u8;
        }
        self.solve(&up, r.min(255) as u8)
    }

    fn solve(&mut self, up: &[u8; 8], r: u8) -> bool {
        if self.total(up) {
            return true;
        }
        if r == 0 {
            return false;
        }
        let key = self.key(up);
        if let Some(&(false_below, true_from)) = self.memo.get(&key) {
            if r >= true_from {
                return true;
            }
            if r < false_below {
                return false;
            }
        }
        let mut result = false;
        'outer: for u in 0..self.n {
            for v in (u + 1)..self.n {
                if up[u] & (1 << v) != 0 || up[v] & (1 << u) != 0 {
                    continue;
                }
                let a = self.add(up, u, v);
                if !self.solve(&a, r - 1) {
                    continue;
                }
                let b = self.add(up, v, u);
                if self.solve(&b, r - 1) {
                    result = true;
                    break 'outer;
                }
            }
        }
        let entry = self.memo.entry(key).or_insert((0, u8::MAX));
        if result {
            entry.1 = entry.1.min(r);
        } else {
            entry.0 = entry.0.max(r + 1);
        }
        result
    }
}

/// True iff `p` can be sorted with `r` more comparisons.
pub fn minimax_sortable(p: &Poset, r: usize) -> bool {
    Minimax::new(p.n()).sortable(p, r)
}

/// Smallest `r` with [`minimax_sortable`]`(antichain(n), r)`.
pub fn minimax_s(n: usize) -> usize {
    let mut m = Minimax::new(n);
    let p = Poset::antichain(n);
    (0..).find(|&r| m.sortable(&p, r)).unwrap()
}

/// All Hasse diagrams `Q` (labeled like `p`) with `(Q + (u,v))* = p*`,
/// found by dropping `(u, v)` and every subset of the comparisons it
/// implies.
pub fn brute_predecessors(p: &Poset, u: usize, v: usize) -> Vec<Poset> {
    let n = p.n();
    let up = closure(p);
    let mut implied = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if up[x] & (1 << u) != 0 && up[v] & (1 << y) != 0 && (x, y) != (u, v) {
                implied.push((x, y));
            }
        }
    }
    assert!(implied.len() < 24, "too many implied comparisons for brute force");
    let mut out = Vec::new();
    for subset in 0u32..(1 << implied.len()) {
        let mut rel = up;
        rel[u] &= !(1 << v);
        for (k, &(x, y)) in implied.iter().enumerate() {
            if subset & (1 << k) != 0 {
                rel[x] &= !(1 << y);
            }
        }
        if !transitive(n, &rel) {
            continue;
        }
        let mut again = rel;
        for x in 0..n {
            if rel[x] & (1 << u) != 0 {
                again[x] |= rel[v];
            }
        }
        if again[..n] != up[..n] {
            continue;
        }
        out.push(hasse_of(n, &rel));
    }
    out
}

fn transitive(n: usize, rel: &[Mask; MAX_N]) -> bool {
    (0..n).all(|i| (0..n).all(|j| rel[i] & (1 << j) == 0 || rel[j] & !rel[i] == 0))
}

fn hasse_of(n: usize, rel: &[Mask; MAX_N]) -> Poset {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || rel[i] & (1 << j) == 0 {
                continue;
            }
            let between = (0..n).any(|k| k != i && k != j && rel[i] & (1 << k) != 0 && rel[k] & (1 << j) != 0);
            if !between {
                edges.push((i, j));
            }
        }
    }
    let mut covers = [0 as Mask; MAX_N];
    for &(i, j) in &edges {
        covers[i] |= 1 << j;
    }
    Poset::from_covers(n, &covers[..n]).expect("sub-relation of a topological order")
}

/// `ceil(log2(n!))`.
pub fn info_lower_bound(n: usize) -> usize {
    let f = (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k);
    (f - 1u32).bits() as usize
}

/// Comparisons used by merge insertion: `sum_{k=1..n} ceil(log2(3k/4))`.
pub fn ford_johnson_count(n: usize) -> usize {
    (1..=n)
        .map(|k| (0..).find(|&t| (1u64 << (t + 2)) >= 3 * k as u64).unwrap())
        .sum()
}

/// Known values of `S(n)` for `n = 1..=22`, index `n - 1`.
pub const KNOWN_S: [usize; 22] = [
    0, 1, 3, 5, 7, 10, 13, 16, 19, 22, 26, 30, 34, 38, 42, 46, 50, 54, 58, 62, 66, 71,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        assert_eq!(info_lower_bound(1), 0);
        assert_eq!(info_lower_bound(12), 29);
        assert_eq!(info_lower_bound(13), 33);
        assert_eq!(info_lower_bound(16), 45);
        assert_eq!(ford_johnson_count(1), 0);
        assert_eq!(ford_johnson_count(12), 30);
        assert_eq!(ford_johnson_count(16), 46);
        assert_eq!(ford_johnson_count(47), 201);
    }

    #[test]
    fn brute_extension_examples() {
        assert_eq!(brute_extensions(&Poset::antichain(5)), 120);
        assert_eq!(brute_extensions(&Poset::chain(6)), 1);
    }

    #[test]
    fn minimax_four() {
        let p = Poset::antichain(4);
        assert!(minimax_sortable(&p, 5));
        assert!(!minimax_sortable(&p, 4));
        assert!(minimax_sortable(&Poset::chain(4), 0));
    }

    #[test]
    fn brute_predecessors_small() {
        let got = brute_predecessors(&Poset::chain(2), 0, 1);
        assert_eq!(got.len(), 1);
        assert!(got[0].is_unordered());
        // chain 0<1<2, edge (1,2): Q has 0<1 and optionally 0<2
        let got = brute_predecessors(&Poset::chain(3), 1, 2);
        assert_eq!(got.len(), 2);
    }
}
