#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sortbound_core::{Mask, Poset, MAX_N};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_poset(rng: &mut impl Rng, n: usize) -> Poset {
    let density: f64 = rng.gen_range(0.05..0.6);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Poset::from_edges(n, &edges).unwrap()
}

/// Every poset on `n` elements (many times over), from all subsets of the
/// upper triangle.
pub fn all_posets(n: usize) -> Vec<Poset> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for subset in 0u32..(1 << pairs.len()) {
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| subset & (1 << k) != 0)
            .map(|(_, &e)| e)
            .collect();
        let p = Poset::from_edges(n, &edges).unwrap();
        if seen.insert(p.to_bytes()) {
            out.push(p);
        }
    }
    out
}

/// Cover masks of `p` under the permutation `perm` (old label -> new).
pub fn permuted_covers(p: &Poset, perm: &[usize]) -> Vec<Mask> {
    let n = p.n();
    let mut covers = vec![0 as Mask; n];
    for (i, j) in p.edges() {
        covers[perm[i]] |= 1 << perm[j];
    }
    covers
}

pub fn random_perm(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Reversed cover masks.
pub fn dual_covers(n: usize, covers: &[Mask]) -> Vec<Mask> {
    let mut out = vec![0 as Mask; n];
    for i in 0..n {
        for j in 0..n {
            if covers[i] & (1 << j) != 0 {
                out[j] |= 1 << i;
            }
        }
    }
    out
}

/// Exact isomorphism by trying every permutation.
pub fn brute_isomorphic(n: usize, a: &[Mask], b: &[Mask]) -> bool {
    let mut perm: Vec<usize> = (0..n).collect();
    fn next(perm: &mut [usize]) -> bool {
        let n = perm.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
        true
    }
    loop {
        let ok = (0..n).all(|i| {
            let mut m: Mask = 0;
            for j in 0..n {
                if a[i] & (1 << j) != 0 {
                    m |= 1 << perm[j];
                }
            }
            m == b[perm[i]]
        });
        if ok {
            return true;
        }
        if !next(&mut perm) {
            return false;
        }
    }
}

pub fn brute_congruent(p: &Poset, q: &Poset) -> bool {
    let n = p.n();
    n == q.n()
        && (brute_isomorphic(n, p.covers(), q.covers())
            || brute_isomorphic(n, p.covers(), &dual_covers(n, q.covers())))
}

pub fn covers_array(p: &Poset) -> [Mask; MAX_N] {
    let mut a = [0; MAX_N];
    a[..p.n()].copy_from_slice(p.covers());
    a
}
