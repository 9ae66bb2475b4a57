#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sortbound_core::{Mask, Poset, MAX_N};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_poset(rng: &mut impl Rng, n: usize) -> Poset {
    let density: f64 = rng.gen_range(0.05..0.5);
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

/// Every labeled poset on `n` elements whose order extends `0 < 1 < ..`.
pub fn all_posets(n: usize) -> Vec<Poset> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
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

pub fn random_perm(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Cover masks of `p` relabeled by `perm` (old label -> new).
pub fn permuted_covers(p: &Poset, perm: &[usize]) -> Vec<Mask> {
    let mut covers = vec![0 as Mask; p.n()];
    for (i, j) in p.edges() {
        covers[perm[i]] |= 1 << perm[j];
    }
    covers
}

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

pub fn covers_array(p: &Poset) -> [Mask; MAX_N] {
    let mut a = [0; MAX_N];
    a[..p.n()].copy_from_slice(p.covers());
    a
}
