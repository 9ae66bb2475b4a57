//! Canonical labeling by hash-based color refinement.
//!
//! Every vertex starts with a hash of its (in-degree, out-degree). Each round
//! a vertex sums its own hash and the hashes of all Hasse neighbours (both
//! directions), then rehashes the sum together with its degree hash. The
//! canonical labeling is a topological order that always takes the
//! smallest-colored available vertex.
//!
//! When equal colors remain, two cheap tests try to certify that the tied
//! vertices are interchangeable by automorphisms. If that fails the poset is
//! flagged as not canonical and congruence falls back to an exact
//! isomorphism search.

use alloc::vec::Vec;

use crate::poset::{bit, Bits, Mask, Poset, MAX_N};

/// Two-word multiply-xor mixer. Stable across platforms and runs.
#[inline]
pub fn hash_fn(a: u64, b: u64) -> u64 {
    let x = (a ^ 0x243f_6a88_85a3_08d3).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.rotate_left(29);
    let m = (x as u128).wrapping_mul(0xd6e8_feb8_6659_fd93);
    (m as u64) ^ ((m >> 64) as u64)
}

const FOLD_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// Per-vertex colors after refinement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorAssignment {
    pub colors: Vec<u64>,
    pub rounds: usize,
}

impl ColorAssignment {
    pub fn distinct(&self) -> usize {
        distinct_colors(&self.colors)
    }
}

fn distinct_colors(colors: &[u64]) -> usize {
    let mut buf = [0u64; MAX_N];
    let n = colors.len();
    buf[..n].copy_from_slice(colors);
    buf[..n].sort_unstable();
    let mut count = 0;
    for i in 0..n {
        if i == 0 || buf[i] != buf[i - 1] {
            count += 1;
        }
    }
    count
}

/// Runs exactly `rounds` refinement rounds on `p`.
pub fn color_refine(p: &Poset, rounds: usize) -> ColorAssignment {
    let n = p.n();
    let pred = p.lower_covers();
    let (colors, done) = refine(n, p.covers(), &pred, rounds, false);
    ColorAssignment {
        colors: colors[..n].to_vec(),
        rounds: done,
    }
}

/// Colors of `p`'s dual, expressed on `p`'s labels.
pub fn color_refine_dual(p: &Poset, rounds: usize) -> ColorAssignment {
    let n = p.n();
    let pred = p.lower_covers();
    let (colors, done) = refine(n, &pred, p.covers(), rounds, false);
    ColorAssignment {
        colors: colors[..n].to_vec(),
        rounds: done,
    }
}

fn degree_hashes(n: usize, succ: &[Mask], pred: &[Mask]) -> [u64; MAX_N] {
    let mut deg = [0u64; MAX_N];
    for v in 0..n {
        deg[v] = hash_fn(pred[v].count_ones() as u64, succ[v].count_ones() as u64);
    }
    deg
}

/// Refinement on an arbitrary labeling. `succ`/`pred` are the cover relation
/// and its transpose. With `until_stable` the loop also stops as soon as a
/// round does not increase the number of color classes.
fn refine(
    n: usize,
    succ: &[Mask],
    pred: &[Mask],
    max_rounds: usize,
    until_stable: bool,
) -> ([u64; MAX_N], usize) {
    let deg = degree_hashes(n, succ, pred);
    let mut hash = deg;
    let rounds = refine_from(n, succ, pred, &deg, &mut hash, max_rounds, until_stable);
    (hash, rounds)
}

fn refine_from(
    n: usize,
    succ: &[Mask],
    pred: &[Mask],
    deg: &[u64; MAX_N],
    hash: &mut [u64; MAX_N],
    max_rounds: usize,
    until_stable: bool,
) -> usize {
    let mut classes = if until_stable { distinct_colors(&hash[..n]) } else { 0 };
    let mut rounds = 0;
    while rounds < max_rounds {
        if until_stable && classes == n {
            break;
        }
        let mut sum = [0u64; MAX_N];
        for v in 0..n {
            let mut s = hash[v];
            for u in Bits(pred[v]) {
                s = s.wrapping_add(hash[u]);
            }
            for u in Bits(succ[v]) {
                s = s.wrapping_add(hash[u]);
            }
            sum[v] = s;
        }
        for v in 0..n {
            hash[v] = hash_fn(sum[v], deg[v]);
        }
        rounds += 1;
        if until_stable {
            let now = distinct_colors(&hash[..n]);
            if now <= classes {
                break;
            }
            classes = now;
        }
    }
    rounds
}

fn fold(colors: &[u64]) -> u64 {
    colors
        .iter()
        .fold(0u64, |acc, &c| acc.wrapping_add(hash_fn(c, FOLD_SALT)))
}

fn hash_covers(n: usize, covers: &[Mask]) -> u64 {
    let mut h = hash_fn(n as u64, 0x0c0f_fee0);
    for (i, &row) in covers[..n].iter().enumerate() {
        h = hash_fn(h ^ i as u64, row as u64);
    }
    h
}

fn hash_folds(n: usize, a: u64, b: u64) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hash_fn(hash_fn(lo, hi), n as u64 | 0x1_0000)
}

fn transpose(n: usize, succ: &[Mask]) -> [Mask; MAX_N] {
    let mut pred = [0; MAX_N];
    for i in 0..n {
        for j in Bits(succ[i]) {
            pred[j] |= bit(i);
        }
    }
    pred
}

#[inline]
fn map_mask(mask: Mask, perm: &[u8]) -> Mask {
    let mut out = 0;
    for j in Bits(mask) {
        out |= bit(perm[j] as usize);
    }
    out
}

/// `perm` is an automorphism of the cover relation.
fn is_automorphism(n: usize, succ: &[Mask], perm: &[u8]) -> bool {
    (0..n).all(|i| map_mask(succ[i], perm) == succ[perm[i] as usize])
}

/// Groups vertices by color; returns the members of every class of size
/// at least two.
fn tied_classes(n: usize, colors: &[u64]) -> Vec<Vec<u8>> {
    let mut idx: [u8; MAX_N] = [0; MAX_N];
    for (i, slot) in idx.iter_mut().enumerate().take(n) {
        *slot = i as u8;
    }
    idx[..n].sort_unstable_by_key(|&i| (colors[i as usize], i));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || colors[idx[i] as usize] != colors[idx[start] as usize] {
            if i - start >= 2 {
                out.push(idx[start..i].to_vec());
            }
            start = i;
        }
    }
    out
}

/// Vertices in tied classes that the full symmetric group of the class acts
/// on by automorphisms fixing everything else (checked through one
/// transposition and one cycle per class).
fn symmetric_ties(n: usize, succ: &[Mask], colors: &[u64]) -> Mask {
    let mut ident = [0u8; MAX_N];
    for (i, slot) in ident.iter_mut().enumerate().take(n) {
        *slot = i as u8;
    }
    let mut sym = 0;
    for class in tied_classes(n, colors) {
        let mut swap = ident;
        swap[class[0] as usize] = class[1];
        swap[class[1] as usize] = class[0];
        if !is_automorphism(n, succ, &swap[..n]) {
            continue;
        }
        if class.len() > 2 {
            let mut cycle = ident;
            for k in 0..class.len() {
                cycle[class[k] as usize] = class[(k + 1) % class.len()];
            }
            if !is_automorphism(n, succ, &cycle[..n]) {
                continue;
            }
        }
        for &v in &class {
            sym |= bit(v as usize);
        }
    }
    sym
}

/// Topological order that always takes the smallest-colored available
/// vertex. On a tie the smallest original index is taken, given a unique
/// color, and the colors are refined again.
///
/// The order is certified when every tie is harmless: the chosen vertex can
/// be mapped to each tied alternative by an automorphism fixing all
/// vertices placed so far. Then every tie resolution yields the same
/// matrix. Ties inside symmetric classes pass immediately; others are
/// settled by an exact search.
fn color_order(n: usize, succ: &[Mask], pred: &[Mask], start: &[u64]) -> ([u8; MAX_N], bool) {
    let mut colors = [0u64; MAX_N];
    colors[..n].copy_from_slice(&start[..n]);
    let deg = degree_hashes(n, succ, pred);
    let mut order = [0u8; MAX_N];
    let mut placed: Mask = 0;
    let mut certified = true;
    let mut sym: Option<Mask> = None;
    for (step, slot) in order.iter_mut().enumerate().take(n) {
        let mut best = usize::MAX;
        let mut tied: Mask = 0;
        for v in 0..n {
            if placed & bit(v) == 0 && pred[v] & !placed == 0 {
                if best == usize::MAX || colors[v] < colors[best] {
                    best = v;
                    tied = bit(v);
                } else if colors[v] == colors[best] {
                    tied |= bit(v);
                }
            }
        }
        if tied.count_ones() > 1 {
            if certified {
                let sym = *sym.get_or_insert_with(|| symmetric_ties(n, succ, start));
                let others = tied & !bit(best);
                certified = Bits(others).all(|w| {
                    (sym & bit(best) != 0 && sym & bit(w) != 0 && start[w] == start[best])
                        || automorphism_exists(n, succ, pred, &colors, placed, best, w)
                });
            }
            colors[best] = hash_fn(colors[best], INDIVIDUALIZE ^ step as u64);
            refine_from(n, succ, pred, &deg, &mut colors, n, true);
        }
        *slot = best as u8;
        placed |= bit(best);
    }
    (order, certified)
}

const INDIVIDUALIZE: u64 = 0x7fb5_d329_728e_a185;

struct Oriented {
    poset: Poset,
    certified: bool,
}

fn oriented_form(n: usize, succ: &[Mask], pred: &[Mask], colors: &[u64]) -> Oriented {
    let (order, certified) = color_order(n, succ, pred, colors);
    let poset = crate::poset::relabel(n, succ, &order);
    Oriented { poset, certified }
}

/// A canonicalized poset with its congruence-invariant hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canonical {
    pub poset: Poset,
    pub hash: u64,
}

/// Canonical form of the poset whose cover relation (in any labeling) is
/// `covers`.
pub fn canonicalize_covers(n: usize, covers: &[Mask]) -> Canonical {
    canonicalize_covers_with_rounds(n, covers, n)
}

pub fn canonicalize_covers_with_rounds(n: usize, covers: &[Mask], max_rounds: usize) -> Canonical {
    let pred = transpose(n, covers);
    let (cp, _) = refine(n, covers, &pred, max_rounds, true);
    let (cd, _) = refine(n, &pred, covers, max_rounds, true);
    let fp = fold(&cp[..n]);
    let fd = fold(&cd[..n]);
    let (mut poset, canonical, dual_canonical) = if fp < fd {
        let a = oriented_form(n, covers, &pred, &cp);
        (a.poset, a.certified, true)
    } else if fp > fd {
        let b = oriented_form(n, &pred, covers, &cd);
        (b.poset, b.certified, true)
    } else {
        let a = oriented_form(n, covers, &pred, &cp);
        let b = oriented_form(n, &pred, covers, &cd);
        if a.certified && b.certified {
            let pick = if b.poset.covers() < a.poset.covers() { b.poset } else { a.poset };
            (pick, true, true)
        } else {
            (a.poset, false, false)
        }
    };
    poset.set_identity_flags(canonical, dual_canonical);
    let hash = if canonical && dual_canonical {
        hash_covers(n, poset.covers())
    } else {
        hash_folds(n, fp, fd)
    };
    Canonical { poset, hash }
}

/// Congruence-canonical form of `p`; status bits are preserved.
pub fn canonicalize(p: &Poset) -> Poset {
    let status = p.status_bits();
    canonicalize_covers(p.n(), p.covers()).poset.with_status_bits(status)
}

pub fn canonical_with_hash(p: &Poset) -> Canonical {
    let status = p.status_bits();
    let mut c = canonicalize_covers(p.n(), p.covers());
    c.poset = c.poset.with_status_bits(status);
    c
}

/// Congruence-invariant 64-bit hash of a canonicalized poset.
pub fn poset_hash(p: &Poset) -> u64 {
    let n = p.n();
    if p.is_fully_canonical() {
        return hash_covers(n, p.covers());
    }
    let pred = p.lower_covers();
    let (cp, _) = refine(n, p.covers(), &pred, n, true);
    let (cd, _) = refine(n, &pred, p.covers(), n, true);
    hash_folds(n, fold(&cp[..n]), fold(&cd[..n]))
}

/// True iff `p` and `q` are isomorphic or `p` is isomorphic to the dual of
/// `q`. Both must come from [`canonicalize`].
pub fn congruent(p: &Poset, q: &Poset) -> bool {
    if p.n() != q.n() {
        return false;
    }
    if p.is_fully_canonical() != q.is_fully_canonical()
        || p.is_canonical() != q.is_canonical()
        || p.is_dual_canonical() != q.is_dual_canonical()
    {
        return false;
    }
    if p.is_fully_canonical() {
        return p.covers() == q.covers();
    }
    if p.covers() == q.covers() {
        return true;
    }
    isomorphic(p, q) || dual_isomorphic(p, q)
}

/// Exact isomorphism test between two Hasse diagrams.
pub fn isomorphic(p: &Poset, q: &Poset) -> bool {
    if p.n() != q.n() || p.edge_count() != q.edge_count() {
        return false;
    }
    let n = p.n();
    let pp = p.lower_covers();
    let qp = q.lower_covers();
    iso_search(n, p.covers(), &pp, q.covers(), &qp)
}

/// Exact test whether `p` is isomorphic to the dual of `q`.
pub fn dual_isomorphic(p: &Poset, q: &Poset) -> bool {
    if p.n() != q.n() || p.edge_count() != q.edge_count() {
        return false;
    }
    let n = p.n();
    let pp = p.lower_covers();
    let qp = q.lower_covers();
    iso_search(n, p.covers(), &pp, &qp, q.covers())
}

/// Backtracking over color-compatible assignments.
fn iso_search(n: usize, ps: &[Mask], pp: &[Mask], qs: &[Mask], qp: &[Mask]) -> bool {
    let (pc, _) = refine(n, ps, pp, n, true);
    let (qc, _) = refine(n, qs, qp, n, true);
    let mut a: Vec<u64> = pc[..n].to_vec();
    let mut b: Vec<u64> = qc[..n].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return false;
    }
    let forced = [u8::MAX; MAX_N];
    IsoCtx::new(n, ps, pp, qs, qp, &pc, &qc, forced).run()
}

/// An automorphism that fixes `fixed` pointwise and sends `from` to `to`.
fn automorphism_exists(
    n: usize,
    succ: &[Mask],
    pred: &[Mask],
    colors: &[u64],
    fixed: Mask,
    from: usize,
    to: usize,
) -> bool {
    let mut forced = [u8::MAX; MAX_N];
    for v in Bits(fixed) {
        forced[v] = v as u8;
    }
    forced[from] = to as u8;
    IsoCtx::new(n, succ, pred, succ, pred, colors, colors, forced).run()
}

struct IsoCtx<'a> {
    n: usize,
    ps: &'a [Mask],
    pp: &'a [Mask],
    qs: &'a [Mask],
    qp: &'a [Mask],
    pc: &'a [u64],
    qc: &'a [u64],
    forced: [u8; MAX_N],
    order: [u8; MAX_N],
}

impl<'a> IsoCtx<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        ps: &'a [Mask],
        pp: &'a [Mask],
        qs: &'a [Mask],
        qp: &'a [Mask],
        pc: &'a [u64],
        qc: &'a [u64],
        forced: [u8; MAX_N],
    ) -> Self {
        // Forced vertices first, then smallest classes so the search
        // branches late.
        let mut order = [0u8; MAX_N];
        let mut idx: Vec<usize> = (0..n).collect();
        let class_size = |c: u64| pc[..n].iter().filter(|&&x| x == c).count();
        idx.sort_by_key(|&v| (forced[v] == u8::MAX, class_size(pc[v]), pc[v], v));
        for (k, v) in idx.into_iter().enumerate() {
            order[k] = v as u8;
        }
        IsoCtx { n, ps, pp, qs, qp, pc, qc, forced, order }
    }

    fn run(&self) -> bool {
        let mut image = [u8::MAX; MAX_N];
        let mut used: Mask = 0;
        self.extend(0, &mut image, &mut used)
    }

    fn extend(&self, depth: usize, image: &mut [u8; MAX_N], used: &mut Mask) -> bool {
        if depth == self.n {
            return true;
        }
        let x = self.order[depth] as usize;
        let candidates = if self.forced[x] != u8::MAX {
            bit(self.forced[x] as usize)
        } else {
            crate::poset::full_mask(self.n)
        };
        for w in Bits(candidates & !*used) {
            if self.qc[w] != self.pc[x]
                || self.pp[x].count_ones() != self.qp[w].count_ones()
                || self.ps[x].count_ones() != self.qs[w].count_ones()
            {
                continue;
            }
            let consistent = self.order[..depth].iter().all(|&y| {
                let y = y as usize;
                let iy = image[y] as usize;
                (self.ps[x] & bit(y) != 0) == (self.qs[w] & bit(iy) != 0)
                    && (self.pp[x] & bit(y) != 0) == (self.qp[w] & bit(iy) != 0)
            });
            if !consistent {
                continue;
            }
            image[x] = w as u8;
            *used |= bit(w);
            if self.extend(depth + 1, image, used) {
                return true;
            }
            *used &= !bit(w);
            image[x] = u8::MAX;
        }
        false
    }
}

/// True when vertices `u` and `v` can be exchanged by an automorphism that
/// fixes everything else.
pub fn swap_is_automorphism(p: &Poset, u: usize, v: usize) -> bool {
    let n = p.n();
    let mut perm = [0u8; MAX_N];
    for (i, slot) in perm.iter_mut().enumerate().take(n) {
        *slot = i as u8;
    }
    perm[u] = v as u8;
    perm[v] = u as u8;
    is_automorphism(n, p.covers(), &perm[..n])
}

/// Class label per vertex such that vertices sharing a label are permuted
/// arbitrarily by automorphisms of `p` (fixing all other vertices).
/// Vertices outside such classes get their own index as label.
///
/// Comparisons `(u, v)` and `(u', v')` whose endpoints carry the same labels
/// lead to isomorphic children.
pub fn symmetric_classes(p: &Poset) -> [u8; MAX_N] {
    let n = p.n();
    let mut label = [0u8; MAX_N];
    for (i, slot) in label.iter_mut().enumerate().take(n) {
        *slot = i as u8;
    }
    let pred = p.lower_covers();
    let (c, _) = refine(n, p.covers(), &pred, n, true);
    let sym = symmetric_ties(n, p.covers(), &c);
    for v in Bits(sym) {
        let first = (0..v).find(|&u| sym & bit(u) != 0 && c[u] == c[v]);
        if let Some(u) = first {
            label[v] = label[u];
        }
    }
    label
}
