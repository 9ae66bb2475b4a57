//! Predecessor enumeration: all Hasse diagrams `Q` with
//! `(R \ E)* ⊆ Q* ⊆ R*`.

use alloc::vec::Vec;

use crate::linext::LinExtWorkspace;
use crate::poset::{bit, Bits, Mask, Poset, MAX_N};

/// Strict reachability in a topologically labeled cover relation.
fn reach(n: usize, succ: &[Mask; MAX_N]) -> [Mask; MAX_N] {
    let mut up = [0; MAX_N];
    for i in (0..n).rev() {
        let mut s = succ[i];
        for j in Bits(succ[i]) {
            s |= up[j];
        }
        up[i] = s;
    }
    up
}

/// Removes the Hasse edge `(u, v)` from `r` and reconnects every path that
/// ran through it: `(x, v)` for lower covers `x` of `u` and `(u, y)` for
/// upper covers `y` of `v`, unless already implied. The closure of the
/// result is the closure of `r` minus `(u, v)`.
pub fn without_edge(n: usize, r: &[Mask; MAX_N], u: usize, v: usize) -> [Mask; MAX_N] {
    let mut r1 = *r;
    r1[u] &= !bit(v);
    let star = reach(n, &r1);
    let mut r2 = r1;
    for x in 0..n {
        if r[x] & bit(u) != 0 && star[x] & bit(v) == 0 {
            r2[x] |= bit(v);
        }
    }
    for y in Bits(r[v]) {
        if star[u] & bit(y) == 0 {
            r2[u] |= bit(y);
        }
    }
    r2
}

/// Every Hasse diagram `Q` with `(R \ E)* ⊆ Q* ⊆ R*`.
///
/// `r` holds upper covers in a topological labeling and `e` must be a
/// subset of its edges. Results keep the labeling of `r`.
pub fn enumerate_predecessors(n: usize, e: &[(usize, usize)], r: &[Mask]) -> Vec<[Mask; MAX_N]> {
    let mut rr = [0; MAX_N];
    rr[..n].copy_from_slice(&r[..n]);
    let mut stack: Vec<(u8, u8)> = e.iter().map(|&(u, v)| (u as u8, v as u8)).collect();
    let mut out = Vec::new();
    recurse(n, &mut stack, rr, &mut out);
    out
}

fn recurse(n: usize, e: &mut Vec<(u8, u8)>, r: [Mask; MAX_N], out: &mut Vec<[Mask; MAX_N]>) {
    let Some((u, v)) = e.pop() else {
        out.push(r);
        return;
    };
    let depth = e.len();
    recurse(n, e, r, out);
    e.truncate(depth);
    let (u, v) = (u as usize, v as usize);
    let r2 = without_edge(n, &r, u, v);
    for x in 0..n {
        for y in Bits(r2[x] & !r[x]) {
            e.push((x as u8, y as u8));
        }
    }
    recurse(n, e, r2, out);
    e.truncate(depth);
    e.push((u as u8, v as u8));
}

/// For every Hasse edge `(u, v)` of `p`, all `Q` with `u`, `v` incomparable
/// and `Q[u<v] = p`, in the labeling of `p`.
pub fn potential_predecessors(p: &Poset) -> Vec<(Poset, (usize, usize))> {
    let mut out = Vec::new();
    for (u, v) in p.edges() {
        for q in predecessors_via(p, u, v) {
            out.push((q, (u, v)));
        }
    }
    out
}

/// Predecessors of `p` via the single Hasse edge `(u, v)`. The result of
/// [`enumerate_predecessors`] also contains `p` itself, which is dropped.
pub fn predecessors_via(p: &Poset, u: usize, v: usize) -> Vec<Poset> {
    let n = p.n();
    enumerate_predecessors(n, &[(u, v)], p.covers())
        .into_iter()
        .filter(|q| q[u] & bit(v) == 0)
        .map(|q| Poset::from_covers_unchecked(n, &q[..n]))
        .collect()
}

/// [`predecessors_via`] restricted to predecessors with at most `max_e`
/// linear extensions, each returned with its count.
///
/// Every diagram produced below a recursion node has a closure contained in
/// the node's, hence at least as many extensions, so nodes above `max_e`
/// are cut off with their whole subtree.
pub fn predecessors_via_bounded(
    p: &Poset,
    u: usize,
    v: usize,
    max_e: u128,
    ws: &mut LinExtWorkspace,
) -> Vec<(Poset, u128)> {
    let n = p.n();
    let mut r = [0; MAX_N];
    r[..n].copy_from_slice(p.covers());
    let mut out = Vec::new();
    let mut stack = Vec::new();
    branch_remove(n, &mut stack, &r, u, v, max_e, ws, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn branch_remove(
    n: usize,
    e: &mut Vec<(u8, u8)>,
    r: &[Mask; MAX_N],
    u: usize,
    v: usize,
    max_e: u128,
    ws: &mut LinExtWorkspace,
    out: &mut Vec<(Poset, u128)>,
) {
    let r2 = without_edge(n, r, u, v);
    let count = ws.count(&Poset::from_covers_unchecked(n, &r2[..n]));
    if count > max_e {
        return;
    }
    let depth = e.len();
    for x in 0..n {
        for y in Bits(r2[x] & !r[x]) {
            e.push((x as u8, y as u8));
        }
    }
    recurse_bounded(n, e, r2, count, max_e, ws, out);
    e.truncate(depth);
}

fn recurse_bounded(
    n: usize,
    e: &mut Vec<(u8, u8)>,
    r: [Mask; MAX_N],
    count: u128,
    max_e: u128,
    ws: &mut LinExtWorkspace,
    out: &mut Vec<(Poset, u128)>,
) {
    let Some((u, v)) = e.pop() else {
        out.push((Poset::from_covers_unchecked(n, &r[..n]), count));
        return;
    };
    let depth = e.len();
    recurse_bounded(n, e, r, count, max_e, ws, out);
    e.truncate(depth);
    branch_remove(n, e, &r, u as usize, v as usize, max_e, ws, out);
    e.truncate(depth);
    e.push((u, v));
}
