mod common;

use common::*;
use sortbound_core::canonical::{canonicalize_covers, congruent, isomorphic, poset_hash};
use sortbound_core::{canonicalize, count_linear_extensions, Poset};

fn canon_of(n: usize, covers: &[u32]) -> Poset {
    canonicalize_covers(n, covers).poset
}

#[test]
fn relabelings_and_duals_are_congruent_at_ten() {
    let mut r = rng(10);
    let mut fully = 0;
    for k in 0..10_000 {
        let p = random_poset(&mut r, 10);
        let perm = random_perm(&mut r, 10);
        let mut covers = permuted_covers(&p, &perm);
        if k % 2 == 1 {
            covers = dual_covers(10, &covers);
        }
        let a = canonicalize(&p);
        let b = canon_of(10, &covers);
        assert!(congruent(&a, &b), "{p:?}");
        assert!(congruent(&b, &a));
        assert_eq!(poset_hash(&a), poset_hash(&b));
        assert_eq!(canonicalize_covers(10, &covers).hash, poset_hash(&b));
        if a.is_fully_canonical() {
            fully += 1;
            assert_eq!(a.covers(), b.covers());
        }
    }
    assert!(fully > 9_000, "only {fully} forms certified");
}

#[test]
fn non_congruent_pairs_at_ten() {
    let mut r = rng(20);
    let mut collisions = 0;
    let mut tested = 0;
    while tested < 10_000 {
        let p = canonicalize(&random_poset(&mut r, 10));
        let q = canonicalize(&random_poset(&mut r, 10));
        // Different counts or edge totals rule out congruence.
        if count_linear_extensions(&p) == count_linear_extensions(&q) && p.edge_count() == q.edge_count() {
            continue;
        }
        tested += 1;
        if poset_hash(&p) == poset_hash(&q) {
            collisions += 1;
        }
        assert!(!congruent(&p, &q), "{p:?} vs {q:?}");
    }
    assert!(collisions * 1000 < tested, "{collisions} collisions");
}

#[test]
fn agrees_with_brute_force_up_to_seven() {
    let mut r = rng(30);
    for k in 0..3000 {
        let n = 3 + k % 5;
        let p = random_poset(&mut r, n);
        let q = if k % 3 == 0 {
            let perm = random_perm(&mut r, n);
            let c = permuted_covers(&p, &perm);
            Poset::from_edges(n, &edge_list(n, &c)).unwrap()
        } else {
            random_poset(&mut r, n)
        };
        let (cp, cq) = (canonicalize(&p), canonicalize(&q));
        let expect = brute_congruent(&p, &q);
        assert_eq!(congruent(&cp, &cq), expect, "{p:?} {q:?}");
        assert_eq!(isomorphic(&p, &q), brute_isomorphic(n, p.covers(), q.covers()));
        if expect {
            assert_eq!(poset_hash(&cp), poset_hash(&cq));
        }
        assert!(brute_congruent(&p, &cp));
    }
}

fn edge_list(n: usize, covers: &[u32]) -> Vec<(usize, usize)> {
    // Relabel to a topological order first so from_edges accepts it.
    let order = topo(n, covers);
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if covers[i] & (1 << j) != 0 {
                edges.push((pos[i], pos[j]));
            }
        }
    }
    edges
}

fn topo(n: usize, covers: &[u32]) -> Vec<usize> {
    let mut indeg = vec![0; n];
    for i in 0..n {
        for j in 0..n {
            if covers[i] & (1 << j) != 0 {
                indeg[j] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let mut done = vec![false; n];
    while out.len() < n {
        let v = (0..n).rev().find(|&v| !done[v] && indeg[v] == 0).unwrap();
        done[v] = true;
        out.push(v);
        for j in 0..n {
            if covers[v] & (1 << j) != 0 {
                indeg[j] -= 1;
            }
        }
    }
    out
}

#[test]
fn congruence_is_an_equivalence() {
    let mut r = rng(40);
    let pool: Vec<Poset> = (0..60)
        .map(|k| {
            let base = random_poset(&mut rng(k / 3), 6);
            let perm = random_perm(&mut r, 6);
            let mut c = permuted_covers(&base, &perm);
            if k % 2 == 0 {
                c = dual_covers(6, &c);
            }
            canon_of(6, &c)
        })
        .collect();
    for a in &pool {
        assert!(congruent(a, a));
        for b in &pool {
            assert_eq!(congruent(a, b), congruent(b, a));
            if !congruent(a, b) {
                continue;
            }
            for c in &pool {
                if congruent(b, c) {
                    assert!(congruent(a, c));
                }
            }
        }
    }
}

#[test]
fn every_poset_on_five_has_a_unique_form() {
    // Relabel each poset of size five all ways; the form never changes.
    for p in all_posets(5) {
        let a = canonicalize(&p);
        let mut r = rng(p.to_bytes()[0] as u64);
        for _ in 0..20 {
            let perm = random_perm(&mut r, 5);
            let b = canon_of(5, &permuted_covers(&p, &perm));
            assert_eq!(a.flags(), b.flags());
            if a.is_fully_canonical() {
                assert_eq!(a.covers(), b.covers());
            }
            assert!(congruent(&a, &b));
        }
    }
}
