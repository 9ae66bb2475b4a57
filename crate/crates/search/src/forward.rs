//! Level-by-level forward search from the unordered poset.
//!
//! A layer of active posets at level `c` is evaluated in chunks. For each
//! chunk:
//!
//! 1. every useful comparison of every parent is generated and one of its
//!    children (the heavier one, unless the other is already queued) is
//!    queued in the child layer; the child layer is evaluated recursively;
//! 2. for comparisons whose first child turned out sortable the sibling is
//!    queued and evaluated;
//! 3. a parent is sortable iff both children of some comparison are.
//!
//! Children already decided by an earlier chunk, by the backward results
//! or by the extension-count bound are never queued.

use std::collections::HashMap;

use rayon::prelude::*;
use sortbound_core::canonical::{canonical_with_hash, congruent, symmetric_classes, Canonical};
use sortbound_core::linext::within_down_set_bound;
use sortbound_core::pairs::PairRule;
use sortbound_core::{LinExtWorkspace, Poset, Thresholds};

use crate::advice::{Advice, Answer};
use crate::config::{ParentOrder, SearchConfig};
use crate::error::SearchError;
use crate::stats::SearchStats;
use crate::store::{LayerStore, Status};

/// Parents generated in one parallel batch. Fixed so that admission order,
/// and with it every count, is independent of the thread count.
const BATCH: usize = 256;

#[derive(Clone)]
struct Node {
    c: Canonical,
    e: u128,
}

struct Cand {
    first: Node,
    second: Node,
}

struct Parent {
    cands: Vec<Cand>,
    verdict: Option<bool>,
}

struct Generated {
    cands: Vec<Cand>,
    down_sets: usize,
    singletons: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Res {
    Sortable,
    NotSortable,
    Queued,
    Absent,
}

fn same_poset(a: &Poset, b: &Poset) -> bool {
    a == b || (!a.is_fully_canonical() && congruent(a, b))
}

/// Children queued for one evaluation of the child layer, with their
/// results once known.
#[derive(Default)]
struct Queue {
    nodes: Vec<Node>,
    results: Vec<Option<bool>>,
    index: HashMap<u64, Vec<u32>>,
}

impl Queue {
    fn find(&self, c: &Canonical) -> Option<usize> {
        self.index
            .get(&c.hash)?
            .iter()
            .map(|&i| i as usize)
            .find(|&i| same_poset(&self.nodes[i].c.poset, &c.poset))
    }

    fn push(&mut self, node: Node) {
        let i = self.nodes.len() as u32;
        self.index.entry(node.c.hash).or_default().push(i);
        self.nodes.push(node);
        self.results.push(None);
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }
}

pub struct ForwardSearch<'a> {
    cfg: &'a SearchConfig,
    t: Thresholds,
    advice: Option<&'a Advice>,
    stores: Vec<LayerStore>,
    stats: SearchStats,
}

impl<'a> ForwardSearch<'a> {
    pub fn new(cfg: &'a SearchConfig, advice: Option<&'a Advice>) -> Result<Self, SearchError> {
        cfg.validate()?;
        let t = match advice {
            Some(a) => {
                if a.n() != cfg.n || a.budget() != cfg.budget {
                    return Err(SearchError::Config(format!(
                        "advice is for n={} C={}, search is n={} C={}",
                        a.n(),
                        a.budget(),
                        cfg.n,
                        cfg.budget
                    )));
                }
                a.thresholds().clone()
            }
            None => Thresholds::new(cfg.n, cfg.budget, sortbound_core::Bandwidth::zero())?,
        };
        let mut stats = SearchStats::new(cfg.budget);
        if let Some(a) = advice {
            for (c, l) in stats.levels.iter_mut().enumerate() {
                l.backward = a.level_len(c) as u64;
            }
        }
        Ok(ForwardSearch {
            cfg,
            t,
            advice,
            stores: (0..=cfg.budget).map(|_| LayerStore::new(cfg.n, cfg.threads)).collect(),
            stats,
        })
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn into_stats(mut self) -> SearchStats {
        self.stats.evicted = self.stores.iter().map(LayerStore::evicted).sum();
        self.stats
    }

    /// Whether the unordered poset can be sorted within the budget.
    pub fn run(&mut self) -> Result<bool, SearchError> {
        let n = self.cfg.n;
        let p0 = Node {
            c: canonical_with_hash(&Poset::antichain(n)),
            e: (1..=n as u128).product(),
        };
        match self.resolve(&p0, 0, None)? {
            Res::Sortable => return Ok(true),
            Res::NotSortable => return Ok(false),
            _ => {}
        }
        self.stats.levels[0].forward_total += 1;
        let r = self.explore(0, vec![p0])?[0];
        if r {
            self.stats.levels[0].forward_sortable += 1;
        }
        Ok(r)
    }

    /// Whether `p`, reached after `level` comparisons, can be sorted in the
    /// remaining `budget - level`. The pair rule assumes `p` was reached by
    /// this search; disable it for arbitrary posets.
    pub fn sortable_at(&mut self, p: &Poset, level: usize) -> Result<bool, SearchError> {
        if level > self.cfg.budget || p.n() != self.cfg.n {
            return Err(SearchError::Config(format!(
                "poset on {} elements at level {level} does not fit n={} C={}",
                p.n(),
                self.cfg.n,
                self.cfg.budget
            )));
        }
        let node = Node {
            c: canonical_with_hash(p),
            e: LinExtWorkspace::new().count(p),
        };
        match self.resolve(&node, level, None)? {
            Res::Sortable => return Ok(true),
            Res::NotSortable => return Ok(false),
            _ => {}
        }
        let r = self.explore(level, vec![node.clone()])?[0];
        let status = if r { Status::Sortable } else { Status::NotSortable };
        self.stores[level].merge(&node.c, status)?;
        Ok(r)
    }

    fn resolve(&mut self, node: &Node, level: usize, queue: Option<&Queue>) -> Result<Res, SearchError> {
        if node.c.poset.is_total_order() {
            return Ok(Res::Sortable);
        }
        if self.t.prunable(node.e, level) {
            return Ok(Res::NotSortable);
        }
        if let Some(a) = self.advice {
            match a.query(&node.c, node.e, level)? {
                Answer::Sortable => {
                    self.stats.advice_hits += 1;
                    return Ok(Res::Sortable);
                }
                Answer::NotSortable => {
                    self.stats.advice_hits += 1;
                    return Ok(Res::NotSortable);
                }
                Answer::Unknown | Answer::NotCovered => {}
            }
        }
        if let Some(q) = queue {
            if let Some(i) = q.find(&node.c) {
                return Ok(match q.results[i] {
                    Some(true) => Res::Sortable,
                    Some(false) => Res::NotSortable,
                    None => Res::Queued,
                });
            }
        }
        Ok(match self.stores[level].get(&node.c) {
            Some(Status::Sortable) => Res::Sortable,
            Some(Status::NotSortable) => Res::NotSortable,
            _ => Res::Absent,
        })
    }

    fn generate(&self, level: usize, node: &Node, ws: &mut LinExtWorkspace) -> Generated {
        let p = &node.c.poset;
        let n = p.n();
        let counts = ws.children(p);
        let rule = if self.cfg.pair_heuristic {
            PairRule::for_poset(p)
        } else {
            PairRule::Unrestricted
        };
        let labels = symmetric_classes(p);
        let mut seen = [0u32; 32];
        let mut raw = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                let (eu, ev) = (counts.with(u, v), counts.with(v, u));
                if eu == 0 || ev == 0 || !rule.admits(u, v) {
                    continue;
                }
                let (a, b) = (labels[u].min(labels[v]) as usize, labels[u].max(labels[v]) as usize);
                if seen[a] & (1 << b) != 0 {
                    continue;
                }
                seen[a] |= 1 << b;
                let (hu, hv, eh, el) = if eu >= ev { (u, v, eu, ev) } else { (v, u, ev, eu) };
                if self.t.prunable(eh, level + 1) {
                    continue;
                }
                raw.push((eh, hu, hv, el));
            }
        }
        // most balanced comparisons first
        raw.sort_by_key(|&(eh, hu, hv, _)| (eh, hu, hv));
        let mut cands: Vec<Cand> = Vec::with_capacity(raw.len());
        for (eh, hu, hv, el) in raw {
            let first = Node {
                c: canonical_with_hash(&p.add_comparison(hu, hv).expect("incomparable")),
                e: eh,
            };
            let second = Node {
                c: canonical_with_hash(&p.add_comparison(hv, hu).expect("incomparable")),
                e: el,
            };
            let dup = cands.iter().any(|k| {
                k.first.c.hash == first.c.hash
                    && k.second.c.hash == second.c.hash
                    && k.first.c.poset == first.c.poset
                    && k.second.c.poset == second.c.poset
            });
            if !dup {
                cands.push(Cand { first, second });
            }
        }
        Generated {
            cands,
            down_sets: counts.down_sets(),
            singletons: counts.singletons(),
        }
    }

    /// Evaluates posets at `level`; returns their sortability in order.
    fn explore(&mut self, level: usize, nodes: Vec<Node>) -> Result<Vec<bool>, SearchError> {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        let keys: Vec<Vec<u8>> = nodes.iter().map(|x| x.c.poset.to_bytes()).collect();
        let descending = self.cfg.parent_order == ParentOrder::Descending;
        order.sort_by(|&a, &b| {
            let by_e = nodes[a].e.cmp(&nodes[b].e);
            let by_e = if descending { by_e.reverse() } else { by_e };
            by_e.then_with(|| keys[a].cmp(&keys[b]))
        });
        drop(keys);
        let mut results = vec![false; nodes.len()];
        let mut pos = 0;
        while pos < order.len() {
            let mut queue = Queue::default();
            let mut parents: Vec<(usize, Parent)> = Vec::new();
            // Phase 1
            while pos < order.len() && queue.len() < self.cfg.chunk_limit {
                let batch = &order[pos..(pos + BATCH).min(order.len())];
                pos += batch.len();
                let gens: Vec<Generated> = {
                    let this = &*self;
                    batch
                        .par_iter()
                        .map_init(LinExtWorkspace::new, |ws, &i| this.generate(level, &nodes[i], ws))
                        .collect()
                };
                for (&i, g) in batch.iter().zip(gens) {
                    if g.singletons <= 1 {
                        let d = g.down_sets as u64;
                        self.stats.max_down_sets = self.stats.max_down_sets.max(d);
                        if !within_down_set_bound(self.cfg.n, d) {
                            self.stats.down_set_bound_violations += 1;
                        }
                    }
                    let parent = self.admit_first(level, g.cands, &mut queue)?;
                    parents.push((i, parent));
                }
            }
            self.evaluate(level + 1, &mut queue)?;
            // Phase 2
            let mut queue2 = Queue::default();
            for (_, parent) in parents.iter_mut() {
                if parent.verdict.is_none() {
                    self.admit_second(level, parent, &queue, &mut queue2)?;
                }
            }
            self.evaluate(level + 1, &mut queue2)?;
            // Phase 3
            for (i, parent) in parents.iter_mut() {
                let v = match parent.verdict {
                    Some(v) => v,
                    None => self.decide(level, parent, &queue, &queue2)?,
                };
                results[*i] = v;
            }
            if let Some(cap) = self.cfg.store_cap {
                self.stores[level + 1].evict_to(cap);
            }
        }
        Ok(results)
    }

    /// Resolution against both queues of the current chunk.
    fn resolve2(&mut self, node: &Node, level: usize, q1: &Queue, q2: &Queue) -> Result<Res, SearchError> {
        let r = self.resolve(node, level, Some(q1))?;
        if r != Res::Absent {
            return Ok(r);
        }
        self.resolve(node, level, Some(q2))
    }

    fn admit_first(&mut self, level: usize, cands: Vec<Cand>, queue: &mut Queue) -> Result<Parent, SearchError> {
        let child = level + 1;
        let mut kept = Vec::with_capacity(cands.len());
        for cand in cands {
            let ra = self.resolve(&cand.first, child, Some(queue))?;
            if ra == Res::NotSortable {
                continue;
            }
            let rb = self.resolve(&cand.second, child, Some(queue))?;
            match (ra, rb) {
                (_, Res::NotSortable) => continue,
                (Res::Sortable, Res::Sortable) => {
                    return Ok(Parent {
                        cands: Vec::new(),
                        verdict: Some(true),
                    })
                }
                (Res::Queued, _) | (_, Res::Queued) => {}
                (Res::Absent, _) => queue.push(cand.first.clone()),
                (Res::Sortable, Res::Absent) => queue.push(cand.second.clone()),
                (Res::NotSortable, _) => unreachable!(),
            }
            kept.push(cand);
        }
        let verdict = if kept.is_empty() { Some(false) } else { None };
        Ok(Parent { cands: kept, verdict })
    }

    fn admit_second(&mut self, level: usize, parent: &mut Parent, q1: &Queue, q2: &mut Queue) -> Result<(), SearchError> {
        let child = level + 1;
        let mut kept = Vec::with_capacity(parent.cands.len());
        let mut wanted = Vec::new();
        for cand in parent.cands.drain(..) {
            let ra = self.resolve2(&cand.first, child, q1, q2)?;
            let rb = self.resolve2(&cand.second, child, q1, q2)?;
            match (ra, rb) {
                (Res::NotSortable, _) | (_, Res::NotSortable) => continue,
                (Res::Sortable, Res::Sortable) => {
                    parent.verdict = Some(true);
                    return Ok(());
                }
                (Res::Sortable, Res::Absent) => wanted.push(cand.second.clone()),
                (Res::Absent, _) => wanted.push(cand.first.clone()),
                _ => {}
            }
            kept.push(cand);
        }
        if kept.is_empty() {
            parent.verdict = Some(false);
            return Ok(());
        }
        for w in wanted {
            if q2.find(&w.c).is_none() {
                q2.push(w);
            }
        }
        parent.cands = kept;
        Ok(())
    }

    fn decide(&mut self, level: usize, parent: &Parent, q1: &Queue, q2: &Queue) -> Result<bool, SearchError> {
        let child = level + 1;
        for cand in &parent.cands {
            let ra = self.resolve2(&cand.first, child, q1, q2)?;
            if ra != Res::Sortable {
                if ra == Res::NotSortable {
                    continue;
                }
                return Err(SearchError::Inconsistent {
                    what: "child left undecided after both phases",
                });
            }
            match self.resolve2(&cand.second, child, q1, q2)? {
                Res::Sortable => return Ok(true),
                Res::NotSortable => {}
                _ => {
                    return Err(SearchError::Inconsistent {
                        what: "child left undecided after both phases",
                    })
                }
            }
        }
        Ok(false)
    }

    /// Explores the queued posets at `level` and records their results.
    fn evaluate(&mut self, level: usize, queue: &mut Queue) -> Result<(), SearchError> {
        if queue.nodes.is_empty() {
            return Ok(());
        }
        let res = self.explore(level, queue.nodes.clone())?;
        let row = &mut self.stats.levels[level];
        row.forward_total += res.len() as u64;
        row.forward_sortable += res.iter().filter(|&&b| b).count() as u64;
        for (i, &r) in res.iter().enumerate() {
            queue.results[i] = Some(r);
            let status = if r { Status::Sortable } else { Status::NotSortable };
            self.stores[level].merge(&queue.nodes[i].c, status)?;
        }
        Ok(())
    }
}

/// Runs the forward search, with backward results when given.
pub fn forward_search(cfg: &SearchConfig, advice: Option<&Advice>) -> Result<(bool, SearchStats), SearchError> {
    let mut f = ForwardSearch::new(cfg, advice)?;
    let v = f.run()?;
    Ok((v, f.into_stats()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sortable(n: usize, budget: usize) -> bool {
        forward_search(&SearchConfig::new(n, budget), None).unwrap().0
    }

    #[test]
    fn tiny_cases() {
        assert!(sortable(1, 0));
        assert!(sortable(2, 1));
        assert!(!sortable(2, 0));
        assert!(!sortable(3, 2));
        assert!(sortable(3, 3));
    }

    #[test]
    fn five_elements_need_seven() {
        assert!(!sortable(5, 6));
        assert!(sortable(5, 7));
    }

    #[test]
    fn parent_order_does_not_change_verdicts() {
        for (n, c) in [(6, 10), (7, 13), (8, 16)] {
            let mut cfg = SearchConfig::new(n, c);
            let (a, _) = forward_search(&cfg, None).unwrap();
            cfg.parent_order = ParentOrder::Descending;
            let (b, _) = forward_search(&cfg, None).unwrap();
            assert!(a && b, "n={n} C={c}");
        }
    }

    #[test]
    fn first_layer_of_three_has_one_class() {
        let (_, s) = forward_search(&SearchConfig::new(3, 3), None).unwrap();
        assert_eq!(s.levels[0].forward_total, 1);
        assert_eq!(s.levels[1].forward_total, 1);
        assert_eq!(s.levels.len(), 4);
    }
}
