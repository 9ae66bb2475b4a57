//! Level-by-level backward search from the total order.
//!
//! Level `c - 1` is built from level `c`: every predecessor `Q` of a level-`c`
//! poset via a Hasse edge `(u, v)` is sortable in one more comparison iff
//! `Q[v<u]` is sortable at level `c`, which is looked up in the finished
//! levels `c..=budget`. Below the first full level only posets within the
//! efficiency threshold are kept. `Q` is flagged unknown when its reverse
//! child lies above the threshold and is not stored, or when the level-`c`
//! poset it leads to is itself unknown.

use std::path::PathBuf;

use rayon::prelude::*;
use sortbound_core::canonical::{canonical_with_hash, Canonical};
use sortbound_core::predecessors::predecessors_via_bounded;
use sortbound_core::{LinExtWorkspace, Poset, Thresholds};

use crate::advice::{find_in, level_file_name, Advice, LevelHeader};
use crate::config::SearchConfig;
use crate::error::SearchError;
use crate::store::{LayerStore, Level, SpilledLevel, Status};

/// Hasse edges whose removal can lead to a predecessor that the forward
/// search reaches. A pair only appears right after the comparison that
/// created it, so a poset with pairs was reached through one of its pair
/// edges.
fn candidate_edges(p: &Poset, pair_heuristic: bool) -> Vec<(usize, usize)> {
    if pair_heuristic {
        let pairs = p.pairs();
        if !pairs.is_empty() {
            return pairs;
        }
    }
    p.edges().collect()
}

pub struct BackwardSearch<'a> {
    cfg: &'a SearchConfig,
    t: Thresholds,
    first_full: usize,
    levels: Vec<Level>,
    spill_dir: Option<PathBuf>,
}

impl<'a> BackwardSearch<'a> {
    pub fn new(cfg: &'a SearchConfig) -> Result<Self, SearchError> {
        cfg.validate()?;
        let t = cfg.thresholds()?;
        let levels = (0..=cfg.budget)
            .map(|_| Level::Resident(LayerStore::new(cfg.n, cfg.threads)))
            .collect();
        Ok(BackwardSearch {
            cfg,
            t,
            first_full: cfg.first_full(),
            levels,
            spill_dir: cfg.spill_dir.clone(),
        })
    }

    /// Runs all levels and returns them as advice.
    pub fn run(mut self, mut progress: impl FnMut(usize, usize)) -> Result<Advice, SearchError> {
        let n = self.cfg.n;
        let budget = self.cfg.budget;
        let top = LayerStore::new(n, self.cfg.threads);
        top.insert_or_get(&canonical_with_hash(&Poset::chain(n)), Status::Sortable);
        self.levels[budget] = Level::Resident(top);
        progress(budget, 1);
        for c in (1..=budget).rev() {
            let next = self.step(c)?;
            progress(c - 1, next.len());
            self.levels[c - 1] = Level::Resident(next);
            self.enforce_memory(c - 1)?;
        }
        Ok(Advice::new(self.t, self.first_full, self.levels))
    }

    fn records_of(&self, c: usize) -> Result<Vec<Box<[u8]>>, SearchError> {
        Ok(match &self.levels[c] {
            Level::Resident(s) => s.records().into_iter().map(|(_, r)| r).collect(),
            Level::Spilled(s) => crate::advice::read_level_file(s.path())?.1,
        })
    }

    /// Builds level `c - 1` from level `c`.
    fn step(&self, c: usize) -> Result<LayerStore, SearchError> {
        let n = self.cfg.n;
        let target = LayerStore::new(n, self.cfg.threads);
        let records = self.records_of(c)?;
        let lower = c - 1;
        let partial = lower < self.first_full;
        let max_e = self.t.max_extensions(lower);
        records.par_iter().try_for_each_init(LinExtWorkspace::new, |ws, rec| {
            let p = Poset::from_bytes(n, rec)?;
            let known = Status::from_bits(rec[0]);
            let ep = ws.count(&p);
            for (u, v) in candidate_edges(&p, self.cfg.pair_heuristic) {
                for (q, eq) in predecessors_via_bounded(&p, u, v, max_e, ws) {
                    if q.edge_count() > lower {
                        continue;
                    }
                    if partial && !self.t.within_threshold(eq, lower) {
                        continue;
                    }
                    let cq = canonical_with_hash(&q);
                    if self.find(&cq, eq, c)?.is_some() {
                        continue;
                    }
                    let reverse = q.add_comparison(v, u)?;
                    let er = eq - ep;
                    let status = match self.reverse_status(&canonical_with_hash(&reverse), er, c)? {
                        Some(Status::Sortable) => known,
                        Some(_) => Status::Unknown,
                        None => continue,
                    };
                    target.merge(&cq, status)?;
                }
            }
            Ok::<(), SearchError>(())
        })?;
        Ok(target)
    }

    fn find(&self, c: &Canonical, e: u128, from: usize) -> Result<Option<(usize, Status)>, SearchError> {
        find_in(&self.levels, &self.t, self.first_full, c, e, from)
    }

    /// Sortability of the reverse child at `level`; `None` if it is known
    /// not sortable.
    fn reverse_status(&self, r: &Canonical, e: u128, level: usize) -> Result<Option<Status>, SearchError> {
        if r.poset.is_total_order() {
            return Ok(Some(Status::Sortable));
        }
        if self.t.prunable(e, level) {
            return Ok(None);
        }
        if let Some((_, s)) = self.find(r, e, level)? {
            return Ok(Some(s));
        }
        if level >= self.first_full || self.t.within_threshold(e, level) {
            Ok(None)
        } else {
            Ok(Some(Status::Unknown))
        }
    }

    /// Keeps at most the two newest levels resident when a spill
    /// directory is configured; otherwise fails if the cap is exceeded.
    fn enforce_memory(&mut self, newest: usize) -> Result<(), SearchError> {
        let resident: usize = self.levels.iter().filter(|l| l.is_resident()).map(Level::len).sum();
        let over = self.cfg.store_cap.is_some_and(|cap| resident > cap);
        match &self.spill_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| SearchError::io(dir, e))?;
                for d in (newest + 2)..self.levels.len() {
                    if let Level::Resident(store) = &self.levels[d] {
                        let path = dir.join(level_file_name(d));
                        let header = LevelHeader::for_level(&self.t, self.first_full, d);
                        let spilled = SpilledLevel::write(store, &path, &header)?;
                        self.levels[d] = Level::Spilled(spilled);
                    }
                }
                Ok(())
            }
            None if over => Err(SearchError::Resource(format!(
                "backward search holds {resident} posets, above the store cap; set a spill directory"
            ))),
            None => Ok(()),
        }
    }
}

/// Runs the backward search described by `cfg`.
pub fn backward_search(cfg: &SearchConfig) -> Result<Advice, SearchError> {
    BackwardSearch::new(cfg)?.run(|_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0_sortable(n: usize, budget: usize) -> bool {
        let cfg = SearchConfig::backward(n, budget);
        let adv = backward_search(&cfg).unwrap();
        let p0 = canonical_with_hash(&Poset::antichain(n));
        let f: u128 = (1..=n as u128).product();
        matches!(adv.find(&p0, f, 0).unwrap(), Some((_, Status::Sortable)))
    }

    #[test]
    fn five_elements() {
        assert!(!p0_sortable(5, 6));
        assert!(p0_sortable(5, 7));
    }

    #[test]
    fn tiny() {
        assert!(p0_sortable(2, 1));
        assert!(!p0_sortable(3, 2));
        assert!(p0_sortable(3, 3));
    }

    #[test]
    fn full_levels_respect_edge_bound() {
        let cfg = SearchConfig::backward(5, 7);
        let adv = backward_search(&cfg).unwrap();
        for c in 0..=7 {
            if let Level::Resident(s) = adv.level(c) {
                for (_, r) in s.records() {
                    let p = Poset::from_bytes(5, &r).unwrap();
                    assert!(p.edge_count() <= c);
                }
            }
        }
    }
}
