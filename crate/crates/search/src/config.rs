use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sortbound_core::efficiency::Bandwidth;
use sortbound_core::oracle::info_lower_bound;
use sortbound_core::{Thresholds, MAX_N};

use crate::error::SearchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Backward,
    Bidirectional,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Mode::Forward),
            "backward" => Ok(Mode::Backward),
            "bidirectional" => Ok(Mode::Bidirectional),
            _ => Err(format!("unknown mode {s:?} (forward, backward, bidirectional)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Forward => "forward",
            Mode::Backward => "backward",
            Mode::Bidirectional => "bidirectional",
        })
    }
}

/// Order in which a layer's posets are expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentOrder {
    /// Fewest linear extensions first.
    Ascending,
    Descending,
}

impl FromStr for ParentOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascending" => Ok(ParentOrder::Ascending),
            "descending" => Ok(ParentOrder::Descending),
            _ => Err(format!("unknown order {s:?} (ascending, descending)")),
        }
    }
}

impl fmt::Display for ParentOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParentOrder::Ascending => "ascending",
            ParentOrder::Descending => "descending",
        })
    }
}

/// Bandwidth override for the levels `from..=to`.
#[derive(Debug, Clone)]
pub struct LayerBandwidth {
    pub from: usize,
    pub to: usize,
    pub bandwidth: Bandwidth,
}

impl FromStr for LayerBandwidth {
    type Err = String;

    /// `FROM-TO=BW` or `LEVEL=BW`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (range, bw) = s.split_once('=').ok_or("expected LEVELS=BANDWIDTH")?;
        let (from, to) = match range.split_once('-') {
            Some((a, b)) => (a, b),
            None => (range, range),
        };
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad level {x:?}: {e}"));
        let (from, to) = (parse(from)?, parse(to)?);
        if from > to {
            return Err("empty level range".into());
        }
        let bandwidth = bw.parse().map_err(|e| format!("{e}"))?;
        Ok(LayerBandwidth { from, to, bandwidth })
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub n: usize,
    pub budget: usize,
    pub mode: Mode,
    /// Number of top levels the backward search stores completely.
    pub full_layers: usize,
    pub bandwidth: Bandwidth,
    pub layer_bandwidth: Vec<LayerBandwidth>,
    /// Largest child layer built before the parents are evaluated.
    pub chunk_limit: usize,
    pub threads: usize,
    /// Resident entries per forward level store (evicted beyond), and in
    /// total for the backward search (spilled or fatal beyond).
    pub store_cap: Option<usize>,
    pub spill_dir: Option<PathBuf>,
    pub pair_heuristic: bool,
    /// Expansion order by linear-extension count; ties go by canonical bytes.
    pub parent_order: ParentOrder,
}

/// Full layers and bandwidth that proved the corresponding bound
/// `S(n) > C(n)` in published runs.
pub fn table_defaults(n: usize) -> Option<(usize, Bandwidth)> {
    let (layers, num, den) = match n {
        11 => (4, 5, 100),
        12 => (5, 5, 100),
        13 => (6, 5, 100),
        14 => (9, 12, 100),
        15 => (10, 15, 100),
        16 => (11, 2, 10),
        17 => (14, 24, 100),
        18 => (13, 19, 100),
        19 => (8, 1, 100),
        22 | 28 => (0, 0, 1),
        _ => return None,
    };
    Some((layers, Bandwidth::new(num, den).unwrap()))
}

pub const DEFAULT_CHUNK_LIMIT: usize = 1 << 20;

impl SearchConfig {
    /// Forward search of `n` elements in `budget` comparisons.
    pub fn new(n: usize, budget: usize) -> Self {
        SearchConfig {
            n,
            budget,
            mode: Mode::Forward,
            full_layers: 0,
            bandwidth: Bandwidth::zero(),
            layer_bandwidth: Vec::new(),
            chunk_limit: DEFAULT_CHUNK_LIMIT,
            threads: 1,
            store_cap: None,
            spill_dir: None,
            pair_heuristic: true,
            parent_order: ParentOrder::Ascending,
        }
    }

    /// Bidirectional search with the tabulated parameters for `n`, or a
    /// quarter of the levels full and zero bandwidth otherwise.
    pub fn bidirectional(n: usize, budget: usize) -> Self {
        let (full_layers, bandwidth) = table_defaults(n).unwrap_or(((budget + 1) / 4, Bandwidth::zero()));
        SearchConfig {
            mode: Mode::Bidirectional,
            full_layers: full_layers.min(budget + 1),
            bandwidth,
            ..Self::new(n, budget)
        }
    }

    /// Backward search with every level full.
    pub fn backward(n: usize, budget: usize) -> Self {
        SearchConfig {
            mode: Mode::Backward,
            full_layers: budget + 1,
            ..Self::new(n, budget)
        }
    }

    pub fn default_budget(n: usize) -> usize {
        info_lower_bound(n)
    }

    /// Lowest level the backward search stores completely.
    pub fn first_full(&self) -> usize {
        self.budget + 1 - self.full_layers.min(self.budget + 1)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.n == 0 || self.n > MAX_N {
            return Err(SearchError::Config(format!("n must be in 1..={MAX_N}")));
        }
        if self.full_layers > self.budget + 1 {
            return Err(SearchError::Config(format!(
                "full layers {} exceed the {} levels",
                self.full_layers,
                self.budget + 1
            )));
        }
        if self.chunk_limit == 0 {
            return Err(SearchError::Config("chunk limit must be at least 1".into()));
        }
        for lb in &self.layer_bandwidth {
            if lb.to > self.budget {
                return Err(SearchError::Config(format!("level {} beyond the budget", lb.to)));
            }
        }
        self.thresholds().map(|_| ())
    }

    /// Per-level thresholds. The forward search alone uses only the
    /// pruning bound, which does not depend on the bandwidth.
    pub fn thresholds(&self) -> Result<Thresholds, SearchError> {
        let mut schedule: Vec<Bandwidth> = (0..=self.budget).map(|_| self.bandwidth.clone()).collect();
        for lb in &self.layer_bandwidth {
            for s in schedule.iter_mut().take(lb.to.min(self.budget) + 1).skip(lb.from) {
                *s = lb.bandwidth.clone();
            }
        }
        // full levels ignore the threshold; keep the schedule monotone
        let ff = self.first_full();
        if ff > 0 && ff <= self.budget {
            let last = schedule[ff - 1].clone();
            for s in schedule.iter_mut().skip(ff) {
                *s = last.clone();
            }
        }
        Ok(Thresholds::scheduled(self.n, self.budget, schedule)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_full_counts_from_the_top() {
        let c = SearchConfig::bidirectional(13, 33);
        assert_eq!(c.full_layers, 6);
        assert_eq!(c.first_full(), 28);
        assert_eq!(SearchConfig::backward(5, 7).first_full(), 0);
        assert_eq!(SearchConfig::new(5, 7).first_full(), 8);
    }

    #[test]
    fn defaults_are_valid_at_the_information_bound() {
        for n in 11..=19 {
            let c = SearchConfig::bidirectional(n, SearchConfig::default_budget(n));
            c.validate().unwrap();
        }
    }

    #[test]
    fn rejects_wide_bandwidth() {
        let mut c = SearchConfig::bidirectional(12, 29);
        c.bandwidth = "0.9".parse().unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("E_tot <= E_thr < 2 * E_tot"), "{err}");
    }

    #[test]
    fn layer_bandwidth_parse() {
        let lb: LayerBandwidth = "36-40=23/100".parse().unwrap();
        assert_eq!((lb.from, lb.to), (36, 40));
        let lb: LayerBandwidth = "7=0.1".parse().unwrap();
        assert_eq!((lb.from, lb.to), (7, 7));
        assert!("5-3=0.1".parse::<LayerBandwidth>().is_err());
        assert!("x".parse::<LayerBandwidth>().is_err());
    }

    #[test]
    fn schedule_applies_overrides() {
        let mut c = SearchConfig::bidirectional(18, 53);
        c.layer_bandwidth.push("36-40=23/100".parse().unwrap());
        let t = c.thresholds().unwrap();
        assert!(t.bandwidth_at(36).same_value(&"0.23".parse().unwrap()));
        assert!(t.bandwidth_at(35).same_value(&"0.19".parse().unwrap()));
    }
}
