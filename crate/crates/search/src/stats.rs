use std::io::{self, Write};

/// Posets per level: stored by the backward search, explored by the
/// forward search, and how many of the latter were sortable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelStats {
    pub backward: u64,
    pub forward_total: u64,
    pub forward_sortable: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// One row per level `0..=budget`.
    pub levels: Vec<LevelStats>,
    /// Largest down-set count over explored posets with at most one
    /// singleton.
    pub max_down_sets: u64,
    /// Posets whose down-set count exceeded `sqrt(3)^(n + 2)`.
    pub down_set_bound_violations: u64,
    /// Children decided by the backward results without exploring them.
    pub advice_hits: u64,
    pub evicted: u64,
}

impl SearchStats {
    pub fn new(budget: usize) -> Self {
        SearchStats {
            levels: vec![LevelStats::default(); budget + 1],
            ..Default::default()
        }
    }

    pub fn backward_total(&self) -> u64 {
        self.levels.iter().map(|l| l.backward).sum()
    }

    pub fn forward_total(&self) -> u64 {
        self.levels.iter().map(|l| l.forward_total).sum()
    }

    /// Posets stored by both searches together.
    pub fn stored_total(&self) -> u64 {
        self.backward_total() + self.forward_total()
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "level,backward,forward_total,forward_sortable")?;
        for (c, l) in self.levels.iter().enumerate() {
            writeln!(w, "{c},{},{},{}", l.backward, l.forward_total, l.forward_sortable)?;
        }
        Ok(())
    }
}
