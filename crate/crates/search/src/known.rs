//! Small known values of `S(n)` recomputed two independent ways.

use sortbound_core::oracle::{info_lower_bound, minimax_s, KNOWN_S};

use crate::config::SearchConfig;
use crate::error::SearchError;
use crate::forward::forward_search;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownRow {
    pub n: usize,
    pub expected: usize,
    pub forward: usize,
    pub oracle: usize,
}

impl KnownRow {
    pub fn ok(&self) -> bool {
        self.forward == self.expected && self.oracle == self.expected
    }
}

/// Smallest budget for which the forward search sorts `n` elements.
pub fn forward_s(n: usize, threads: usize) -> Result<usize, SearchError> {
    let mut c = info_lower_bound(n);
    loop {
        let mut cfg = SearchConfig::new(n, c);
        cfg.threads = threads;
        if forward_search(&cfg, None)?.0 {
            return Ok(c);
        }
        c += 1;
    }
}

/// `S(n)` for `n = 1..=max_n` by forward search and by the game-tree
/// oracle, next to the tabulated values.
pub fn verify_known(max_n: usize, threads: usize) -> Result<Vec<KnownRow>, SearchError> {
    assert!(max_n <= 8, "the oracle handles at most 8 elements");
    (1..=max_n)
        .map(|n| {
            Ok(KnownRow {
                n,
                expected: KNOWN_S[n - 1],
                forward: forward_s(n, threads)?,
                oracle: minimax_s(n),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn up_to_five() {
        for row in verify_known(5, 1).unwrap() {
            assert!(row.ok(), "{row:?}");
        }
    }
}
