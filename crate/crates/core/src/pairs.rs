//! Comparison filter that keeps pair-creating comparisons as late as
//! possible.
//!
//! A pair (a component of exactly two elements) only arises by comparing
//! two singletons, and that comparison can always be postponed until right
//! before the first comparison touching the pair. In such a normalized
//! strategy a state with one pair is followed by a comparison touching the
//! pair or creating a second pair, and a state with two pairs is followed
//! by a comparison joining them.

use crate::poset::{bit, Mask, Poset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRule {
    Unrestricted,
    /// Comparisons must touch the pair or join two singletons.
    TouchPair { pair: Mask, singles: Mask },
    /// Comparisons must join the two pairs.
    JoinPairs { first: Mask, second: Mask },
}

impl PairRule {
    pub fn for_poset(p: &Poset) -> Self {
        let pairs = p.pairs();
        match pairs.as_slice() {
            [(a, b)] => PairRule::TouchPair {
                pair: bit(*a) | bit(*b),
                singles: p.singleton_mask(),
            },
            [(a, b), (c, d)] => PairRule::JoinPairs {
                first: bit(*a) | bit(*b),
                second: bit(*c) | bit(*d),
            },
            _ => PairRule::Unrestricted,
        }
    }

    #[inline]
    pub fn admits(&self, u: usize, v: usize) -> bool {
        let m = bit(u) | bit(v);
        match *self {
            PairRule::Unrestricted => true,
            PairRule::TouchPair { pair, singles } => m & pair != 0 || m & singles == m,
            PairRule::JoinPairs { first, second } => m & first != 0 && m & second != 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_pairs_no_filter() {
        let r = PairRule::for_poset(&Poset::antichain(5));
        assert_eq!(r, PairRule::Unrestricted);
        assert!(r.admits(0, 4));
    }

    #[test]
    fn one_pair() {
        // 0<1 pair, 2 3 4 singletons, 5<6<7 chain
        let p = Poset::from_edges(8, &[(0, 1), (5, 6), (6, 7)]).unwrap();
        let r = PairRule::for_poset(&p);
        assert!(r.admits(1, 2));
        assert!(r.admits(0, 7));
        assert!(r.admits(2, 3));
        assert!(!r.admits(2, 5));
        assert!(!r.admits(5, 7));
    }

    #[test]
    fn two_pairs() {
        let p = Poset::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        let r = PairRule::for_poset(&p);
        assert!(r.admits(1, 2));
        assert!(r.admits(0, 3));
        assert!(!r.admits(0, 4));
        assert!(!r.admits(2, 4));
    }
}
