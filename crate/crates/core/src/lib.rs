//! Poset machinery for exhaustive searches over comparison-sorting
//! strategies: Hasse-diagram representation, canonical forms, exact
//! linear-extension counts, predecessor enumeration and brute-force
//! reference implementations.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod canonical;
pub mod efficiency;
mod error;
pub mod linext;
pub mod oracle;
pub mod pairs;
pub mod poset;
pub mod predecessors;

pub use canonical::{canonicalize, canonicalize_covers, congruent, poset_hash, Canonical};
pub use efficiency::{Bandwidth, Efficiency, Thresholds};
pub use error::CoreError;
pub use linext::{count_all_children, count_down_sets, count_linear_extensions, ChildCounts, LinExtWorkspace};
pub use poset::{hasse_reduce, packed_len, Bits, Mask, Poset, Relation, MAX_N};
pub use predecessors::{enumerate_predecessors, potential_predecessors, predecessors_via_bounded};
