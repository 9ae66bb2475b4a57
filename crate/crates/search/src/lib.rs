//! Forward, backward and bidirectional searches over posets that decide
//! whether `n` elements can be sorted with `C` comparisons in the worst case.

pub mod advice;
pub mod backward;
pub mod cli;
pub mod config;
mod error;
pub mod forward;
pub mod known;
pub mod stats;
pub mod store;

pub use advice::{Advice, Answer};
pub use backward::{backward_search, BackwardSearch};
pub use config::{Mode, ParentOrder, SearchConfig};
pub use error::SearchError;
pub use forward::{forward_search, ForwardSearch};
pub use stats::{LevelStats, SearchStats};
pub use store::{LayerStore, Status};
