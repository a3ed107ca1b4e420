//! Expressivity-aware analysis of pruned message-passing graph neural
//! networks: 1-WL refinement, masked GIN/GCN training, pruning-mask
//! diagnostics, injectivity and gradient-diversity bounds, and a sweep
//! harness.

pub mod error;
pub mod expressivity;
pub mod gnn;
pub mod graph;
pub mod harness;
pub mod iso;
pub mod par;
pub mod pruning;
pub mod tensor;
pub mod wl;

pub use error::{Error, Result};
pub use par::Parallelism;
