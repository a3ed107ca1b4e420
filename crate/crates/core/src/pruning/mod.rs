//! Pruning masks and their analysis.

mod irrecoverable;
mod mask;
mod paths;
mod probe;
mod sparsify;

pub use irrecoverable::{first_layer_difference, is_irrecoverable_first_layer};
pub use mask::{random_mask, MaskMode, MaskSet};
pub use paths::{count_paths, enumerate_paths, Path, PathEdge, PathStats, DEFAULT_PATH_CAP};
pub use probe::{probe_critical_paths, EdgeRef, ProbeBudget, ProbeResult};
pub use sparsify::{
    injectivity_preserving_sparsify, layer_preserves_distinctions, SparsifyConfig, SparsifyResult,
};
