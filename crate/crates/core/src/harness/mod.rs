//! Pruning-ratio sweeps and their aggregate statistics.

mod config;
mod report;
mod stats;
mod sweep;

pub use config::{DatasetSpec, ExperimentConfig, TicketRule};
pub use report::{emit_reports, read_runs, write_runs, write_timings, PLOT_SCRIPT};
pub use stats::{
    correlation_table, degradation_fraction, directional_check, ln_gamma, mean_relative_accuracy,
    pearson, regularized_beta, student_t_cdf, tau_scatter, transition_probability,
    winning_probability, Correlation, CorrelationRow, DirectionalRow, ScatterRow, TransitionRow,
    WinningCell, ALL,
};
pub use sweep::{
    resume_sweep, run_cell, run_sweep, CellFailure, DenseTwin, PreparedDataset, RunRecord,
    SweepOutcome,
};
