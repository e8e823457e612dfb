//! Ground-truth instances, seeded Monte Carlo trials and cross-trial metrics.

mod instance;
mod metrics;
mod suite;
mod trial;

pub use instance::{GapPattern, InstanceSpec, Noise, SimEnvironment};
pub use metrics::{
    aggregate, samples_to_tpr, samples_to_tpr_spread, AggregateMetrics, CheckpointStats, MeanSe,
};
pub use suite::{
    desk_panels, experiment_suite, run_panel, AlgorithmResult, Panel, PanelResult, PanelRun,
};
pub use trial::{
    checkpoint_grid, run_trial, run_trials, Algorithm, Checkpoint, TrialRecord, CHECKPOINT_RATIO,
};
