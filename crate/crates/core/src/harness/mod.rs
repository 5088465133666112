//! Scenario construction, Monte Carlo runs and output files.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{ArrayConfig, ExperimentConfig, GroupConfig, InterferenceModel, Schedule};
pub use emit::emit;
pub use run::{
    final_epoch_summary, run_experiment, summarize, BeamformerPlan, CovarianceTrack,
    ExperimentOutput, PatternRow, ResultRow, Scenario, SelectionRow, SummaryRow, Trajectory,
};
