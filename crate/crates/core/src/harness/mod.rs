//! Experiment configuration, orchestration, persistence and verification.

pub mod config;
pub mod plot;
pub mod run;
pub mod verify;

pub use config::{ExperimentConfig, ExperimentKind, ParsedConfig, Scaled, SEED_ENV};
pub use run::{run_experiment, FitSummary, ObservableRow, RunRecord};
pub use verify::{verify_suite, verify_suite_with, VerifyOptions, VerifyReport};
