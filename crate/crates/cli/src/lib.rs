//! Experiment driver: dataset and mask management, repeated solver runs and
//! metric reporting.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod output;

pub use error::{CliError, Result};
pub use experiment::{run_experiment, AnchorCount, ExperimentArgs, ExperimentResult, MaskSource};
