//! Batch verification of the pseudo-boson toolkit: configuration, the check
//! suite, convergence tables and report writers.

pub mod config;
pub mod output;
pub mod suite;

pub use config::{build_map, BuiltMap, MapSpec, QuadratureConfig, RunConfig, Tolerances};
pub use suite::{
    convergence_study, run_suite, CheckReport, ConvergenceRow, Params, QuadratureRow, Status, SuiteOutcome,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("construction failed: {0}")]
    Construction(#[from] bicoherent::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration and output problems, 1 for
    /// failures of the checked objects themselves.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output(_) => 2,
            Self::Construction(_) => 1,
        }
    }
}
