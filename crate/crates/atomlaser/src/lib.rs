//! Command-line front end for the atom-laser outcoupling model.
//!
//! Reads a JSON [`config::RunConfig`], evaluates beam profiles, resolution
//! curves and noise convolutions on a worker pool, and writes CSV files whose
//! rows come out in the same order and with the same bits whatever the
//! thread count.

pub mod config;
pub mod output;
pub mod run;
pub mod selftest;

use std::path::Path;

use atomlaser_core::outcoupling::OutcouplingError;
use atomlaser_core::spectra::SpectraError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{count} grid point(s) did not reach the requested tolerance; see the status column")]
    NonConvergence { count: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{failed} self-test check(s) failed")]
    SelfTest { failed: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code.
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::NonConvergence { .. } | CliError::SelfTest { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Outcoupling(o) => o.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OutcouplingError> for CliError {
    fn from(e: OutcouplingError) -> Self {
        match e {
            OutcouplingError::Quadrature(_) | OutcouplingError::SpecFun(_) => CliError::Numerical(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}
