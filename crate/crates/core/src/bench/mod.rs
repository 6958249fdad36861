//! Experiment harness: configuration files, regret curves, the confidence-set
//! coverage experiment and the suite runner behind the `ucrl-bench` CLI.

mod config;
mod coverage;
mod regret;
mod suite;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::learner::LearnerError;
use crate::mdp::MdpError;
use crate::solver::SolverError;

pub use config::{CoverageParams, ExperimentConfig, SetOverride};
pub use coverage::{coverage_experiment, CoverageReport};
pub use regret::{aggregate_regret, compute_regret, geometric_grid, AggregatePoint, AggregateSeries, RegretPoint, RegretSeries};
pub use suite::{run_suite, write_atomic, SuiteReport, AGGREGATE_HEADER, REGRET_HEADER, SCALING_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("could not parse config: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("grid point {t} exceeds run length {len}")]
    Grid { t: u64, len: usize },
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config { .. } => "config",
            HarnessError::Parse(_) => "parse",
            HarnessError::Io { .. } => "io",
            HarnessError::Grid { .. } => "grid",
            HarnessError::Mdp(_) => "environment",
            HarnessError::Learner(_) => "learner",
            HarnessError::Solver(_) => "solver",
        }
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
