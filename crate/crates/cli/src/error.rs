use std::path::PathBuf;

use valforme_core::model::ModelError;
use valforme_core::solver::SolveError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const NO_ROOT: i32 = 3;
    pub const INVALID_REPORT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Output(#[from] std::io::Error),
    #[error("invalid table: {0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("no feasible point in the swept window")]
    EmptySweep,
    #[error("{0}")]
    Infeasible(String),
    #[error("report fails {} check(s): {}", .0.len(), .0.join("; "))]
    InvalidReport(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Json { .. } | CliError::Input(_) | CliError::Io { .. } | CliError::Output(_) | CliError::Model(_) => {
                exit::INPUT
            }
            CliError::EmptySweep | CliError::Infeasible(_) => exit::INFEASIBLE,
            CliError::InvalidReport(_) => exit::INVALID_REPORT,
            CliError::Solve(e) => match e {
                SolveError::Infeasible { .. }
                | SolveError::FixedCapitalChoice
                | SolveError::NoUniqueAllocation
                | SolveError::EigenDomain(_) => exit::INFEASIBLE,
                SolveError::NoRoot { .. } | SolveError::NotConverged { .. } => exit::NO_ROOT,
                _ => exit::INPUT,
            },
        }
    }
}
