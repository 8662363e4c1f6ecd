use std::path::PathBuf;

use sos_approx::Error as CoreError;
use thiserror::Error;

pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("not a sum of squares: {0}")]
    Infeasible(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// 2 for parse and usage errors, 3 for certified infeasibility, 4 for
    /// solver failures, 1 for I/O errors and failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => EXIT_USAGE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io { .. } | CliError::Check(_) => EXIT_CHECK,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Parse(_)
            | CoreError::FlavorMismatch { .. }
            | CoreError::VariableCountMismatch { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::NotHermitian { .. }
            | CoreError::NotHomogeneous { .. }
            | CoreError::TermOutsideSpan { .. } => CliError::Parse(msg),
            CoreError::InvalidArgument(_) | CoreError::BasisTooLarge { .. } | CoreError::NoCertifiedBound(_) => {
                CliError::Usage(msg)
            }
            CoreError::Infeasible(_) | CoreError::NotPsd { .. } => CliError::Infeasible(msg),
            CoreError::NoConvergence { .. }
            | CoreError::Singular
            | CoreError::HypothesisViolated { .. }
            | CoreError::RankReductionStalled { .. }
            | CoreError::SolverFailed(_)
            | CoreError::CertificateInvalid(_) => CliError::Solver(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
