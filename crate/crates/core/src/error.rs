use thiserror::Error;

use crate::poly::Flavor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("flavor mismatch: expected {expected:?}, found {found:?}")]
    FlavorMismatch { expected: Flavor, found: Flavor },

    #[error("variable count mismatch: {left} vs {right}")]
    VariableCountMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polynomial is not Hermitian (max |p - p*| coefficient {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("polynomial is not homogeneous of degree {expected} (found a term of degree {found})")]
    NotHomogeneous { expected: usize, found: usize },

    #[error("term {term} lies outside the span of the basis products")]
    TermOutsideSpan { term: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis of size {size} exceeds the configured cap of {cap} entries")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("linear system is singular or not positive definite")]
    Singular,

    #[error("no certified operator-norm bound: {0}")]
    NoCertifiedBound(String),

    #[error("rank-reduction hypothesis violated: {constraints} constraints exceed r^2 + 2r for r = {target}")]
    HypothesisViolated { constraints: usize, target: usize },

    #[error("rank reduction stalled at rank {rank} (target {target})")]
    RankReductionStalled { rank: usize, target: usize },

    #[error("element is not a sum of squares over the chosen basis: {0}")]
    Infeasible(String),

    #[error("solver did not reach the requested accuracy: {0}")]
    SolverFailed(String),

    #[error("certificate check failed: {0}")]
    CertificateInvalid(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
