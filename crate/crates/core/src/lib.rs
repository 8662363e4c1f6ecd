//! Sums of Hermitian squares in commutative and free polynomial algebras:
//! Gram matrices, the trace-minimal sos-norm, and low-rank approximate
//! decompositions with certified error.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the solver tolerances assume.

pub mod approx;
pub mod checks;
pub mod error;
pub mod gram;
pub mod linalg;
pub mod poly;
pub mod random;
pub mod scalar;
pub mod sdp;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub use approx::{approximate, approximate_free, approximate_sphere, bound_report, pythagoras_upper_bound};
pub use gram::{build_constraints, gram_map, gram_preimage_free, SquareBasis};
pub use linalg::{low_rank_factor, truncate_rank, Schatten};
pub use poly::{Flavor, Term};
pub use sdp::{dual_bound, rank_reduce, sos_feasible, sos_norm, SolverOptions};

pub type Polynomial = poly::Polynomial<f64>;
pub type Polynomial32 = poly::Polynomial<f32>;
pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
pub type HermitianMatrix32 = linalg::HermitianMatrix<f32>;
pub type GramConstraints = gram::GramConstraints<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type DualFunctional = sdp::DualFunctional<f64>;
pub type SosCertificate = approx::SosCertificate<f64>;
pub type Truncation = linalg::Truncation<f64>;
