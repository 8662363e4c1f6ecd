//! Approximation of sums of squares by sums of few squares, exact
//! decompositions with few squares, and the associated counting bounds.

mod bounds;
mod certificate;

use crate::error::{Error, Result};
use crate::gram::{build_constraints, gram_map, gram_preimage_free, operator_norm_bound, PolyNorm, SquareBasis};
use crate::linalg::{psd_check, truncate_rank, CMatrix, HermitianMatrix, Schatten, SpectralDecomposition};
use crate::poly::{Flavor, Polynomial};
use crate::scalar::{cre, Cx, Real};
use crate::sdp::{rank_reduce, sos_feasible, Feasibility, SolverOptions};

pub use bounds::{bound_report, ceil_sqrt, strict_cap, BoundReport};
pub use certificate::{
    reassemble, square_root_polynomial, CertificateDoc, Route, RouteSummary, SosCertificate, REASSEMBLY_TOLERANCE,
};

/// Squares whose Gram matrices sum to the top `k` eigenpairs: a square with
/// coefficients c contributes the Gram entries c̄_i c_j, so c = conj(√λ v).
fn squares_from_spectrum<T: Real>(eig: &SpectralDecomposition<T>, k: usize) -> Vec<Vec<Cx<T>>> {
    eig.values
        .iter()
        .zip(&eig.vectors)
        .take(k)
        .filter(|(&l, _)| l > T::zero())
        .map(|(&l, v)| v.iter().map(|z| z.conj() * cre(l.sqrt())).collect())
        .collect()
}

fn squares_from_factor<T: Real>(f: &CMatrix<T>) -> Vec<Vec<Cx<T>>> {
    (0..f.cols()).map(|j| f.column(j).into_iter().map(|z| z.conj()).collect()).collect()
}

fn check_epsilon<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must be positive and finite, got {eps}")))
    }
}

fn half_degree<T: Real>(p: &Polynomial<T>) -> Result<usize> {
    match p.degree() {
        Some(deg) if deg % 2 == 0 => Ok(deg / 2),
        Some(deg) => Err(Error::InvalidArgument(format!("degree {deg} is odd"))),
        None => Err(Error::InvalidArgument("the zero polynomial has no degree; pass a basis explicitly".into())),
    }
}

/// Approximation within ε by fewer than (‖G‖·‖a‖_sos/ε)^{p/(p−1)} squares,
/// using the certified norm pair of the basis: the sphere sup-norm with
/// p = ∞ for monomials, the coefficient 2-norm for words.
pub fn approximate<T: Real>(
    a: &Polynomial<T>,
    basis: &SquareBasis,
    eps: T,
    opts: &SolverOptions,
) -> Result<SosCertificate<T>> {
    check_epsilon(eps)?;
    match basis.flavor() {
        Flavor::Free => {
            operator_norm_bound::<T>(basis, PolyNorm::CoefficientTwo, Schatten::P(T::lit(2.0)))?;
            approximate_free_with(a, basis, eps)
        }
        Flavor::Commutative => sphere_pipeline(a, basis, eps, opts),
    }
}

/// Free-algebra approximation in the coefficient 2-norm, read off the unique
/// Gram matrix. The count is below (Σ p_{ν*ν}/ε)².
pub fn approximate_free<T: Real>(p: &Polynomial<T>, eps: T) -> Result<SosCertificate<T>> {
    check_epsilon(eps)?;
    if p.flavor() != Flavor::Free {
        return Err(Error::FlavorMismatch { expected: Flavor::Free, found: p.flavor() });
    }
    let basis = SquareBasis::new(Flavor::Free, p.n_vars(), half_degree(p)?)?;
    approximate_free_with(p, &basis, eps)
}

fn approximate_free_with<T: Real>(p: &Polynomial<T>, basis: &SquareBasis, eps: T) -> Result<SosCertificate<T>> {
    if basis.scale() != 1.0 {
        return Err(Error::NoCertifiedBound("free pipeline needs the unscaled word basis".into()));
    }
    let m = gram_preimage_free(p, basis.degree())?;
    let eig = psd_check(&m)?;
    let trace = m.trace();

    let two = truncate_rank(&m, eps, Schatten::P(T::lit(2.0)))?;
    let inf = truncate_rank(&m, eps, Schatten::Infinity)?;
    let tail2 = |k: usize| eig.values[k..].iter().map(|&l| l * l).sum::<T>().sqrt();
    let inf_error = tail2(inf.kept);
    let routes = vec![
        RouteSummary { route: Route::SchattenTwo, squares: two.rank, error: two.error.to_f64_lossy(), accepted: true },
        RouteSummary {
            route: Route::SchattenInf,
            squares: inf.rank,
            error: inf_error.to_f64_lossy(),
            accepted: inf_error <= eps,
        },
    ];
    let (route, kept) = if inf_error <= eps && inf.rank < two.rank {
        (Route::SchattenInf, inf.kept)
    } else {
        (Route::SchattenTwo, two.kept)
    };

    let squares = squares_from_spectrum(&eig, kept);
    let approximation = reassemble(basis, &squares)?;
    let error = p.checked_sub(&approximation)?.coeff_two_norm();
    let rank_bound = (trace / eps).powi(2);
    Ok(SosCertificate {
        basis: basis.clone(),
        input: p.clone(),
        approximation,
        squares,
        error,
        norm: PolyNorm::CoefficientTwo,
        route,
        epsilon: eps,
        sos_norm: trace,
        rank_bound,
        rank_cap: strict_cap(rank_bound),
        routes,
    })
}

/// Commutative approximation in the sup-norm on the unit sphere with fewer
/// than ‖p‖_sos/ε squares.
pub fn approximate_sphere<T: Real>(p: &Polynomial<T>, eps: T, opts: &SolverOptions) -> Result<SosCertificate<T>> {
    check_epsilon(eps)?;
    if p.flavor() != Flavor::Commutative {
        return Err(Error::FlavorMismatch { expected: Flavor::Commutative, found: p.flavor() });
    }
    let basis = SquareBasis::new(Flavor::Commutative, p.n_vars(), half_degree(p)?)?;
    sphere_pipeline(p, &basis, eps, opts)
}

/// A PSD Gram matrix of `a` of minimal trace, or the reason none was found.
pub(crate) fn trace_optimal_gram<T: Real>(
    a: &Polynomial<T>,
    basis: &SquareBasis,
    opts: &SolverOptions,
) -> Result<HermitianMatrix<T>> {
    match sos_feasible(a, basis, opts)? {
        Feasibility::Feasible { witness } => Ok(witness),
        Feasibility::Infeasible { certificate } => Err(Error::Infeasible(format!(
            "separating functional with value {:e} on the input",
            certificate.objective.to_f64_lossy()
        ))),
        Feasibility::Inconclusive { solution } => Err(Error::SolverFailed(format!(
            "stopped after {} iterations with primal residual {:e}, dual residual {:e}, gap {:e}",
            solution.iterations,
            solution.primal_residual.to_f64_lossy(),
            solution.dual_residual.to_f64_lossy(),
            solution.gap.to_f64_lossy()
        ))),
    }
}

fn sphere_pipeline<T: Real>(
    a: &Polynomial<T>,
    basis: &SquareBasis,
    eps: T,
    opts: &SolverOptions,
) -> Result<SosCertificate<T>> {
    let g = operator_norm_bound::<T>(basis, PolyNorm::SupSphere, Schatten::Infinity)?;
    let m = trace_optimal_gram(a, basis, opts)?;
    let trace = m.trace();
    // |a − G(M)| ≤ Σ|coefficients| on the sphere; charged against ε
    let slack: T = a.checked_sub(&gram_map(&m, basis)?)?.iter().map(|(_, c)| c.norm()).sum();
    let budget = eps / g - slack;
    if !(budget > T::zero()) {
        return Err(Error::SolverFailed(format!(
            "Gram residual {slack:e} leaves no room below epsilon {eps}"
        )));
    }
    let trunc = truncate_rank(&m, budget, Schatten::Infinity)?;
    let rank_bound = if trace > T::zero() { g * trace / eps } else { T::zero() };
    let rank_cap = strict_cap(rank_bound);
    let kept = trunc.kept.min(rank_cap);
    let error = g * trunc.spectrum.values.get(kept).copied().unwrap_or_else(T::zero) + slack;
    let squares = squares_from_spectrum(&trunc.spectrum, kept);
    let approximation = reassemble(basis, &squares)?;
    Ok(SosCertificate {
        basis: basis.clone(),
        input: a.clone(),
        approximation,
        squares,
        error,
        norm: PolyNorm::SupSphere,
        route: Route::SchattenInf,
        epsilon: eps,
        sos_norm: trace,
        rank_bound,
        rank_cap,
        routes: Vec::new(),
    })
}

/// An exact decomposition a = Σ q_i* q_i.
#[derive(Debug, Clone)]
pub struct ExactDecomposition<T: Real> {
    pub squares: Vec<Vec<Cx<T>>>,
    pub count: usize,
    /// ⌈√dim V*V⌉.
    pub target: usize,
    /// Number of real constraints k.
    pub constraints: usize,
    /// ‖a − Σ q_i* q_i‖₂.
    pub residual: T,
    /// Set when rank reduction stopped early; the decomposition is still exact.
    pub diagnostic: Option<String>,
}

/// Writes a ∈ ΣV² as a sum of at most ⌈√dim V*V⌉ squares by reducing the
/// rank of a PSD Gram matrix.
pub fn pythagoras_upper_bound<T: Real>(
    a: &Polynomial<T>,
    basis: &SquareBasis,
    opts: &SolverOptions,
) -> Result<ExactDecomposition<T>> {
    let c = build_constraints(a, basis)?;
    let k = c.len();
    let target = ceil_sqrt(k as u128) as usize;
    let (squares, diagnostic) = match basis.flavor() {
        Flavor::Free => {
            let m = gram_preimage_free(a, basis.degree())?;
            let eig = psd_check(&m)?;
            (squares_from_spectrum(&eig, crate::linalg::low_rank_factor(&m)?.len()), None)
        }
        Flavor::Commutative => {
            let m = trace_optimal_gram(a, basis, opts)?;
            match rank_reduce(&c, &m, target) {
                Ok(r) => (squares_from_factor(&r.factor), None),
                Err(e @ (Error::RankReductionStalled { .. } | Error::NoConvergence { .. })) => {
                    let eig = psd_check(&m)?;
                    let rank = crate::linalg::low_rank_factor(&m)?.len();
                    (squares_from_spectrum(&eig, rank), Some(e.to_string()))
                }
                Err(e) => return Err(e),
            }
        }
    };
    let residual = a.checked_sub(&reassemble(basis, &squares)?)?.coeff_two_norm();
    Ok(ExactDecomposition { count: squares.len(), squares, target, constraints: k, residual, diagnostic })
}
