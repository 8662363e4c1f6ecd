//! The sos-norm ‖a‖_{v,sos} = min{tr M : M ⪰ 0, G_v(M) = a} as a
//! semidefinite program, its dual lower bounds, feasibility certificates,
//! and rank reduction of PSD solutions.

mod admm;
mod face;
mod rank;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{build_constraints, gram_preimage_free, ElementKind, GramConstraints, SquareBasis};
use crate::linalg::{eig_hermitian, HermitianMatrix, MatrixDoc, PSD_CLIP_RELATIVE};
use crate::poly::{sphere_sample, Flavor, Polynomial, SpherePoint, Term};
use crate::scalar::Real;

pub use rank::{rank_reduce, AffineSystem, ConstraintSystem, RankReduction};

/// Tolerances and limits for the trace-minimization solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative primal residual ‖A(X) − b‖ / (1 + ‖b‖).
    pub tol_primal: f64,
    /// Relative dual residual ‖A*y + S − I‖_F / (1 + √n).
    pub tol_dual: f64,
    /// Relative duality gap |tr X − bᵀy| / (1 + |tr X| + |bᵀy|).
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Sphere resolution for the quick negativity test in [`sos_feasible`].
    pub feasibility_resolution: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_primal: 1e-8,
            tol_dual: 1e-8,
            tol_gap: 1e-7,
            max_iter: 50_000,
            feasibility_resolution: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Output of the trace-minimization solver.
#[derive(Debug, Clone)]
pub struct SdpSolution<T: Real> {
    /// Primal iterate X (PSD by construction).
    pub matrix: HermitianMatrix<T>,
    /// tr(X).
    pub objective: T,
    /// Dual multipliers y_l, one per real constraint.
    pub dual: Vec<T>,
    pub dual_objective: T,
    /// ‖A(X) − b‖ (absolute).
    pub primal_residual: T,
    /// ‖A*y + S − I‖_F (absolute).
    pub dual_residual: T,
    /// |tr X − bᵀy| (absolute).
    pub gap: T,
    pub status: SdpStatus,
    pub iterations: usize,
    pub infeasibility_certificate: Option<DualFunctional<T>>,
    /// Size of the reduced matrix space when real zeros of the input forced
    /// the search onto a face of the PSD cone.
    pub face_dim: Option<usize>,
}

impl<T: Real> SdpSolution<T> {
    fn trivial(n: usize, k: usize) -> Self {
        Self {
            matrix: HermitianMatrix::zeros(n),
            objective: T::zero(),
            dual: vec![T::zero(); k],
            dual_objective: T::zero(),
            primal_residual: T::zero(),
            dual_residual: T::zero(),
            gap: T::zero(),
            status: SdpStatus::Optimal,
            iterations: 0,
            infeasibility_certificate: None,
            face_dim: None,
        }
    }

    pub fn to_doc(&self) -> SolutionDoc {
        SolutionDoc {
            status: self.status,
            objective: self.objective.to_f64_lossy(),
            dual_objective: self.dual_objective.to_f64_lossy(),
            primal_residual: self.primal_residual.to_f64_lossy(),
            dual_residual: self.dual_residual.to_f64_lossy(),
            gap: self.gap.to_f64_lossy(),
            iterations: self.iterations,
            matrix: self.matrix.to_doc(),
            dual: self.dual.iter().map(|v| v.to_f64_lossy()).collect(),
            face_dim: self.face_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub status: SdpStatus,
    pub objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub matrix: MatrixDoc,
    pub dual: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_dim: Option<usize>,
}

/// A *-linear functional φ on V*V, stored by its real values y_l = φ(ω_l)
/// on the Hermitian product basis. Then φ(v*v) = c* (Σ y_l A_l) c for the
/// coefficient vector c of v (up to conjugation), so φ(v*v) ≤ ‖v‖² for all
/// v exactly when Σ y_l A_l ⪯ I.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFunctional<T: Real> {
    pub values: Vec<T>,
    /// λ_max(Σ y_l A_l).
    pub max_eigenvalue: T,
    /// φ(a) for the element the functional was built against.
    pub objective: T,
}

impl<T: Real> DualFunctional<T> {
    /// Records λ_max and φ(a) for the given values.
    pub fn new(c: &GramConstraints<T>, values: Vec<T>) -> Result<Self> {
        let max_eigenvalue = eig_hermitian(&c.adjoint(&values))?.max();
        let objective = dot(&values, c.targets());
        Ok(Self { values, max_eigenvalue, objective })
    }

    /// min over unit coefficient vectors v of ‖v‖² − φ(v*v) = 1 − λ_max.
    pub fn feasibility_margin(&self) -> T {
        T::one() - self.max_eigenvalue
    }

    /// φ(p) for any Hermitian p in V*V.
    pub fn apply(&self, c: &GramConstraints<T>, p: &Polynomial<T>) -> Result<T> {
        Ok(dot(&self.values, &c.expand(p)?))
    }

    /// The evaluation functional φ_s(q) = q(s) at a real sphere point.
    pub fn evaluation(c: &GramConstraints<T>, s: &SpherePoint<T>) -> Result<Self> {
        let basis = c.basis();
        if basis.flavor() != Flavor::Commutative {
            return Err(Error::FlavorMismatch { expected: Flavor::Commutative, found: basis.flavor() });
        }
        let values = c
            .elements()
            .iter()
            .map(|e| {
                let Term::Monomial(exp) = &e.term else { unreachable!("commutative basis") };
                debug_assert_eq!(e.kind, ElementKind::SelfAdjoint);
                exp.iter().zip(s.coords()).fold(T::one(), |m, (&k, &x)| m * x.powi(k as i32))
            })
            .collect();
        Self::new(c, values)
    }

    /// Rescales y so that Σ y_l A_l ⪯ I; the result is feasible for the
    /// dual program and φ(a) is a valid lower bound on the sos-norm.
    pub fn certified(c: &GramConstraints<T>, y: &[T]) -> Result<Self> {
        let f = Self::new(c, y.to_vec())?;
        if f.max_eigenvalue <= T::one() {
            return Ok(f);
        }
        let scale = T::one() / f.max_eigenvalue;
        Self::new(c, y.iter().map(|&v| v * scale).collect())
    }

    /// Tries to turn a dual direction into a recession direction with
    /// Σ y_l A_l ⪯ 0 and bᵀy > 0, which proves that no PSD Gram matrix
    /// exists. The direction is cleaned up by alternating between the range
    /// of the adjoint and the NSD cone.
    pub(crate) fn improving_ray(
        c: &GramConstraints<T>,
        chol: &admm::NormalSolver<T>,
        candidate: &[T],
    ) -> Result<Option<Self>> {
        let mut y = candidate.to_vec();
        if !normalize(&mut y) {
            return Ok(None);
        }
        for _ in 0..RAY_REFINEMENT_STEPS {
            if dot(&y, c.targets()) <= T::zero() {
                return Ok(None);
            }
            let eig = eig_hermitian(&c.adjoint(&y))?;
            let scale = eig.values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
            if eig.max() <= T::lit(RAY_NSD_TOLERANCE) * scale {
                break;
            }
            let neg = eig.map_spectrum(|l| (l < T::zero()).then_some(l));
            y = chol.solve(&c.apply(&neg));
            if !normalize(&mut y) {
                return Ok(None);
            }
        }
        let f = Self::new(c, y)?;
        let scale = c.adjoint(&f.values).max_abs_entry();
        let b_norm = c.target_norm();
        if f.max_eigenvalue <= T::lit(RAY_NSD_TOLERANCE) * scale
            && f.objective > T::lit(RAY_OBJECTIVE_TOLERANCE) * (T::one() + b_norm)
        {
            Ok(Some(f))
        } else {
            Ok(None)
        }
    }
}

const RAY_REFINEMENT_STEPS: usize = 30;
const RAY_NSD_TOLERANCE: f64 = 1e-11;
const RAY_OBJECTIVE_TOLERANCE: f64 = 1e-8;

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn normalize<T: Real>(v: &mut [T]) -> bool {
    let n = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if !(n > T::zero()) || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Value of the sos-norm together with the solver output that produced it.
#[derive(Debug, Clone)]
pub struct SosNorm<T: Real> {
    /// tr of the trace-minimal Gram matrix; +∞ when `a` is certified not to
    /// be a sum of squares.
    pub value: T,
    pub solution: SdpSolution<T>,
}

/// Solves the trace-minimization problem for an existing constraint system.
pub fn solve_trace_min<T: Real>(c: &GramConstraints<T>, opts: &SolverOptions) -> Result<SdpSolution<T>> {
    if c.targets().iter().all(|t| t.is_zero()) {
        return Ok(SdpSolution::trivial(c.dim(), c.len()));
    }
    if c.basis().flavor() == Flavor::Commutative && opts.max_iter > FACE_PROBE_ITERATIONS {
        let probe = SolverOptions { max_iter: FACE_PROBE_ITERATIONS, ..opts.clone() };
        let first = admm::solve(c, &probe, Some(c), false)?;
        if first.status != SdpStatus::MaxIter {
            return Ok(first);
        }
        if let Some(reduced) = face::solve_on_zero_face(c, opts)? {
            if reduced.status == SdpStatus::Optimal {
                return Ok(reduced);
            }
        }
    }
    admm::solve(c, opts, Some(c), false)
}

/// Iterations allowed before a stalled commutative solve looks for real
/// zeros of the input to reduce the problem.
const FACE_PROBE_ITERATIONS: usize = 2_000;

/// ‖a‖_{v,sos} by semidefinite programming.
pub fn sos_norm<T: Real>(a: &Polynomial<T>, basis: &SquareBasis, opts: &SolverOptions) -> Result<SosNorm<T>> {
    let c = build_constraints(a, basis)?;
    let solution = solve_trace_min(&c, opts)?;
    let value = match solution.status {
        SdpStatus::Infeasible => T::infinity(),
        _ => solution.objective,
    };
    Ok(SosNorm { value, solution })
}

/// Σ_{|ν|=d} p_{ν*ν}, the closed-form sos-norm of a free sum of squares
/// (the trace of its unique Gram matrix).
pub fn free_sos_norm_closed_form<T: Real>(p: &Polynomial<T>, d: usize) -> Result<T> {
    Ok(gram_preimage_free(p, d)?.trace())
}

/// Answer of [`sos_feasible`].
#[derive(Debug, Clone)]
pub enum Feasibility<T: Real> {
    /// A PSD Gram matrix of a.
    Feasible { witness: HermitianMatrix<T> },
    /// A functional with φ(v*v) ≤ 0 on all squares but φ(a) > 0.
    Infeasible { certificate: DualFunctional<T> },
    /// The solver stopped without a verdict.
    Inconclusive { solution: SdpSolution<T> },
}

impl<T: Real> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Decides a ∈ ΣV² with a certificate either way.
///
/// Free: the unique Gram matrix is tested directly. Commutative: a negative
/// value on the sphere sample gives an evaluation certificate; otherwise the
/// trace-minimization solver decides.
pub fn sos_feasible<T: Real>(a: &Polynomial<T>, basis: &SquareBasis, opts: &SolverOptions) -> Result<Feasibility<T>> {
    let c = build_constraints(a, basis)?;
    if a.is_zero() {
        return Ok(Feasibility::Feasible { witness: HermitianMatrix::zeros(basis.len()) });
    }
    match basis.flavor() {
        Flavor::Free => {
            let m = gram_preimage_free(a, basis.degree())?;
            let eig = eig_hermitian(&m)?;
            let scale = eig.values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
            if eig.min() >= -T::lit(PSD_CLIP_RELATIVE) * scale {
                let witness = eig.map_spectrum(|l| Some(l.max(T::zero())));
                return Ok(Feasibility::Feasible { witness });
            }
            // y with A*y = −u u* for the most negative eigenvector u
            let u = eig.vectors.last().expect("nonempty").clone();
            let w = HermitianMatrix::rank_one(&u).scale(-T::one());
            let y = c.factor_gram_system()?.solve(&c.apply(&w));
            Ok(Feasibility::Infeasible { certificate: DualFunctional::new(&c, y)? })
        }
        Flavor::Commutative => {
            let tol = T::lit(1e-9) * (T::one() + a.coeff_two_norm());
            for s in sphere_sample(basis.n_vars(), opts.feasibility_resolution.max(1))? {
                let s = SpherePoint::new(s.into_iter().map(T::lit).collect())?;
                if a.evaluate(&s)?.re < -tol {
                    let eval = DualFunctional::evaluation(&c, &s)?;
                    let neg = eval.values.iter().map(|&v| -v).collect();
                    return Ok(Feasibility::Infeasible { certificate: DualFunctional::new(&c, neg)? });
                }
            }
            let solution = solve_trace_min(&c, opts)?;
            Ok(match solution.status {
                SdpStatus::Optimal => Feasibility::Feasible { witness: solution.matrix },
                SdpStatus::Infeasible => Feasibility::Infeasible {
                    certificate: solution.infeasibility_certificate.expect("infeasible status carries a certificate"),
                },
                SdpStatus::MaxIter => Feasibility::Inconclusive { solution },
            })
        }
    }
}

/// A certified lower bound on the sos-norm from the dual program.
#[derive(Debug, Clone)]
pub struct DualBound<T: Real> {
    pub value: T,
    pub functional: DualFunctional<T>,
    pub solution: SdpSolution<T>,
}

/// Optimal value of sup φ(a) s.t. φ(v*v) ≤ ‖v‖², via the solver's dual
/// iterate rescaled to exact feasibility.
pub fn dual_bound<T: Real>(a: &Polynomial<T>, basis: &SquareBasis, opts: &SolverOptions) -> Result<DualBound<T>> {
    let c = build_constraints(a, basis)?;
    let solution = solve_trace_min(&c, opts)?;
    dual_bound_from(&c, solution)
}

/// Certifies the dual part of an existing solution.
pub fn dual_bound_from<T: Real>(c: &GramConstraints<T>, solution: SdpSolution<T>) -> Result<DualBound<T>> {
    match solution.status {
        SdpStatus::Infeasible => {
            let functional = solution.infeasibility_certificate.clone().expect("certificate");
            Ok(DualBound { value: T::infinity(), functional, solution })
        }
        _ => {
            let functional = DualFunctional::certified(c, &solution.dual)?;
            let value = functional.objective.max(T::zero());
            Ok(DualBound { value, functional, solution })
        }
    }
}

#[cfg(test)]
mod tests;
