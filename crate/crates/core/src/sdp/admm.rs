//! Alternating-direction solver for
//!
//!   min tr(X)  s.t.  tr(A_l X) = b_l,  X ⪰ 0,
//!
//! run on the dual  max bᵀy  s.t.  Σ y_l A_l + S = I,  S ⪰ 0  with X as the
//! multiplier. Each iteration solves the normal equations with a cached
//! Cholesky factor of (⟨A_l, A_m⟩) and projects onto the PSD cone through an
//! eigendecomposition warm-started in the previous eigenbasis.

use crate::error::{Error, Result};
use crate::gram::GramConstraints;
use crate::linalg::{eig_hermitian, eig_hermitian_warm, CMatrix, Cholesky, HermitianMatrix};
use crate::scalar::{cre, Cx, Real};

use super::{ConstraintSystem, DualFunctional, SdpSolution, SdpStatus, SolverOptions};

const MU_MIN: f64 = 1e-4;
const MU_MAX: f64 = 1e4;
const MU_FACTOR: f64 = 0.7;
const MU_BALANCE: f64 = 4.0;
const MU_EVERY: usize = 10;
const RAY_EVERY: usize = 250;

const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

/// Solves K y = r for the normal matrix K = (⟨A_l, A_m⟩); falls back to the
/// pseudo-inverse when the constraints are linearly dependent.
pub(crate) enum NormalSolver<T: Real> {
    Cholesky(Cholesky<T>),
    Pseudo { vectors: Vec<Vec<Cx<T>>>, inverses: Vec<T> },
}

impl<T: Real> NormalSolver<T> {
    pub(crate) fn new(k: usize, kmat: &[T], dependent: bool) -> Result<Self> {
        if !dependent {
            match Cholesky::new(k, kmat) {
                Ok(ch) => return Ok(Self::Cholesky(ch)),
                Err(Error::Singular) => {}
                Err(e) => return Err(e),
            }
        }
        let eig = eig_hermitian(&HermitianMatrix::from_upper(k, |i, j| cre(kmat[i * k + j])))?;
        let cutoff = T::lit(PSEUDO_INVERSE_CUTOFF) * eig.max();
        let (inverses, vectors) = eig
            .values
            .iter()
            .zip(eig.vectors)
            .filter(|(&l, _)| l > cutoff)
            .map(|(&l, v)| (T::one() / l, v))
            .unzip();
        Ok(Self::Pseudo { vectors, inverses })
    }

    pub(crate) fn solve(&self, r: &[T]) -> Vec<T> {
        match self {
            Self::Cholesky(ch) => ch.solve(r),
            Self::Pseudo { vectors, inverses } => {
                let mut y = vec![T::zero(); r.len()];
                for (v, &w) in vectors.iter().zip(inverses) {
                    let coef: Cx<T> = v.iter().zip(r).map(|(z, &x)| z.conj() * cre(x)).sum::<Cx<T>>() * cre(w);
                    for (yi, z) in y.iter_mut().zip(v) {
                        *yi += (coef * z).re;
                    }
                }
                y
            }
        }
    }
}

/// Runs the iteration on `sys`. Recession directions proving infeasibility
/// are only searched for when `rays` is the same system in Gram form.
pub(crate) fn solve<T: Real, S: ConstraintSystem<T>>(
    sys: &S,
    opts: &SolverOptions,
    rays: Option<&GramConstraints<T>>,
    dependent: bool,
) -> Result<SdpSolution<T>> {
    let n = sys.dim();
    let k = sys.count();
    let b = sys.rhs();
    let b_norm = sys.rhs_norm();
    let chol = NormalSolver::new(k, &sys.normal_matrix(), dependent)?;
    let ident = HermitianMatrix::<T>::identity(n);
    let a_ident = sys.evaluate(&ident);
    let c_norm = T::lit(n as f64).sqrt();

    let tol_p = T::lit(opts.tol_primal);
    let tol_d = T::lit(opts.tol_dual);
    let tol_g = T::lit(opts.tol_gap);

    let mut x = HermitianMatrix::<T>::zeros(n);
    let mut y = vec![T::zero(); k];
    let mut ax = vec![T::zero(); k];
    let mut a_s = vec![T::zero(); k];
    let mut mu = T::one();
    let mut basis: Option<CMatrix<T>> = None;
    let mut y_anchor = vec![T::zero(); k];

    let mut last = Residuals::default();
    for it in 1..=opts.max_iter {
        // y = K⁻¹ (μ(b − A X) − A(S − I))
        let rhs: Vec<T> = (0..k).map(|l| mu * (b[l] - ax[l]) - (a_s[l] - a_ident[l])).collect();
        y = chol.solve(&rhs);

        // V = I − A*y − μX ; S = V₊ ; X = (−V)₊ / μ
        let mut v = ident.sub(&sys.adjoint(&y));
        v.axpy(-mu, &x);
        let eig = match &basis {
            Some(q) => eig_hermitian_warm(&v, q)?,
            None => eig_hermitian(&v)?,
        };
        let s = eig.map_spectrum(|l| (l > T::zero()).then_some(l));
        x = eig.map_spectrum(|l| (l < T::zero()).then_some(-l / mu));
        basis = Some(eig.basis());

        ax = sys.evaluate(&x);
        a_s = sys.evaluate(&s);

        let primal = norm_diff(&ax, b);
        let mut dres = sys.adjoint(&y).add(&s);
        dres.axpy(-T::one(), &ident);
        let dual = dres.frobenius_norm();
        let pobj = x.trace();
        let dobj: T = b.iter().zip(&y).map(|(&bi, &yi)| bi * yi).sum();
        last = Residuals { primal, dual, pobj, dobj, iterations: it };

        let rp = primal / (T::one() + b_norm);
        let rd = dual / (T::one() + c_norm);
        let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
        if rp <= tol_p && rd <= tol_d && gap <= tol_g {
            return Ok(last.into_solution(x, y, SdpStatus::Optimal, None));
        }

        if it % MU_EVERY == 0 {
            if rp * T::lit(MU_BALANCE) < rd {
                mu = (mu * T::lit(MU_FACTOR)).max(T::lit(MU_MIN));
            } else if rp > rd * T::lit(MU_BALANCE) {
                mu = (mu / T::lit(MU_FACTOR)).min(T::lit(MU_MAX));
            }
        }

        if let (Some(c), true) = (rays, it % RAY_EVERY == 0) {
            let drift: Vec<T> = y.iter().zip(&y_anchor).map(|(&a, &b)| a - b).collect();
            if rp > tol_p {
                let mut ray = DualFunctional::improving_ray(c, &chol, &drift)?;
                if ray.is_none() {
                    ray = DualFunctional::improving_ray(c, &chol, &y)?;
                }
                if ray.is_some() {
                    return Ok(last.into_solution(x, y, SdpStatus::Infeasible, ray));
                }
            }
            y_anchor.clone_from(&y);
        }
    }
    Ok(last.into_solution(x, y, SdpStatus::MaxIter, None))
}

fn norm_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Residuals<T> {
    primal: T,
    dual: T,
    pobj: T,
    dobj: T,
    iterations: usize,
}

impl<T: Real> Residuals<T> {
    fn into_solution(
        self,
        x: HermitianMatrix<T>,
        y: Vec<T>,
        status: SdpStatus,
        certificate: Option<DualFunctional<T>>,
    ) -> SdpSolution<T> {
        SdpSolution {
            objective: x.trace(),
            matrix: x,
            dual: y,
            dual_objective: self.dobj,
            primal_residual: self.primal,
            dual_residual: self.dual,
            gap: (self.pobj - self.dobj).abs(),
            status,
            iterations: self.iterations,
            infeasibility_certificate: certificate,
            face_dim: None,
        }
    }
}
