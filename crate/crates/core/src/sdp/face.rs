//! Facial reduction from real zeros: if a(s) = 0 at a sphere point s, then
//! every PSD Gram matrix M of a satisfies M 𝔪(s) = 0, so the search can be
//! confined to matrices U N U* with U spanning the complement of the 𝔪(s).

use crate::error::Result;
use crate::gram::{ElementKind, GramConstraints};
use crate::linalg::{eig_hermitian, CMatrix, HermitianMatrix};
use crate::poly::{sphere_sample, Term};
use crate::scalar::{cre, Real};

use super::rank::{AffineSystem, ConstraintSystem};
use super::{admm, SdpSolution, SdpStatus, SolverOptions};

const SEARCH_RESOLUTION: usize = 10;
const MAX_STARTS: usize = 64;
const START_SEPARATION: f64 = 0.05;
const NEWTON_STEPS: usize = 60;
/// Relative to the coefficient 1-norm of a.
const ZERO_TOLERANCE: f64 = 1e-12;
const DUPLICATE_DISTANCE: f64 = 1e-6;

/// The real form a(x) = Σ_l b_l τ_l(x) encoded by a commutative system.
struct Form<'a> {
    exps: Vec<&'a [u32]>,
    coef: &'a [f64],
}

fn exponents_of<T: Real>(c: &GramConstraints<T>) -> Option<Vec<Vec<u32>>> {
    c.elements()
        .iter()
        .map(|e| match (&e.term, e.kind) {
            (Term::Monomial(exp), ElementKind::SelfAdjoint) => Some(exp.clone()),
            _ => None,
        })
        .collect()
}

impl Form<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.exps.iter().zip(self.coef).map(|(e, &c)| c * monomial(e, x, &[])).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| self.exps.iter().zip(self.coef).map(|(e, &c)| c * monomial(e, x, &[i])).sum())
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = self.exps.iter().zip(self.coef).map(|(e, &c)| c * monomial(e, x, &[i, j])).sum();
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        h
    }
}

/// ∂^{|d|} x^e / ∂x_{d_1}⋯∂x_{d_m}.
fn monomial(e: &[u32], x: &[f64], d: &[usize]) -> f64 {
    let mut out = 1.0;
    for (i, (&k, &xi)) in e.iter().zip(x).enumerate() {
        let times = d.iter().filter(|&&j| j == i).count() as u32;
        if times > k {
            return 0.0;
        }
        let falling: u32 = (0..times).map(|t| k - t).product();
        out *= falling as f64 * xi.powi((k - times) as i32);
    }
    out
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Riemannian Newton descent of a on the sphere from `s`, with the absolute
/// Hessian spectrum and backtracking.
fn descend(form: &Form, mut s: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let n = s.len();
    let mut f = form.value(&s);
    for _ in 0..NEWTON_STEPS {
        let g = form.gradient(&s);
        let sg: f64 = s.iter().zip(&g).map(|(a, b)| a * b).sum();
        let rg: Vec<f64> = g.iter().zip(&s).map(|(gi, si)| gi - sg * si).collect();
        let h = form.hessian(&s);
        // P (∇²a − ⟨s, ∇a⟩ I) P
        let proj = |i: usize, j: usize| (if i == j { 1.0 } else { 0.0 }) - s[i] * s[j];
        let mut inner = h.clone();
        for i in 0..n {
            inner[i * n + i] -= sg;
        }
        let rh = HermitianMatrix::<f64>::from_upper(n, |i, j| {
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    v += proj(i, a) * inner[a * n + b] * proj(b, j);
                }
            }
            cre(v)
        });
        let eig = eig_hermitian(&rh)?;
        let scale = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut step = vec![0.0; n];
        for (l, v) in eig.values.iter().zip(&eig.vectors) {
            if l.abs() <= 1e-14 * scale.max(1e-300) {
                continue;
            }
            let coef: f64 = v.iter().zip(&rg).map(|(z, r)| z.re * r).sum::<f64>() / l.abs();
            for (st, z) in step.iter_mut().zip(v) {
                *st -= coef * z.re;
            }
        }
        if step.iter().all(|x| *x == 0.0) {
            step = rg.iter().map(|x| -x).collect();
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let mut cand: Vec<f64> = s.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            normalize(&mut cand);
            let fc = form.value(&cand);
            if fc < f {
                s = cand;
                f = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((s, f))
}

/// Real zeros of the form encoded by `c` on the unit sphere, one per ±pair.
pub(crate) fn sphere_zeros<T: Real>(c: &GramConstraints<T>) -> Result<Vec<Vec<f64>>> {
    let coef: Vec<f64> = c.targets().iter().map(|b| b.to_f64_lossy()).collect();
    let Some(exps) = exponents_of(c) else { return Ok(Vec::new()) };
    let form = Form { exps: exps.iter().map(|e| e.as_slice()).collect(), coef: &coef };
    let norm1: f64 = coef.iter().map(|x| x.abs()).sum();
    if norm1 == 0.0 {
        return Ok(Vec::new());
    }
    let n = c.basis().n_vars();
    let mut sample: Vec<(f64, Vec<f64>)> =
        sphere_sample(n, SEARCH_RESOLUTION)?.into_iter().map(|s| (form.value(&s), s)).collect();
    sample.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let near = |a: &[f64], b: &[f64], tol: f64| {
        let dm: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let dp: f64 = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
        dm.min(dp) < tol
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for (_, s) in sample {
        if starts.len() >= MAX_STARTS {
            break;
        }
        if !starts.iter().any(|t| near(t, &s, START_SEPARATION)) {
            starts.push(s);
        }
    }
    let mut zeros: Vec<Vec<f64>> = Vec::new();
    for s in starts {
        let (z, f) = descend(&form, s)?;
        if f.abs() <= ZERO_TOLERANCE * norm1 && !zeros.iter().any(|t| near(t, &z, DUPLICATE_DISTANCE)) {
            zeros.push(z);
        }
    }
    Ok(zeros)
}

/// Orthonormal basis (as columns) of the complement of span{𝔪(s)}, or None
/// when the zeros leave nothing to reduce.
fn complement<T: Real>(c: &GramConstraints<T>, zeros: &[Vec<f64>]) -> Option<CMatrix<T>> {
    let basis = c.basis();
    let dim = basis.len();
    let mut span: Vec<Vec<f64>> = Vec::new();
    let push = |span: &mut Vec<Vec<f64>>, mut v: Vec<f64>, keep: f64| {
        let before = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..2 {
            for q in span.iter() {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= d * qi);
            }
        }
        let after = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if after > keep * before {
            v.iter_mut().for_each(|x| *x /= after);
            span.push(v);
            true
        } else {
            false
        }
    };
    for z in zeros {
        let m: Vec<f64> = basis
            .terms()
            .iter()
            .map(|t| {
                let Term::Monomial(e) = t else { unreachable!("commutative basis") };
                monomial(e, z, &[])
            })
            .collect();
        push(&mut span, m, 1e-6);
    }
    let removed = span.len();
    if removed == 0 || removed >= dim {
        return None;
    }
    let mut cols = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        if push(&mut span, e.clone(), 0.1) {
            cols.push(span.last().expect("just pushed").iter().map(|&x| cre(T::lit(x))).collect());
        }
        if cols.len() == dim - removed {
            break;
        }
    }
    Some(CMatrix::from_columns(dim, &cols))
}

/// Solves the trace-minimization problem on the face cut out by the real
/// zeros of a, if there are any. The returned solution is lifted back to
/// the full basis and its residual measured against the full system.
pub(crate) fn solve_on_zero_face<T: Real>(
    c: &GramConstraints<T>,
    opts: &SolverOptions,
) -> Result<Option<SdpSolution<T>>> {
    let zeros = sphere_zeros(c)?;
    let Some(u) = complement(c, &zeros) else { return Ok(None) };
    let r = u.cols();
    let mats: Vec<HermitianMatrix<T>> = (0..c.len()).map(|l| c.compress(l, &u)).collect();
    let reduced = AffineSystem::new(mats, c.targets().to_vec())?;
    let mut sol = admm::solve(&reduced, opts, None, true)?;

    let x = sol.matrix.congruence(&u.adjoint());
    let ax = c.apply(&x);
    let primal: T = ax.iter().zip(c.targets()).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
    if sol.status == SdpStatus::Optimal && primal > T::lit(opts.tol_primal) * (T::one() + c.target_norm()) {
        sol.status = SdpStatus::MaxIter;
    }
    sol.objective = x.trace();
    sol.matrix = x;
    sol.primal_residual = primal;
    sol.face_dim = Some(r);
    Ok(Some(sol))
}
