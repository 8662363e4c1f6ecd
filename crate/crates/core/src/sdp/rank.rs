//! Barvinok-style rank reduction: moves a PSD solution of k real affine
//! constraints along the face of the feasible set until its rank r satisfies
//! r² ≤ k (or a requested target).

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gram::GramConstraints;
use crate::linalg::{eig_hermitian, CMatrix, HermitianMatrix};
use crate::scalar::{cre, cx, Cx, Real};

const FACTOR_DROP: f64 = 1e-12;
const RESIDUAL_TOLERANCE: f64 = 1e-7;
const NULL_TOLERANCE: f64 = 1e-9;

/// Real affine constraints tr(A_l M) = b_l on Hermitian M.
pub trait ConstraintSystem<T: Real> {
    fn dim(&self) -> usize;
    fn count(&self) -> usize;
    fn rhs(&self) -> &[T];
    fn evaluate(&self, m: &HermitianMatrix<T>) -> Vec<T>;
    /// Σ y_l A_l.
    fn adjoint(&self, y: &[T]) -> HermitianMatrix<T>;
    /// (⟨A_l, A_m⟩), row-major k×k.
    fn normal_matrix(&self) -> Vec<T>;
    /// F* A_l F.
    fn compress(&self, l: usize, f: &CMatrix<T>) -> HermitianMatrix<T>;

    fn rhs_norm(&self) -> T {
        self.rhs().iter().map(|&b| b * b).sum::<T>().sqrt()
    }
}

impl<T: Real> ConstraintSystem<T> for GramConstraints<T> {
    fn dim(&self) -> usize {
        GramConstraints::dim(self)
    }

    fn count(&self) -> usize {
        self.len()
    }

    fn rhs(&self) -> &[T] {
        self.targets()
    }

    fn evaluate(&self, m: &HermitianMatrix<T>) -> Vec<T> {
        self.apply(m)
    }

    fn adjoint(&self, y: &[T]) -> HermitianMatrix<T> {
        GramConstraints::adjoint(self, y)
    }

    fn normal_matrix(&self) -> Vec<T> {
        self.gram_system()
    }

    fn compress(&self, l: usize, f: &CMatrix<T>) -> HermitianMatrix<T> {
        let r = f.cols();
        let mut out = vec![Cx::<T>::zero(); r * r];
        for &(i, j, v) in &self.matrices()[l].entries {
            for a in 0..r {
                let left = f.get(i, a).conj() * v;
                if left.is_zero() {
                    continue;
                }
                for b in a..r {
                    out[a * r + b] += left * f.get(j, b);
                }
            }
        }
        HermitianMatrix::from_upper(r, |a, b| out[a * r + b])
    }
}

/// Dense constraint matrices with explicit right-hand sides.
#[derive(Debug, Clone)]
pub struct AffineSystem<T: Real> {
    pub matrices: Vec<HermitianMatrix<T>>,
    pub rhs: Vec<T>,
}

impl<T: Real> AffineSystem<T> {
    pub fn new(matrices: Vec<HermitianMatrix<T>>, rhs: Vec<T>) -> Result<Self> {
        if matrices.len() != rhs.len() {
            return Err(Error::DimensionMismatch { expected: matrices.len(), found: rhs.len() });
        }
        if let Some(first) = matrices.first() {
            if let Some(bad) = matrices.iter().find(|m| m.dim() != first.dim()) {
                return Err(Error::DimensionMismatch { expected: first.dim(), found: bad.dim() });
            }
        }
        Ok(Self { matrices, rhs })
    }
}

impl<T: Real> ConstraintSystem<T> for AffineSystem<T> {
    fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.dim())
    }

    fn count(&self) -> usize {
        self.matrices.len()
    }

    fn rhs(&self) -> &[T] {
        &self.rhs
    }

    fn evaluate(&self, m: &HermitianMatrix<T>) -> Vec<T> {
        self.matrices.iter().map(|a| a.inner(m)).collect()
    }

    fn adjoint(&self, y: &[T]) -> HermitianMatrix<T> {
        let mut out = HermitianMatrix::zeros(self.dim());
        for (a, &w) in self.matrices.iter().zip(y) {
            if !w.is_zero() {
                out.axpy(w, a);
            }
        }
        out
    }

    fn normal_matrix(&self) -> Vec<T> {
        let k = self.matrices.len();
        let mut g = vec![T::zero(); k * k];
        for i in 0..k {
            for j in i..k {
                let v = self.matrices[i].inner(&self.matrices[j]);
                g[i * k + j] = v;
                g[j * k + i] = v;
            }
        }
        g
    }

    fn compress(&self, l: usize, f: &CMatrix<T>) -> HermitianMatrix<T> {
        self.matrices[l].congruence(f)
    }
}

#[derive(Debug, Clone)]
pub struct RankReduction<T: Real> {
    pub matrix: HermitianMatrix<T>,
    /// Factor with `rank` columns, matrix = F F*.
    pub factor: CMatrix<T>,
    pub rank: usize,
    pub initial_rank: usize,
    pub steps: usize,
    /// ‖A(M) − b‖ after reduction.
    pub residual: T,
}

/// Reduces a feasible PSD `m` to a feasible PSD matrix of rank ≤ `target`.
///
/// Requires k ≤ target² + 2·target so that a nonzero direction exists at
/// every rank above the target.
pub fn rank_reduce<T: Real, S: ConstraintSystem<T>>(
    system: &S,
    m: &HermitianMatrix<T>,
    target: usize,
) -> Result<RankReduction<T>> {
    let k = system.count();
    if m.dim() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), found: m.dim() });
    }
    if k > target * target + 2 * target {
        return Err(Error::HypothesisViolated { constraints: k, target });
    }
    let b = system.rhs();
    let b_norm = norm(b);
    let tol = T::lit(RESIDUAL_TOLERANCE) * (T::one() + b_norm);
    let pre = residual(&system.evaluate(m), b);
    if pre > tol {
        return Err(Error::InvalidArgument(format!(
            "input is not feasible: residual {:.3e} exceeds {:.3e}",
            pre.to_f64_lossy(),
            tol.to_f64_lossy()
        )));
    }

    let eig = eig_hermitian(m)?;
    let scale = eig.values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    if eig.min() < -T::lit(1e-6) * scale {
        return Err(Error::NotPsd { min_eigenvalue: eig.min().to_f64_lossy() });
    }
    let cols: Vec<Vec<Cx<T>>> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(&l, _)| l > T::lit(FACTOR_DROP) * scale)
        .map(|(&l, v)| v.iter().map(|&z| z * l.sqrt()).collect())
        .collect();
    let mut f = CMatrix::from_columns(m.dim(), &cols);
    let initial_rank = f.cols();

    let mut steps = 0;
    while f.cols() > target {
        let r = f.cols();
        let delta = match null_direction(system, &f)? {
            Some(d) => d,
            None => return Err(Error::RankReductionStalled { rank: r, target }),
        };
        let de = eig_hermitian(&delta)?;
        let (dmax, dmin) = (de.max(), de.min());
        let t_plus = (dmin < T::zero()).then(|| -T::one() / dmin);
        let t_minus = (dmax > T::zero()).then(|| -T::one() / dmax);
        let t = match (t_plus, t_minus) {
            (Some(p), Some(q)) => {
                if p <= q.abs() {
                    p
                } else {
                    q
                }
            }
            (Some(p), None) => p,
            (None, Some(q)) => q,
            (None, None) => return Err(Error::RankReductionStalled { rank: r, target }),
        };
        // F ← F W diag(√(1 + tδ_i)) over the surviving eigenvalues
        let shifted: Vec<T> = de.values.iter().map(|&d| T::one() + t * d).collect();
        let top = shifted.iter().copied().fold(T::zero(), T::max);
        let mut next = Vec::new();
        for (s, w) in shifted.iter().zip(&de.vectors) {
            if *s > T::lit(FACTOR_DROP) * top {
                let col: Vec<Cx<T>> = (0..f.rows())
                    .map(|i| (0..r).map(|a| f.get(i, a) * w[a]).sum::<Cx<T>>() * s.sqrt())
                    .collect();
                next.push(col);
            }
        }
        if next.len() >= r {
            return Err(Error::RankReductionStalled { rank: r, target });
        }
        f = CMatrix::from_columns(f.rows(), &next);
        steps += 1;
    }

    let matrix = if steps == 0 { m.clone() } else { outer(&f, m.dim()) };
    let res = residual(&system.evaluate(&matrix), b);
    Ok(RankReduction { rank: f.cols(), factor: f, matrix, initial_rank, steps, residual: res })
}

fn outer<T: Real>(f: &CMatrix<T>, n: usize) -> HermitianMatrix<T> {
    HermitianMatrix::from_upper(n, |i, j| (0..f.cols()).map(|a| f.get(i, a) * f.get(j, a).conj()).sum())
}

/// A nonzero Hermitian Δ with tr(F*A_lF Δ) = 0 for every l, or None if the
/// compressed constraints span all of Herm(r).
fn null_direction<T: Real, S: ConstraintSystem<T>>(system: &S, f: &CMatrix<T>) -> Result<Option<HermitianMatrix<T>>> {
    let r = f.cols();
    let dim = r * r;
    let mut basis: Vec<Vec<T>> = Vec::new();
    for l in 0..system.count() {
        let c = system.compress(l, f);
        let mut row = vec![T::zero(); dim];
        let mut idx = 0;
        for i in 0..r {
            row[idx] = c.get(i, i).re;
            idx += 1;
            for j in i + 1..r {
                let z = c.get(i, j);
                row[idx] = T::lit(2.0) * z.re;
                row[idx + 1] = T::lit(2.0) * z.im;
                idx += 2;
            }
        }
        let before = norm(&row);
        if before.is_zero() {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d = dot(&row, q);
                row.iter_mut().zip(q).for_each(|(x, &qi)| *x -= d * qi);
            }
        }
        let after = norm(&row);
        if after > T::lit(NULL_TOLERANCE) * before {
            row.iter_mut().for_each(|x| *x /= after);
            basis.push(row);
        }
    }
    if basis.len() >= dim {
        return Ok(None);
    }
    // project the unit vector with the largest residual
    let mut best: Option<(T, Vec<T>)> = None;
    for e in 0..dim {
        let mut v = vec![T::zero(); dim];
        v[e] = T::one();
        for _ in 0..2 {
            for q in &basis {
                let d = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, &qi)| *x -= d * qi);
            }
        }
        let n = norm(&v);
        if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
            best = Some((n, v));
        }
    }
    let Some((n, v)) = best else { return Ok(None) };
    if n < T::lit(NULL_TOLERANCE) {
        return Ok(None);
    }
    let mut pos = vec![0usize; r * r];
    let mut idx = 0;
    for i in 0..r {
        pos[i * r + i] = idx;
        idx += 1;
        for j in i + 1..r {
            pos[i * r + j] = idx;
            idx += 2;
        }
    }
    Ok(Some(HermitianMatrix::from_upper(r, |i, j| {
        if i == j {
            cre(v[pos[i * r + i]])
        } else {
            let p = pos[i * r + j];
            cx(v[p], v[p + 1])
        }
    })))
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn residual<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}
