//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cre, Cx, Real};

use super::{CMatrix, HermitianMatrix};

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T: Real> {
    pub values: Vec<T>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<Cx<T>>>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn min(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    /// Σ λ_i v_i v_i*
    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        HermitianMatrix::from_outer_products(self.dim(), &self.vectors, Some(&self.values))
    }

    /// Σ f(λ_i) v_i v_i* over the pairs for which `f` returns `Some`.
    pub fn map_spectrum<F: Fn(T) -> Option<T>>(&self, f: F) -> HermitianMatrix<T> {
        let (vals, vecs): (Vec<T>, Vec<Vec<Cx<T>>>) = self
            .values
            .iter()
            .zip(&self.vectors)
            .filter_map(|(&l, v)| f(l).map(|w| (w, v.clone())))
            .unzip();
        HermitianMatrix::from_outer_products(self.dim(), &vecs, Some(&vals))
    }

    /// Eigenvectors as the columns of a unitary matrix.
    pub fn basis(&self) -> CMatrix<T> {
        CMatrix::from_columns(self.dim(), &self.vectors)
    }
}

/// Spectral decomposition by cyclic Jacobi rotations.
///
/// Entries below machine precision relative to ‖M‖_F are zeroed; sweeps
/// stop once the off-diagonal Frobenius mass is below n·ε_mach·‖M‖_F.
/// Fails after [`MAX_SWEEPS`] sweeps.
pub fn eig_hermitian<T: Real>(m: &HermitianMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = vec![Cx::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = Cx::one();
    }
    jacobi_in_place(n, &mut a, &mut v)?;
    Ok(collect(n, &a, &v))
}

/// Jacobi started in a previously computed eigenbasis `q` (unitary). When
/// `m` is close to a matrix diagonalized by `q`, only a sweep or two is
/// needed.
pub fn eig_hermitian_warm<T: Real>(
    m: &HermitianMatrix<T>,
    q: &CMatrix<T>,
) -> Result<SpectralDecomposition<T>> {
    let n = m.dim();
    if q.rows() != n || q.cols() != n {
        return eig_hermitian(m);
    }
    let rotated = m.congruence(q);
    let mut a = rotated.as_slice().to_vec();
    let mut v = vec![Cx::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = Cx::one();
    }
    jacobi_in_place(n, &mut a, &mut v)?;
    let w = CMatrix::from_vec(n, n, v);
    let qv = q.matmul(&w);
    let mut vflat = vec![Cx::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            vflat[i * n + j] = qv.get(i, j);
        }
    }
    Ok(collect(n, &a, &vflat))
}

fn collect<T: Real>(n: usize, a: &[Cx<T>], v: &[Cx<T>]) -> SpectralDecomposition<T> {
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the solver's order
    order.sort_by(|&i, &j| {
        a[j * n + j].re.partial_cmp(&a[i * n + i].re).unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|i| v[i * n + j]).collect()).collect();
    SpectralDecomposition { values, vectors }
}

fn jacobi_in_place<T: Real>(n: usize, a: &mut [Cx<T>], v: &mut [Cx<T>]) -> Result<()> {
    let fro2: T = a.iter().map(|c| c.norm_sqr()).sum();
    if fro2.is_zero() || n < 2 {
        return Ok(());
    }
    if !fro2.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let eps = T::epsilon();
    let negligible = eps * fro2.sqrt();
    let target = T::lit((n * n) as f64) * eps * eps * fro2;
    let hundred = T::lit(100.0);
    for sweep in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g <= negligible {
                    a[p * n + q] = Cx::zero();
                    a[q * n + p] = Cx::zero();
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                if sweep > 3 && app.abs() + hundred * g == app.abs() && aqq.abs() + hundred * g == aqq.abs() {
                    a[p * n + q] = Cx::zero();
                    a[q * n + p] = Cx::zero();
                    continue;
                }
                rotate(n, a, v, p, q, apq, g, app, aqq);
            }
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Applies J* A J and V J where J combines the phase diag(1, ē) with a real
/// Jacobi rotation, e = a_pq / |a_pq|.
#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate<T: Real>(
    n: usize,
    a: &mut [Cx<T>],
    v: &mut [Cx<T>],
    p: usize,
    q: usize,
    apq: Cx<T>,
    g: T,
    app: T,
    aqq: T,
) {
    let e = apq / cre(g);
    let ec = e.conj();
    let theta = (aqq - app) / (T::lit(2.0) * g);
    let t = {
        let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -t
        } else {
            t
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let (cc, sc) = (cre(c), cre(s));

    // columns: A ← A J
    for k in 0..n {
        let x = a[k * n + p];
        let y = a[k * n + q];
        a[k * n + p] = cc * x - sc * ec * y;
        a[k * n + q] = sc * x + cc * ec * y;
    }
    // rows: A ← J* A
    for k in 0..n {
        let x = a[p * n + k];
        let y = a[q * n + k];
        a[p * n + k] = cc * x - sc * e * y;
        a[q * n + k] = sc * x + cc * e * y;
    }
    a[p * n + q] = Cx::zero();
    a[q * n + p] = Cx::zero();
    a[p * n + p] = cre(a[p * n + p].re);
    a[q * n + q] = cre(a[q * n + q].re);
    for k in 0..n {
        let x = v[k * n + p];
        let y = v[k * n + q];
        v[k * n + p] = cc * x - sc * ec * y;
        v[k * n + q] = sc * x + cc * ec * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, seeded};
    use crate::scalar::cx;

    fn check_decomposition(m: &HermitianMatrix<f64>, eig: &SpectralDecomposition<f64>) {
        let n = m.dim();
        let scale = m.frobenius_norm().max(1.0);
        assert!(eig.reconstruct().sub(m).frobenius_norm() <= 1e-9 * scale);
        for i in 0..n {
            for j in 0..n {
                let ip: Cx<f64> = eig.vectors[i].iter().zip(&eig.vectors[j]).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - cre(expect)).norm() < 1e-10);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_is_sorted_descending() {
        let m = HermitianMatrix::<f64>::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let e = eig_hermitian(&m).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn rank_one_projector() {
        let c = vec![cx(0.6, 0.0), cx(0.0, 0.8), cre(0.0)];
        let e: SpectralDecomposition<f64> = eig_hermitian(&HermitianMatrix::rank_one(&c)).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.values[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn random_matrices_decompose() {
        let mut rng = seeded(7);
        for n in [1, 2, 5, 13, 30] {
            let m = random_hermitian::<f64, _>(&mut rng, n);
            let e = eig_hermitian(&m).unwrap();
            check_decomposition(&m, &e);
            assert!((m.trace() - e.values.iter().sum::<f64>()).abs() < 1e-9);
        }
    }

    #[test]
    fn warm_start_agrees_with_cold_start() {
        let mut rng = seeded(11);
        let m = random_hermitian::<f64, _>(&mut rng, 12);
        let cold = eig_hermitian(&m).unwrap();
        let mut m2 = m.clone();
        m2.axpy(1e-3, &random_hermitian(&mut rng, 12));
        let warm = eig_hermitian_warm(&m2, &cold.basis()).unwrap();
        check_decomposition(&m2, &warm);
        let fresh = eig_hermitian(&m2).unwrap();
        for (a, b) in warm.values.iter().zip(&fresh.values) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn single_precision() {
        let m = HermitianMatrix::<f32>::from_upper(3, |i, j| {
            if i == j { cre(2.0 + i as f32) } else { cx(0.5, 0.25) }
        });
        let e = eig_hermitian(&m).unwrap();
        let err = e.reconstruct().sub(&m).frobenius_norm();
        assert!(err < 1e-5, "{err}");
    }
}
