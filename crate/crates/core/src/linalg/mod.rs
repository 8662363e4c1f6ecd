//! Dense Hermitian matrices, their spectral decomposition, Schatten norms and
//! the low-rank truncation used to shorten sums of squares.

mod dense;
mod jacobi;
mod spectral;

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cre, cx, Cx, Real};

pub use dense::{CMatrix, Cholesky};
pub use jacobi::{eig_hermitian, eig_hermitian_warm, SpectralDecomposition, MAX_SWEEPS};
pub use spectral::{
    low_rank_factor, psd_check, schatten_norm, schatten_norm_of_spectrum, strict_cap, truncate_rank,
    Schatten, Truncation, PSD_CLIP_RELATIVE,
};

/// Square matrix equal to its conjugate transpose.
///
/// Entries are stored densely; every constructor writes the lower triangle
/// as the conjugate of the upper one and forces a real diagonal, so M = M*
/// holds exactly.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    n: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Cx::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Cx::one();
        }
        m
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = cre(d);
        }
        m
    }

    /// Builds the matrix from its upper triangle `f(i, j)` with `i <= j`.
    pub fn from_upper<F: FnMut(usize, usize) -> Cx<T>>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = cre(f(i, i).re);
            for j in i + 1..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v.conj();
            }
        }
        m
    }

    /// Accepts a full row-major matrix that is Hermitian within `tol`
    /// (relative to its largest entry) and symmetrizes it.
    pub fn from_full(n: usize, data: &[Cx<T>], tol: T) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        let scale = data.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let mut defect = T::zero();
        for i in 0..n {
            for j in i..n {
                defect = defect.max((data[i * n + j] - data[j * n + i].conj()).norm());
            }
        }
        if defect > tol * (T::one() + scale) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (defect {defect})"
            )));
        }
        let half = T::lit(0.5);
        Ok(Self::from_upper(n, |i, j| (data[i * n + j] + data[j * n + i].conj()) * half))
    }

    /// c c* for a column vector c.
    pub fn rank_one(c: &[Cx<T>]) -> Self {
        Self::from_upper(c.len(), |i, j| c[i] * c[j].conj())
    }

    /// Σ_i w_i c_i c_i*
    pub fn from_outer_products(n: usize, vecs: &[Vec<Cx<T>>], weights: Option<&[T]>) -> Self {
        let mut m = Self::zeros(n);
        for (idx, c) in vecs.iter().enumerate() {
            let w = weights.map_or(T::one(), |w| w[idx]);
            for i in 0..n {
                let ci = c[i] * cre(w);
                for j in i..n {
                    m.data[i * n + j] += ci * c[j].conj();
                }
            }
        }
        m.mirror_upper();
        m
    }

    pub(crate) fn mirror_upper(&mut self) {
        let n = self.n;
        for i in 0..n {
            let d = self.data[i * n + i].re;
            self.data[i * n + i] = cre(d);
            for j in i + 1..n {
                self.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[i * self.n + j]
    }

    /// Sets entry (i, j) and its mirror (j, i). Diagonal entries keep only
    /// the real part.
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        let n = self.n;
        if i == j {
            self.data[i * n + i] = cre(v.re);
        } else {
            self.data[i * n + j] = v;
            self.data[j * n + i] = v.conj();
        }
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    /// Real inner product ⟨A, B⟩ = Re tr(A* B) = tr(A B) for Hermitian A, B.
    pub fn inner(&self, other: &Self) -> T {
        debug_assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_entry(&self) -> T {
        self.data.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| a * cre(s)).collect() }
    }

    /// self += s · other
    pub fn axpy(&mut self, s: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * cre(s);
        }
    }

    fn zip_with<F: Fn(Cx<T>, Cx<T>) -> Cx<T>>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.n, other.n, "Hermitian matrix dimension mismatch");
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .fold(Cx::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// v* M v (real for Hermitian M).
    pub fn quadratic_form(&self, v: &[Cx<T>]) -> T {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_cmatrix(&self) -> CMatrix<T> {
        CMatrix::from_vec(self.n, self.n, self.data.clone())
    }

    /// Congruence F* M F for an n×r matrix F.
    pub fn congruence(&self, f: &CMatrix<T>) -> Self {
        let mf = self.to_cmatrix().matmul(f);
        let r = f.cols();
        let prod = f.adjoint().matmul(&mf);
        Self::from_upper(r, |i, j| prod.get(i, j))
    }

    pub fn to_doc(&self) -> MatrixDoc {
        let n = self.n;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                if !v.is_zero() {
                    entries.push((i, j, v.re.to_f64_lossy(), v.im.to_f64_lossy()));
                }
            }
        }
        MatrixDoc { dim: n, entries }
    }

    pub fn from_doc(doc: &MatrixDoc) -> Result<Self> {
        let mut m = Self::zeros(doc.dim);
        for &(i, j, re, im) in &doc.entries {
            if i >= doc.dim || j >= doc.dim {
                return Err(Error::Parse(format!("entry ({i}, {j}) outside a {0}x{0} matrix", doc.dim)));
            }
            let v = cx(T::lit(re), T::lit(im));
            if i <= j {
                m.set(i, j, v);
            } else {
                m.set(j, i, v.conj());
            }
        }
        Ok(m)
    }
}

/// Coordinate form shared by every matrix in the JSON outputs: upper
/// triangle entries `[row, col, re, im]`, zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl<T: Real> fmt::Debug for HermitianMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                write!(f, " {:>10.4}{:+.4}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_keep_hermitian_symmetry() {
        let m = HermitianMatrix::<f64>::from_upper(3, |i, j| cx((i + j) as f64, (j as f64) - (i as f64)));
        for i in 0..3 {
            assert_eq!(m.get(i, i).im, 0.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i).conj());
            }
        }
    }

    #[test]
    fn from_full_rejects_non_hermitian() {
        let data = vec![cre(1.0), cre(2.0), cre(0.0), cre(1.0)];
        assert!(HermitianMatrix::from_full(2, &data, 1e-12).is_err());
        let ok = vec![cre(1.0), cx(2.0, 1.0), cx(2.0, -1.0), cre(1.0)];
        assert!(HermitianMatrix::from_full(2, &ok, 1e-12).is_ok());
    }

    #[test]
    fn inner_product_is_trace_of_product() {
        let a = HermitianMatrix::<f64>::from_upper(2, |i, j| if i == j { cre(1.0 + i as f64) } else { cx(0.5, -0.25) });
        let b = HermitianMatrix::<f64>::from_upper(2, |i, j| if i == j { cre(3.0) } else { cx(-1.0, 2.0) });
        let ab = a.to_cmatrix().matmul(&b.to_cmatrix());
        let tr = ab.get(0, 0) + ab.get(1, 1);
        assert!((a.inner(&b) - tr.re).abs() < 1e-14);
        assert!(tr.im.abs() < 1e-14);
    }

    #[test]
    fn doc_round_trip() {
        let m = HermitianMatrix::<f64>::from_upper(3, |i, j| cx(i as f64 + 0.5, j as f64 * 0.25));
        assert_eq!(HermitianMatrix::from_doc(&m.to_doc()).unwrap(), m);
    }
}
