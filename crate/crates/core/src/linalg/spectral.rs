//! Schatten norms and spectral truncation of PSD matrices.

use crate::error::{Error, Result};
use crate::scalar::{cre, Cx, Real};

use super::{eig_hermitian, HermitianMatrix, SpectralDecomposition};

/// Eigenvalues below −PSD_CLIP_RELATIVE·‖M‖_∞ mean the matrix is genuinely
/// indefinite; anything above is clipped to zero.
pub const PSD_CLIP_RELATIVE: f64 = 1e-6;

/// Relative eigenvalue cutoff for the numerical rank of a factorization.
const FACTOR_CUTOFF: f64 = 1e-10;

const SNAP_RELATIVE: f64 = 1e-12;

/// Schatten exponent p ∈ (1, ∞].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schatten<T> {
    P(T),
    Infinity,
}

impl<T: Real> Schatten<T> {
    pub fn validate(self) -> Result<Self> {
        match self {
            Schatten::P(p) if !(p > T::one()) || !p.is_finite() => Err(Error::InvalidArgument(
                format!("Schatten exponent must lie in (1, inf], got {p}"),
            )),
            other => Ok(other),
        }
    }

    /// p / (p − 1), with ∞/(∞ − 1) = 1.
    pub fn conjugate_exponent(self) -> T {
        match self {
            Schatten::P(p) => p / (p - T::one()),
            Schatten::Infinity => T::one(),
        }
    }
}

/// (Σ |λ_i|^p)^{1/p} or max |λ_i|, computed with scaling so large p does not overflow.
pub fn schatten_norm_of_spectrum<T: Real>(values: &[T], p: Schatten<T>) -> T {
    let top = values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    match p {
        Schatten::Infinity => top,
        Schatten::P(p) => {
            if top == T::zero() {
                return T::zero();
            }
            let s: T = values.iter().map(|v| (v.abs() / top).powf(p)).sum();
            top * s.powf(T::one() / p)
        }
    }
}

pub fn schatten_norm<T: Real>(m: &HermitianMatrix<T>, p: Schatten<T>) -> Result<T> {
    let p = p.validate()?;
    let eig = eig_hermitian(m)?;
    Ok(schatten_norm_of_spectrum(&eig.values, p))
}

/// Eigendecomposition with tiny negative eigenvalues clipped to zero.
/// Fails with [`Error::NotPsd`] when some eigenvalue is below
/// −[`PSD_CLIP_RELATIVE`]·‖M‖_∞.
pub fn psd_check<T: Real>(m: &HermitianMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let mut eig = eig_hermitian(m)?;
    let scale = eig.values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let min = eig.min();
    if min < -T::lit(PSD_CLIP_RELATIVE) * scale {
        return Err(Error::NotPsd { min_eigenvalue: min.to_f64_lossy() });
    }
    eig.values.iter_mut().for_each(|v| *v = v.max(T::zero()));
    Ok(eig)
}

/// Result of [`truncate_rank`].
#[derive(Debug, Clone)]
pub struct Truncation<T: Real> {
    /// M' = Σ_{i≤k} λ_i v_i v_i*.
    pub matrix: HermitianMatrix<T>,
    /// The truncation index k chosen by the rule for the given exponent.
    pub kept: usize,
    /// Number of strictly positive eigenvalues among the kept ones, rank(M').
    pub rank: usize,
    /// ‖M − M'‖_p.
    pub error: T,
    /// (tr M/ε)^{p/(p−1)}; the rank is strictly below this. May be +∞ when
    /// the bound exceeds every representable value.
    pub rank_bound: T,
    /// Clipped spectrum of M.
    pub spectrum: SpectralDecomposition<T>,
}

impl<T: Real> Truncation<T> {
    /// Kept eigenpairs (λ_i, v_i) with λ_i > 0.
    pub fn kept_pairs(&self) -> impl Iterator<Item = (T, &Vec<Cx<T>>)> {
        self.spectrum
            .values
            .iter()
            .zip(&self.spectrum.vectors)
            .take(self.kept)
            .filter(|(l, _)| **l > T::zero())
            .map(|(l, v)| (*l, v))
    }
}

/// Truncation index for the Schatten-p rule: the integer k with
/// k < (tr/ε)^{p/(p−1)} ≤ k + 1, capped at `dim`. The power is taken in
/// the log domain.
pub(crate) fn truncation_index<T: Real>(trace: T, eps: T, p: T, dim: usize) -> (usize, T) {
    if trace <= T::zero() {
        return (0, T::zero());
    }
    let q = p / (p - T::one());
    let log_bound = q * (trace.ln() - eps.ln());
    let bound = log_bound.exp();
    if !bound.is_finite() || log_bound > T::lit(dim as f64 + 1.0).ln() {
        return (dim, bound);
    }
    // snap bounds within rounding of an integer, so e.g. (tr/(0.1 tr))^2
    // is treated as exactly 100
    let nearest = bound.round();
    let bound = if (bound - nearest).abs() <= T::lit(SNAP_RELATIVE) * bound { nearest } else { bound };
    let k = bound.ceil().to_f64_lossy() as usize;
    (k.saturating_sub(1).min(dim), bound)
}

/// Largest integer strictly below `bound` (0 for bounds ≤ 1). Bounds within
/// rounding of an integer are treated as that integer.
pub fn strict_cap<T: Real>(bound: T) -> usize {
    if !(bound > T::one()) {
        return 0;
    }
    if !bound.is_finite() || bound.to_f64_lossy() >= usize::MAX as f64 {
        return usize::MAX;
    }
    let nearest = bound.round();
    let b = if (bound - nearest).abs() <= T::lit(SNAP_RELATIVE) * bound { nearest } else { bound };
    (b.ceil().to_f64_lossy() as usize).saturating_sub(1)
}

/// Low-rank PSD approximation with ‖M − M'‖_p ≤ ε.
///
/// For finite p the kept count is the integer k with
/// k < (tr M/ε)^{p/(p−1)} ≤ k + 1; for p = ∞ it is the number of
/// eigenvalues exceeding ε. Either way rank(M') is strictly below
/// `rank_bound` and the error is read off the discarded tail of the spectrum.
pub fn truncate_rank<T: Real>(m: &HermitianMatrix<T>, eps: T, p: Schatten<T>) -> Result<Truncation<T>> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let p = p.validate()?;
    let spectrum = psd_check(m)?;
    let n = spectrum.dim();
    let trace = m.trace();
    let (kept, rank_bound) = match p {
        Schatten::Infinity => {
            let above = spectrum.values.iter().take_while(|&&l| l > eps).count();
            (above.min(strict_cap(trace / eps)), trace / eps)
        }
        Schatten::P(pp) => truncation_index(trace, eps, pp, n),
    };
    let error = schatten_norm_of_spectrum(&spectrum.values[kept.min(n)..], p);
    let kept_vals: Vec<T> = spectrum.values[..kept].to_vec();
    let kept_vecs: Vec<Vec<Cx<T>>> = spectrum.vectors[..kept].to_vec();
    let matrix = HermitianMatrix::from_outer_products(n, &kept_vecs, Some(&kept_vals));
    let rank = kept_vals.iter().filter(|&&l| l > T::zero()).count();
    Ok(Truncation { matrix, kept, rank, error, rank_bound, spectrum })
}

/// Vectors c_i = √λ_i v_i with Σ c_i c_i* = M, one per eigenvalue above
/// 1e−10·λ₁.
pub fn low_rank_factor<T: Real>(m: &HermitianMatrix<T>) -> Result<Vec<Vec<Cx<T>>>> {
    let eig = psd_check(m)?;
    Ok(factor_from_spectrum(&eig))
}

pub(crate) fn factor_from_spectrum<T: Real>(eig: &SpectralDecomposition<T>) -> Vec<Vec<Cx<T>>> {
    let cutoff = T::lit(FACTOR_CUTOFF) * eig.max();
    eig.values
        .iter()
        .zip(&eig.vectors)
        .filter(|(&l, _)| l > cutoff && l > T::zero())
        .map(|(&l, v)| {
            let s = cre(l.sqrt());
            v.iter().map(|&x| x * s).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_psd, seeded};
    use crate::scalar::cx;

    fn diag(v: &[f64]) -> HermitianMatrix<f64> {
        HermitianMatrix::from_real_diagonal(v)
    }

    #[test]
    fn schatten_examples() {
        let m = diag(&[3.0, 4.0]);
        assert!((schatten_norm(&m, Schatten::P(2.0)).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(schatten_norm(&m, Schatten::Infinity).unwrap(), 4.0);
        let id = diag(&[1.0; 4]);
        assert!((schatten_norm(&id, Schatten::P(4.0)).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!(schatten_norm(&m, Schatten::P(1.0)).is_err());
        assert!(schatten_norm(&m, Schatten::P(0.5)).is_err());
    }

    #[test]
    fn infinity_truncation_example() {
        let t = truncate_rank(&diag(&[4.0, 1.0, 0.5]), 1.0, Schatten::Infinity).unwrap();
        assert_eq!(t.rank, 1);
        assert_eq!(t.error, 1.0);
        assert_eq!(t.rank_bound, 5.5);
        assert!(t.matrix.sub(&diag(&[4.0, 0.0, 0.0])).max_abs_entry() < 1e-15);
    }

    #[test]
    fn rank_one_input() {
        let c = vec![cx(1.0, 1.0), cre(2.0)];
        let m = HermitianMatrix::rank_one(&c);
        let lam = 6.0;
        for p in [Schatten::P(2.0), Schatten::P(3.0), Schatten::Infinity] {
            for eps in [0.1, 1.0, 5.9, 6.5, 100.0] {
                let t = truncate_rank(&m, eps, p).unwrap();
                assert!(t.error <= eps * (1.0 + 1e-12));
                if eps < lam && t.rank == 1 {
                    assert!(t.matrix.sub(&m).max_abs_entry() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn schatten_two_rank_is_below_one_hundred() {
        let mut rng = seeded(3);
        for n in [5, 40, 150] {
            let m = random_psd::<f64, _>(&mut rng, n, n);
            let eps = 0.1 * m.trace();
            let t = truncate_rank(&m, eps, Schatten::P(2.0)).unwrap();
            assert!(t.rank < 100);
            assert!(t.error <= eps * (1.0 + 1e-10));
        }
    }

    #[test]
    fn eckart_young_tail() {
        let m = diag(&[5.0, 3.0, 2.0, 1.0, 0.5]);
        let t = truncate_rank(&m, 2.5, Schatten::P(2.0)).unwrap();
        // (13.5/2.5)^2 = 29.16 -> keep everything
        assert_eq!(t.kept, 5);
        let t = truncate_rank(&m, 10.0, Schatten::P(2.0)).unwrap();
        // (1.35)^2 = 1.8225 -> k = 1
        assert_eq!(t.kept, 1);
        let tail: f64 = [3.0f64, 2.0, 1.0, 0.5].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((t.error - tail).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(truncate_rank(&diag(&[1.0]), 0.0, Schatten::Infinity).is_err());
        assert!(truncate_rank(&diag(&[1.0]), -1.0, Schatten::Infinity).is_err());
        assert!(matches!(
            truncate_rank(&diag(&[1.0, -0.5]), 0.1, Schatten::Infinity),
            Err(Error::NotPsd { .. })
        ));
        // solver noise is clipped
        assert!(truncate_rank(&diag(&[1.0, -1e-9]), 0.1, Schatten::Infinity).is_ok());
    }

    #[test]
    fn factor_examples() {
        let f = low_rank_factor(&HermitianMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.len(), 3);
        for c in &f {
            assert!((c.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
        }
        let f = low_rank_factor(&diag(&[4.0, 0.0])).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0][0].norm() - 2.0).abs() < 1e-14 && f[0][1].norm() == 0.0);
    }

    #[test]
    fn factor_of_width_two_product() {
        let mut rng = seeded(5);
        let m = random_psd::<f64, _>(&mut rng, 7, 2);
        let f = low_rank_factor(&m).unwrap();
        assert_eq!(f.len(), 2);
        let back = HermitianMatrix::from_outer_products(7, &f, None);
        assert!(back.sub(&m).frobenius_norm() <= 1e-8 * m.frobenius_norm().max(1.0));
    }
}
