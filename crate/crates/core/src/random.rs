//! Seeded generators for random test instances. Everything is driven by a
//! `ChaCha8Rng`, so a seed fixes the instance across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMatrix, HermitianMatrix};
use crate::scalar::{cx, Cx, Real};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Approximately standard normal via Box–Muller.
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex<T: Real, R: Rng>(rng: &mut R) -> Cx<T> {
    cx(T::lit(normal(rng)), T::lit(normal(rng)))
}

pub fn random_vector<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<Cx<T>> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_real_vector<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<Cx<T>> {
    (0..n).map(|_| cx(T::lit(normal(rng)), T::zero())).collect()
}

/// Hermitian matrix with independent Gaussian entries in the upper triangle.
pub fn random_hermitian<T: Real, R: Rng>(rng: &mut R, n: usize) -> HermitianMatrix<T> {
    HermitianMatrix::from_upper(n, |_, _| random_complex(rng))
}

/// A A* for a Gaussian n×width matrix A (rank min(n, width) almost surely).
pub fn random_psd<T: Real, R: Rng>(rng: &mut R, n: usize, width: usize) -> HermitianMatrix<T> {
    let cols: Vec<Vec<Cx<T>>> = (0..width).map(|_| random_vector(rng, n)).collect();
    HermitianMatrix::from_outer_products(n, &cols, None)
}

/// Gaussian n×m complex matrix.
pub fn random_cmatrix<T: Real, R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| random_complex(rng)).collect())
}

/// G_v(M) for a random PSD M of rank ≤ `width` over the degree-d basis.
pub fn random_sos<T: Real, R: Rng>(
    rng: &mut R,
    flavor: crate::poly::Flavor,
    n: usize,
    d: usize,
    width: usize,
) -> crate::Result<(crate::poly::Polynomial<T>, crate::gram::SquareBasis)> {
    let basis = crate::gram::SquareBasis::new(flavor, n, d)?;
    let m = random_psd(rng, basis.len(), width);
    Ok((crate::gram::gram_map(&m, &basis)?, basis))
}
