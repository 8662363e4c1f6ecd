//! Gram map G_v(M) = Σ m_ij v_i* v_j over monomial and word bases, its
//! constraint-matrix form, and the exact inverse in the free algebra.

mod basis;
mod constraints;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, Schatten};
use crate::poly::{Flavor, Polynomial, Term};
use crate::scalar::{cre, Real};

pub use basis::{basis_size, binomial, BasisDoc, SquareBasis, DEFAULT_BASIS_CAP};
pub use constraints::{
    build_constraints, ConstraintDoc, ConstraintsDoc, ElementDoc, ElementKind, GramConstraints,
    ProductElement, SparseHermitian, HERMITIAN_TOLERANCE,
};

/// Norms on polynomials for which the Gram map has a known operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolyNorm {
    /// Euclidean norm of the coefficient vector.
    #[serde(rename = "coeff-2-norm")]
    CoefficientTwo,
    /// max over the real unit sphere of |p(s)|.
    #[serde(rename = "sup-sphere")]
    SupSphere,
    /// Free algebra only: ‖p‖ := ‖G⁻¹(p)‖_p for the chosen Schatten exponent.
    #[serde(rename = "inherited-schatten")]
    InheritedSchatten,
}

/// G_v(M) = Σ_{ij} m_ij v_i* v_j.
pub fn gram_map<T: Real>(m: &HermitianMatrix<T>, basis: &SquareBasis) -> Result<Polynomial<T>> {
    let n = basis.len();
    if m.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
    }
    let s2 = cre(T::lit(basis.scale() * basis.scale()));
    let terms = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (basis.product_term(i, j), m.get(i, j) * s2));
    Polynomial::from_terms(basis.flavor(), basis.n_vars(), terms)
}

/// The unique M with G(M) = p over the words of length d: M[ν, μ] is the
/// coefficient of ν*μ, found by splitting each word of length 2d in the middle.
pub fn gram_preimage_free<T: Real>(p: &Polynomial<T>, d: usize) -> Result<HermitianMatrix<T>> {
    if p.flavor() != Flavor::Free {
        return Err(Error::FlavorMismatch { expected: Flavor::Free, found: p.flavor() });
    }
    p.check_homogeneous(2 * d)?;
    p.check_hermitian(T::lit(HERMITIAN_TOLERANCE))?;
    let basis = SquareBasis::new(Flavor::Free, p.n_vars(), d)?;
    let n = basis.len();
    let mut data = vec![num_traits::Zero::zero(); n * n];
    for (t, c) in p.iter() {
        let Term::Word(w) = t else { unreachable!("free polynomial") };
        let left = Term::Word(w[..d].iter().rev().copied().collect());
        let right = Term::Word(w[d..].to_vec());
        let i = basis.position(&left).expect("word of length d");
        let j = basis.position(&right).expect("word of length d");
        data[i * n + j] = *c;
    }
    // p* = p makes data Hermitian up to the tolerance just checked
    HermitianMatrix::from_full(n, &data, T::lit(1e-9))
}

/// Certified value of ‖G_v‖_{p→(V*V, norm)}.
///
/// Only two families are certified, both with value 1: monomial bases under
/// the sup-norm on the sphere (any p, since ‖·‖_∞ is the smallest Schatten
/// norm), and word bases under the coefficient 2-norm (p ≤ 2) or the
/// inherited Schatten norm (any p). Everything else, including rescaled
/// bases, is rejected.
pub fn operator_norm_bound<T: Real>(basis: &SquareBasis, norm: PolyNorm, p: Schatten<T>) -> Result<T> {
    let p = p.validate()?;
    if basis.scale() != 1.0 {
        return Err(Error::NoCertifiedBound(format!(
            "basis rescaled by {} is not a certified case",
            basis.scale()
        )));
    }
    match (basis.flavor(), norm) {
        (Flavor::Commutative, PolyNorm::SupSphere) => Ok(T::one()),
        (Flavor::Free, PolyNorm::InheritedSchatten) => Ok(T::one()),
        (Flavor::Free, PolyNorm::CoefficientTwo) => match p {
            Schatten::P(q) if q <= T::lit(2.0) => Ok(T::one()),
            _ => Err(Error::NoCertifiedBound(
                "coefficient 2-norm is certified for Schatten exponents p <= 2 only".into(),
            )),
        },
        (flavor, norm) => Err(Error::NoCertifiedBound(format!(
            "{norm:?} on a {flavor:?} basis has no certified operator norm"
        ))),
    }
}
