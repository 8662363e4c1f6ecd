use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{monomials_of_degree, words_of_length, Flavor, Term};

/// Default cap on the number of basis elements.
pub const DEFAULT_BASIS_CAP: usize = 100_000;

/// Ordered basis v = (v₁, …, v_m) of the homogeneous degree-d component:
/// all monomials of degree d, or all words of length d, in term order.
///
/// Every element may carry a common positive scale factor (v_i = c·term_i);
/// the plain basis has scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareBasis {
    flavor: Flavor,
    n_vars: usize,
    degree: usize,
    scale: f64,
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
}

impl SquareBasis {
    pub fn new(flavor: Flavor, n_vars: usize, degree: usize) -> Result<Self> {
        Self::with_cap(flavor, n_vars, degree, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(flavor: Flavor, n_vars: usize, degree: usize, cap: usize) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidArgument("a basis needs at least one variable".into()));
        }
        let size = basis_size(flavor, n_vars, degree);
        if size.map_or(true, |s| s > cap as u128) {
            return Err(Error::BasisTooLarge { size: size.unwrap_or(u128::MAX), cap });
        }
        let terms = match flavor {
            Flavor::Commutative => monomials_of_degree(n_vars, degree),
            Flavor::Free => words_of_length(n_vars, degree),
        };
        let index = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(Self { flavor, n_vars, degree, scale: 1.0, terms, index })
    }

    /// The same basis with every element multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("basis scale must be positive, got {factor}")));
        }
        self.scale *= factor;
        Ok(self)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn position(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// v_i* v_j as a bare term (the scale factor is not included).
    pub fn product_term(&self, i: usize, j: usize) -> Term {
        self.terms[i].involution().mul(&self.terms[j]).expect("same flavor")
    }

    /// dim V*V, the number of degree-2d terms.
    pub fn product_dim(&self) -> u128 {
        basis_size(self.flavor, self.n_vars, 2 * self.degree).unwrap_or(u128::MAX)
    }

    pub fn describe(&self) -> BasisDoc {
        BasisDoc {
            flavor: self.flavor,
            n_vars: self.n_vars,
            degree: self.degree,
            scale: self.scale,
            terms: self.terms.iter().map(crate::poly::TermRepr::from_term).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDoc {
    pub flavor: Flavor,
    pub n_vars: usize,
    pub degree: usize,
    pub scale: f64,
    pub terms: Vec<crate::poly::TermRepr>,
}

/// C(d+n−1, n−1) for monomials, n^d for words; `None` on overflow.
pub fn basis_size(flavor: Flavor, n_vars: usize, degree: usize) -> Option<u128> {
    match flavor {
        Flavor::Commutative => binomial((degree + n_vars).checked_sub(1)? as u128, (n_vars - 1) as u128),
        Flavor::Free => (n_vars as u128).checked_pow(u32::try_from(degree).ok()?),
    }
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(SquareBasis::new(Flavor::Commutative, 3, 2).unwrap().len(), 6);
        assert_eq!(SquareBasis::new(Flavor::Free, 2, 3).unwrap().len(), 8);
        let b = SquareBasis::new(Flavor::Commutative, 3, 1).unwrap();
        let shown: Vec<String> = b.terms().iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["x1", "x2", "x3"]);
        assert_eq!(SquareBasis::new(Flavor::Commutative, 3, 0).unwrap().len(), 1);
    }

    #[test]
    fn product_dimensions() {
        assert_eq!(SquareBasis::new(Flavor::Commutative, 3, 2).unwrap().product_dim(), 15);
        assert_eq!(SquareBasis::new(Flavor::Free, 2, 3).unwrap().product_dim(), 64);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            SquareBasis::new(Flavor::Free, 10, 6),
            Err(Error::BasisTooLarge { size: 1_000_000, .. })
        ));
        assert!(SquareBasis::with_cap(Flavor::Commutative, 3, 4, 10).is_err());
        assert!(matches!(
            SquareBasis::new(Flavor::Free, 1000, 100),
            Err(Error::BasisTooLarge { .. })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), Some(15));
        assert_eq!(binomial(42, 2), Some(861));
        assert_eq!(binomial(5, 7), Some(0));
        assert_eq!(binomial(0, 0), Some(1));
    }
}
