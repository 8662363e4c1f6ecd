//! Sparse polynomials with complex coefficients in a commutative or a free
//! *-algebra, together with the coefficient and sphere norms.

mod json;
mod sphere;
mod term;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cre, Cx, Real};

pub use json::{PolynomialDoc, TermDoc, TermRepr};
pub use sphere::{sphere_sample, SpherePoint};
pub use term::{monomials_of_degree, words_of_length, Flavor, Term};

/// Coefficients with modulus below this are dropped after arithmetic.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Sparse polynomial in canonical form: no stored coefficient is below
/// [`DROP_TOLERANCE`] and every term matches the flavor and arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Real> {
    flavor: Flavor,
    n_vars: usize,
    terms: BTreeMap<Term, Cx<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(flavor: Flavor, n_vars: usize) -> Self {
        Self { flavor, n_vars, terms: BTreeMap::new() }
    }

    /// Builds a polynomial from `(term, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(flavor: Flavor, n_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Term, Cx<T>)>,
    {
        let mut p = Self::zero(flavor, n_vars);
        for (t, c) in terms {
            p.check_term(&t)?;
            p.accumulate(t, c);
        }
        p.prune();
        Ok(p)
    }

    pub fn term(flavor: Flavor, n_vars: usize, term: Term, coeff: Cx<T>) -> Result<Self> {
        Self::from_terms(flavor, n_vars, [(term, coeff)])
    }

    /// The variable x_i (commutative) or z_i (free), zero-based index.
    pub fn variable(flavor: Flavor, n_vars: usize, i: usize) -> Result<Self> {
        if i >= n_vars {
            return Err(Error::InvalidArgument(format!(
                "variable index {i} out of range for {n_vars} variables"
            )));
        }
        let t = match flavor {
            Flavor::Commutative => {
                let mut e = vec![0; n_vars];
                e[i] = 1;
                Term::Monomial(e)
            }
            Flavor::Free => Term::Word(vec![i as u32]),
        };
        Self::term(flavor, n_vars, t, Cx::one())
    }

    /// p_{n,d} = Σ_{|α|=d} x^{2α}, the squared norm of the degree-d monomial tuple.
    pub fn sum_of_monomial_squares(n_vars: usize, d: usize) -> Self {
        let terms = monomials_of_degree(n_vars, d).into_iter().map(|t| {
            let sq = t.mul(&t).expect("same arity");
            (sq, Cx::one())
        });
        Self::from_terms(Flavor::Commutative, n_vars, terms).expect("valid monomials")
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: &Term) -> Cx<T> {
        self.terms.get(t).copied().unwrap_or_else(Cx::zero)
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Cx<T>)> {
        self.terms.iter()
    }

    /// Largest term degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Term::degree).max()
    }

    /// `Ok(())` when every term has degree `d` (the zero polynomial always passes).
    pub fn check_homogeneous(&self, d: usize) -> Result<()> {
        match self.terms.keys().map(Term::degree).find(|&k| k != d) {
            Some(found) => Err(Error::NotHomogeneous { expected: d, found }),
            None => Ok(()),
        }
    }

    /// Largest coefficient modulus of p − p*.
    pub fn hermitian_defect(&self) -> T {
        let star = self.involution();
        self.checked_sub(&star)
            .map(|d| d.terms.values().map(|c| c.norm()).fold(T::zero(), T::max))
            .unwrap_or_else(|_| T::infinity())
    }

    pub fn check_hermitian(&self, tol: T) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > tol * (T::one() + self.coeff_two_norm()) {
            Err(Error::NotHermitian { defect: defect.to_f64_lossy() })
        } else {
            Ok(())
        }
    }

    fn check_term(&self, t: &Term) -> Result<()> {
        if t.flavor() != self.flavor {
            return Err(Error::FlavorMismatch { expected: self.flavor, found: t.flavor() });
        }
        let ok = match t {
            Term::Monomial(e) => e.len() == self.n_vars,
            Term::Word(w) => w.iter().all(|&z| (z as usize) < self.n_vars),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::VariableCountMismatch { left: self.n_vars, right: t.arity_hint() })
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch { expected: self.flavor, found: other.flavor });
        }
        if self.n_vars != other.n_vars {
            return Err(Error::VariableCountMismatch { left: self.n_vars, right: other.n_vars });
        }
        Ok(())
    }

    fn accumulate(&mut self, t: Term, c: Cx<T>) {
        *self.terms.entry(t).or_insert_with(Cx::zero) += c;
    }

    fn prune(&mut self) {
        let tol = T::lit(DROP_TOLERANCE);
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.accumulate(t.clone(), *c);
        }
        out.prune();
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.accumulate(t.clone(), -*c);
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        let mut out = Self::zero(self.flavor, self.n_vars);
        out.terms = self.terms.iter().map(|(t, c)| (t.clone(), *c * s)).collect();
        out.prune();
        out
    }

    /// Coefficient convolution: words concatenate, exponents add.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.flavor, self.n_vars);
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                let t = ta.mul(tb).expect("compatible terms");
                out.accumulate(t, *ca * *cb);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Conjugates coefficients and reverses words.
    pub fn involution(&self) -> Self {
        let mut out = Self::zero(self.flavor, self.n_vars);
        out.terms = self.terms.iter().map(|(t, c)| (t.involution(), c.conj())).collect();
        out
    }

    /// (Σ |p_ω|²)^{1/2}
    pub fn coeff_two_norm(&self) -> T {
        self.terms.values().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    /// Commutative image: each word becomes its exponent vector.
    pub fn collapse(&self) -> Result<Self> {
        if self.flavor != Flavor::Free {
            return Err(Error::FlavorMismatch { expected: Flavor::Free, found: self.flavor });
        }
        let terms = self.terms.iter().map(|(t, c)| (t.collapse(self.n_vars), *c));
        Self::from_terms(Flavor::Commutative, self.n_vars, terms)
    }

    /// Substitutes real coordinates into a commutative polynomial.
    pub fn evaluate(&self, s: &SpherePoint<T>) -> Result<Cx<T>> {
        self.evaluate_at(s.coords())
    }

    /// Like [`evaluate`](Self::evaluate) but at an arbitrary real point.
    pub fn evaluate_at(&self, x: &[T]) -> Result<Cx<T>> {
        if self.flavor != Flavor::Commutative {
            return Err(Error::FlavorMismatch { expected: Flavor::Commutative, found: self.flavor });
        }
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
        }
        let mut acc = Cx::zero();
        for (t, c) in &self.terms {
            if let Term::Monomial(e) = t {
                let v = e
                    .iter()
                    .zip(x)
                    .fold(T::one(), |m, (&k, &xi)| m * xi.powi(k as i32));
                acc += *c * cre(v);
            }
        }
        Ok(acc)
    }

    /// Value and gradient with respect to the real coordinates.
    pub(crate) fn value_and_gradient(&self, x: &[T]) -> (Cx<T>, Vec<Cx<T>>) {
        let n = self.n_vars;
        let mut val = Cx::zero();
        let mut grad = vec![Cx::zero(); n];
        for (t, c) in &self.terms {
            let Term::Monomial(e) = t else { continue };
            let m = e.iter().zip(x).fold(T::one(), |m, (&k, &xi)| m * xi.powi(k as i32));
            val += *c * cre(m);
            for i in 0..n {
                if e[i] == 0 {
                    continue;
                }
                let k = e[i] as i32;
                let rest = e
                    .iter()
                    .zip(x)
                    .enumerate()
                    .fold(T::one(), |m, (j, (&kj, &xj))| {
                        if j == i {
                            m * T::lit(k as f64) * xj.powi(k - 1)
                        } else {
                            m * xj.powi(kj as i32)
                        }
                    });
                grad[i] += *c * cre(rest);
            }
        }
        (val, grad)
    }
}

impl<T: Real> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        self.checked_add(rhs).expect("polynomial addition")
    }
}

impl<T: Real> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        self.checked_sub(rhs).expect("polynomial subtraction")
    }
}

impl<T: Real> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        self.multiply(rhs).expect("polynomial multiplication")
    }
}

impl<T: Real> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(-Cx::one())
    }
}

impl<T: Real> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c.im.is_zero() {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            write!(f, "*[{t}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type P = Polynomial<f64>;

    fn var(flavor: Flavor, n: usize, i: usize) -> P {
        P::variable(flavor, n, i).unwrap()
    }

    #[test]
    fn commutative_product_of_variables() {
        let p = &var(Flavor::Commutative, 2, 0) * &var(Flavor::Commutative, 2, 1);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&Term::Monomial(vec![1, 1])), Cx::one());
    }

    #[test]
    fn free_product_is_noncommutative() {
        let z1 = var(Flavor::Free, 2, 0);
        let z2 = var(Flavor::Free, 2, 1);
        let a = &z1 * &z2;
        let b = &z2 * &z1;
        assert_eq!(a.coefficient(&Term::Word(vec![0, 1])), Cx::one());
        assert_eq!(b.coefficient(&Term::Word(vec![1, 0])), Cx::one());
        assert_ne!(a, b);
    }

    #[test]
    fn binomial_square() {
        let s = &var(Flavor::Commutative, 2, 0) + &var(Flavor::Commutative, 2, 1);
        let sq = &s * &s;
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coefficient(&Term::Monomial(vec![2, 0])), Cx::one());
        assert_eq!(sq.coefficient(&Term::Monomial(vec![1, 1])), cre(2.0));
        assert_eq!(sq.coefficient(&Term::Monomial(vec![0, 2])), Cx::one());
    }

    #[test]
    fn flavor_mismatch_is_rejected() {
        let a = var(Flavor::Commutative, 2, 0);
        let b = var(Flavor::Free, 2, 0);
        assert!(matches!(a.multiply(&b), Err(Error::FlavorMismatch { .. })));
        let c = var(Flavor::Commutative, 3, 0);
        assert!(matches!(a.multiply(&c), Err(Error::VariableCountMismatch { .. })));
    }

    #[test]
    fn involution_examples() {
        let ix = var(Flavor::Commutative, 1, 0).scale(cx(0.0, 1.0));
        assert_eq!(ix.involution(), var(Flavor::Commutative, 1, 0).scale(cx(0.0, -1.0)));

        let z12 = P::term(Flavor::Free, 2, Term::Word(vec![0, 1]), Cx::one()).unwrap();
        let z21 = P::term(Flavor::Free, 2, Term::Word(vec![1, 0]), Cx::one()).unwrap();
        assert_eq!(z12.involution(), z21);

        let p = P::sum_of_monomial_squares(3, 2);
        assert_eq!(p.involution(), p);
    }

    #[test]
    fn coefficient_norms() {
        assert_eq!(P::zero(Flavor::Commutative, 2).coeff_two_norm(), 0.0);
        let p = P::from_terms(
            Flavor::Commutative,
            2,
            [(Term::Monomial(vec![2, 0]), cre(3.0)), (Term::Monomial(vec![0, 2]), cre(4.0))],
        )
        .unwrap();
        assert!((p.coeff_two_norm() - 5.0).abs() < 1e-15);
        let q = P::from_terms(
            Flavor::Free,
            2,
            [(Term::Word(vec![0, 1]), Cx::one()), (Term::Word(vec![1, 0]), Cx::one())],
        )
        .unwrap();
        assert!((q.coeff_two_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn evaluation_examples() {
        for n in 1..=4 {
            for d in 0..=6 {
                let p = P::sum_of_monomial_squares(n, d);
                let mut e1 = vec![0.0; n];
                e1[0] = 1.0;
                let s = SpherePoint::new(e1).unwrap();
                assert_eq!(p.evaluate(&s).unwrap(), Cx::one());
            }
        }
        let xy = &var(Flavor::Commutative, 2, 0) * &var(Flavor::Commutative, 2, 1);
        let h = 0.5f64.sqrt();
        let v = xy.evaluate(&SpherePoint::new(vec![h, h]).unwrap()).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15 && v.im == 0.0);
        let zero = P::zero(Flavor::Commutative, 2);
        assert_eq!(zero.evaluate(&SpherePoint::new(vec![h, h]).unwrap()).unwrap(), Cx::zero());
    }

    #[test]
    fn evaluate_rejects_free() {
        let z = var(Flavor::Free, 1, 0);
        let s = SpherePoint::new(vec![1.0]).unwrap();
        assert!(matches!(z.evaluate(&s), Err(Error::FlavorMismatch { .. })));
    }

    #[test]
    fn collapse_examples() {
        let sym = P::from_terms(
            Flavor::Free,
            2,
            [(Term::Word(vec![0, 1]), Cx::one()), (Term::Word(vec![1, 0]), Cx::one())],
        )
        .unwrap();
        let c = sym.collapse().unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.coefficient(&Term::Monomial(vec![1, 1])), cre(2.0));

        let zz = P::term(Flavor::Free, 2, Term::Word(vec![0, 0]), Cx::one()).unwrap();
        assert_eq!(
            zz.collapse().unwrap(),
            P::term(Flavor::Commutative, 2, Term::Monomial(vec![2, 0]), Cx::one()).unwrap()
        );

        let q = P::from_terms(
            Flavor::Free,
            2,
            [(Term::Word(vec![1, 0, 0, 1]), Cx::one()), (Term::Word(vec![0, 1, 1, 0]), Cx::one())],
        )
        .unwrap();
        assert_eq!(
            q.collapse().unwrap(),
            P::term(Flavor::Commutative, 2, Term::Monomial(vec![2, 2]), cre(2.0)).unwrap()
        );

        assert!(P::sum_of_monomial_squares(2, 1).collapse().is_err());
    }

    #[test]
    fn tiny_coefficients_are_dropped() {
        let x = var(Flavor::Commutative, 1, 0);
        let almost = x.scale(cre(1.0 + 1e-16));
        let diff = &almost - &x;
        assert!(diff.is_zero());
    }

    #[test]
    fn homogeneity_check() {
        let p = P::sum_of_monomial_squares(3, 2);
        assert!(p.check_homogeneous(4).is_ok());
        assert!(matches!(p.check_homogeneous(2), Err(Error::NotHomogeneous { .. })));
    }

    #[test]
    fn single_precision_arithmetic() {
        let x = Polynomial::<f32>::variable(Flavor::Commutative, 2, 0).unwrap();
        let y = Polynomial::<f32>::variable(Flavor::Commutative, 2, 1).unwrap();
        let s = &x + &y;
        let sq = &s * &s;
        assert_eq!(sq.coefficient(&Term::Monomial(vec![1, 1])), cre(2.0f32));
    }
}
