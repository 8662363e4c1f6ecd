//! The linear system tr(A_l M) = λ_l describing the Gram matrices of an
//! element a over a Hermitian basis (ω_l) of V*V.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, HermitianMatrix};
use crate::poly::{Polynomial, Term, TermRepr};
use crate::scalar::{cx, Cx, Real};

use super::{BasisDoc, SquareBasis};

/// Tolerance (relative to 1 + ‖a‖₂) for accepting a as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// How a Hermitian product-basis element ω is formed from a term τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// ω = τ with τ* = τ.
    #[serde(rename = "self")]
    SelfAdjoint,
    /// ω = τ + τ*.
    Real,
    /// ω = i(τ − τ*).
    Imag,
}

/// One element ω_l of the Hermitian basis of V*V.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductElement {
    /// Representative term τ, the smaller of {τ, τ*} in term order.
    pub term: Term,
    pub kind: ElementKind,
}

/// Hermitian constraint matrix in coordinate form; both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian<T: Real> {
    pub entries: Vec<(usize, usize, Cx<T>)>,
}

impl<T: Real> SparseHermitian<T> {
    /// tr(A M) = Σ_{ij} A_ij M_ji
    pub fn trace_product(&self, m: &HermitianMatrix<T>) -> T {
        self.entries.iter().map(|&(i, j, a)| (a * m.get(j, i)).re).sum()
    }

    pub fn to_dense(&self, dim: usize) -> HermitianMatrix<T> {
        let mut m = HermitianMatrix::zeros(dim);
        for &(i, j, a) in &self.entries {
            if i <= j {
                m.set(i, j, m.get(i, j) + a);
            }
        }
        m
    }
}

/// Constraint system for `a` over `basis`: M is a Gram matrix of `a` iff
/// tr(A_l M) = λ_l for every l.
#[derive(Debug, Clone)]
pub struct GramConstraints<T: Real> {
    basis: SquareBasis,
    elements: Vec<ProductElement>,
    matrices: Vec<SparseHermitian<T>>,
    targets: Vec<T>,
    /// For each matrix position (row-major), the (constraint, value) pairs touching it.
    by_position: Vec<Vec<(usize, Cx<T>)>>,
}

impl<T: Real> GramConstraints<T> {
    /// The constraint matrices for `basis` with all targets zero.
    pub fn for_basis(basis: &SquareBasis) -> Self {
        let m = basis.len();
        let scale2 = T::lit(basis.scale() * basis.scale());
        // representative term -> (real/self element, optional imag element)
        let mut reps: BTreeMap<Term, (usize, Option<usize>)> = BTreeMap::new();
        let mut products = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let tau = basis.product_term(i, j);
                let star = tau.involution();
                let (rep, is_rep) = if tau <= star { (tau.clone(), true) } else { (star, false) };
                reps.entry(rep.clone()).or_insert((0, None));
                products.push((rep, is_rep, tau.is_self_adjoint()));
            }
        }
        let mut elements = Vec::new();
        for (rep, slot) in reps.iter_mut() {
            if rep.is_self_adjoint() {
                slot.0 = elements.len();
                elements.push(ProductElement { term: rep.clone(), kind: ElementKind::SelfAdjoint });
            } else {
                slot.0 = elements.len();
                elements.push(ProductElement { term: rep.clone(), kind: ElementKind::Real });
                slot.1 = Some(elements.len());
                elements.push(ProductElement { term: rep.clone(), kind: ElementKind::Imag });
            }
        }
        let mut matrices = vec![SparseHermitian { entries: Vec::new() }; elements.len()];
        let mut by_position = vec![Vec::new(); m * m];
        let half = T::lit(0.5) * scale2;
        for (pos, (rep, is_rep, selfadj)) in products.into_iter().enumerate() {
            let (i, j) = (pos / m, pos % m);
            let (lr, li) = reps[&rep];
            let mut push = |l: usize, v: Cx<T>| {
                matrices[l].entries.push((i, j, v));
                by_position[pos].push((l, v));
            };
            if selfadj {
                push(lr, cx(scale2, T::zero()));
            } else {
                // v_i* v_j = ½ω_re ∓ (i/2)ω_im; A_l holds the conjugated coefficients
                let li = li.expect("pair has an imaginary element");
                push(lr, cx(half, T::zero()));
                push(li, if is_rep { cx(T::zero(), half) } else { cx(T::zero(), -half) });
            }
        }
        let targets = vec![T::zero(); elements.len()];
        Self { basis: basis.clone(), elements, matrices, targets, by_position }
    }

    /// Sets the targets λ_l from the expansion a = Σ λ_l ω_l.
    pub fn with_target(mut self, a: &Polynomial<T>) -> Result<Self> {
        self.targets = self.expand(a)?;
        Ok(self)
    }

    /// Coordinates λ of a Hermitian `a` in the product basis.
    pub fn expand(&self, a: &Polynomial<T>) -> Result<Vec<T>> {
        let b = &self.basis;
        if a.flavor() != b.flavor() {
            return Err(Error::FlavorMismatch { expected: b.flavor(), found: a.flavor() });
        }
        if a.n_vars() != b.n_vars() {
            return Err(Error::VariableCountMismatch { left: b.n_vars(), right: a.n_vars() });
        }
        a.check_homogeneous(2 * b.degree())?;
        a.check_hermitian(T::lit(HERMITIAN_TOLERANCE))?;
        let mut index: BTreeMap<(&Term, ElementKind), usize> = BTreeMap::new();
        for (l, e) in self.elements.iter().enumerate() {
            index.insert((&e.term, e.kind), l);
        }
        let mut targets = vec![T::zero(); self.elements.len()];
        for (t, c) in a.iter() {
            let star = t.involution();
            if t.is_self_adjoint() {
                let l = *index
                    .get(&(t, ElementKind::SelfAdjoint))
                    .ok_or_else(|| Error::TermOutsideSpan { term: t.to_string() })?;
                targets[l] = c.re;
            } else if *t < star {
                let lr = *index
                    .get(&(t, ElementKind::Real))
                    .ok_or_else(|| Error::TermOutsideSpan { term: t.to_string() })?;
                targets[lr] = c.re;
                targets[lr + 1] = c.im;
            } else if !index.contains_key(&(&star, ElementKind::Real)) {
                return Err(Error::TermOutsideSpan { term: t.to_string() });
            }
        }
        Ok(targets)
    }

    pub fn basis(&self) -> &SquareBasis {
        &self.basis
    }

    pub fn elements(&self) -> &[ProductElement] {
        &self.elements
    }

    pub fn matrices(&self) -> &[SparseHermitian<T>] {
        &self.matrices
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    /// Number k of real constraints.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// (tr(A_l M))_l
    pub fn apply(&self, m: &HermitianMatrix<T>) -> Vec<T> {
        let n = self.dim();
        let mut out = vec![T::zero(); self.len()];
        for (pos, touches) in self.by_position.iter().enumerate() {
            if touches.is_empty() {
                continue;
            }
            let mji = m.get(pos % n, pos / n);
            for &(l, a) in touches {
                out[l] += (a * mji).re;
            }
        }
        out
    }

    /// Σ_l y_l A_l
    pub fn adjoint(&self, y: &[T]) -> HermitianMatrix<T> {
        let n = self.dim();
        let mut m = HermitianMatrix::zeros(n);
        for (pos, touches) in self.by_position.iter().enumerate() {
            let (i, j) = (pos / n, pos % n);
            if i > j {
                continue;
            }
            let v = touches.iter().fold(Cx::zero(), |acc, &(l, a)| acc + a * cx(y[l], T::zero()));
            if !v.is_zero() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Gram matrix of the constraint family, K_lm = ⟨A_l, A_m⟩, row-major.
    pub fn gram_system(&self) -> Vec<T> {
        let k = self.len();
        let mut g = vec![T::zero(); k * k];
        for touches in &self.by_position {
            for &(l, a) in touches {
                for &(m, b) in touches {
                    g[l * k + m] += (a.conj() * b).re;
                }
            }
        }
        g
    }

    pub fn factor_gram_system(&self) -> Result<Cholesky<T>> {
        Cholesky::new(self.len(), &self.gram_system())
    }

    /// Euclidean norm of (tr(A_l M) − λ_l)_l.
    pub fn residual(&self, m: &HermitianMatrix<T>) -> T {
        self.apply(m)
            .iter()
            .zip(&self.targets)
            .map(|(&x, &t)| (x - t) * (x - t))
            .sum::<T>()
            .sqrt()
    }

    pub fn target_norm(&self) -> T {
        self.targets.iter().map(|&t| t * t).sum::<T>().sqrt()
    }

    /// The element Σ_l c_l ω_l of V*V.
    pub fn combine(&self, c: &[T]) -> Polynomial<T> {
        let b = &self.basis;
        let mut terms = Vec::new();
        for (e, &v) in self.elements.iter().zip(c) {
            match e.kind {
                ElementKind::SelfAdjoint => terms.push((e.term.clone(), cx(v, T::zero()))),
                ElementKind::Real => {
                    terms.push((e.term.clone(), cx(v, T::zero())));
                    terms.push((e.term.involution(), cx(v, T::zero())));
                }
                ElementKind::Imag => {
                    terms.push((e.term.clone(), cx(T::zero(), v)));
                    terms.push((e.term.involution(), cx(T::zero(), -v)));
                }
            }
        }
        Polynomial::from_terms(b.flavor(), b.n_vars(), terms).expect("terms from the basis")
    }

    pub fn to_doc(&self) -> ConstraintsDoc {
        ConstraintsDoc {
            basis: self.basis.describe(),
            elements: self
                .elements
                .iter()
                .map(|e| ElementDoc { term: TermRepr::from_term(&e.term), kind: e.kind })
                .collect(),
            constraints: self
                .matrices
                .iter()
                .zip(&self.targets)
                .map(|(a, &t)| ConstraintDoc {
                    target: t.to_f64_lossy(),
                    entries: a
                        .entries
                        .iter()
                        .map(|&(i, j, v)| (i, j, v.re.to_f64_lossy(), v.im.to_f64_lossy()))
                        .collect(),
                })
                .collect(),
        }
    }
}

/// JSON form of [`GramConstraints`]: the basis, the Hermitian product
/// basis and, per constraint, the target λ_l and the entries
/// `[row, col, re, im]` (zero-based, both triangles) of A_l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintsDoc {
    pub basis: BasisDoc,
    pub elements: Vec<ElementDoc>,
    pub constraints: Vec<ConstraintDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub term: TermRepr,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub target: f64,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

/// Constraint system of `a` over `basis`.
pub fn build_constraints<T: Real>(a: &Polynomial<T>, basis: &SquareBasis) -> Result<GramConstraints<T>> {
    GramConstraints::for_basis(basis).with_target(a)
}
