use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which *-algebra a polynomial lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// ℂ[x₁..xₙ] with involution conjugating coefficients.
    Commutative,
    /// ℂ⟨z₁..zₙ⟩ with Hermitian letters, z_i* = z_i.
    Free,
}

/// A monomial (exponent vector) or a word over the letters z₁..zₙ.
///
/// Letters of a word are stored zero-based. Ordering is graded: monomials
/// compare by degree and then lexicographically with x₁ largest
/// (x₁² < x₁x₂ < x₂²), words by length and then lexicographically in the
/// letter indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Monomial(Vec<u32>),
    Word(Vec<u32>),
}

impl Term {
    pub fn one(flavor: Flavor, n_vars: usize) -> Self {
        match flavor {
            Flavor::Commutative => Term::Monomial(vec![0; n_vars]),
            Flavor::Free => Term::Word(Vec::new()),
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self {
            Term::Monomial(_) => Flavor::Commutative,
            Term::Word(_) => Flavor::Free,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Term::Monomial(e) => e.iter().map(|&k| k as usize).sum(),
            Term::Word(w) => w.len(),
        }
    }

    /// Monomials are fixed by the involution; words are reversed.
    pub fn involution(&self) -> Term {
        match self {
            Term::Monomial(e) => Term::Monomial(e.clone()),
            Term::Word(w) => Term::Word(w.iter().rev().copied().collect()),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        match self {
            Term::Monomial(_) => true,
            Term::Word(w) => w.iter().eq(w.iter().rev()),
        }
    }

    /// Product in the algebra. Returns `None` on flavor or arity mismatch.
    pub fn mul(&self, other: &Term) -> Option<Term> {
        match (self, other) {
            (Term::Monomial(a), Term::Monomial(b)) if a.len() == b.len() => {
                Some(Term::Monomial(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
            (Term::Word(a), Term::Word(b)) => {
                let mut w = Vec::with_capacity(a.len() + b.len());
                w.extend_from_slice(a);
                w.extend_from_slice(b);
                Some(Term::Word(w))
            }
            _ => None,
        }
    }

    /// Exponent vector of a word (letter counts); monomials map to themselves.
    pub fn collapse(&self, n_vars: usize) -> Term {
        match self {
            Term::Monomial(e) => Term::Monomial(e.clone()),
            Term::Word(w) => {
                let mut e = vec![0u32; n_vars];
                for &z in w {
                    e[z as usize] += 1;
                }
                Term::Monomial(e)
            }
        }
    }

    /// Highest variable index used plus one (for words) or the arity (monomials).
    pub(crate) fn arity_hint(&self) -> usize {
        match self {
            Term::Monomial(e) => e.len(),
            Term::Word(w) => w.iter().map(|&z| z as usize + 1).max().unwrap_or(0),
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Monomial(a), Term::Monomial(b)) => self
                .degree()
                .cmp(&other.degree())
                .then_with(|| b.cmp(a)),
            (Term::Word(a), Term::Word(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
            (Term::Monomial(_), Term::Word(_)) => Ordering::Less,
            (Term::Word(_), Term::Monomial(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Monomial(e) => {
                let mut first = true;
                for (i, &k) in e.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    if !first {
                        f.write_str("*")?;
                    }
                    first = false;
                    if k == 1 {
                        write!(f, "x{}", i + 1)?;
                    } else {
                        write!(f, "x{}^{}", i + 1, k)?;
                    }
                }
                if first {
                    f.write_str("1")?;
                }
                Ok(())
            }
            Term::Word(w) => {
                if w.is_empty() {
                    return f.write_str("1");
                }
                for (i, &z) in w.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "z{}", z + 1)?;
                }
                Ok(())
            }
        }
    }
}

/// All exponent vectors of total degree `d` in `n` variables, in term order.
pub fn monomials_of_degree(n: usize, d: usize) -> Vec<Term> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Term>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left;
            out.push(Term::Monomial(cur.clone()));
            cur[i] = 0;
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    if n > 0 {
        rec(0, d as u32, &mut cur, &mut out);
    }
    out
}

/// All words of length `d` over `n` letters, in term order.
pub fn words_of_length(n: usize, d: usize) -> Vec<Term> {
    if n == 0 {
        return if d == 0 { vec![Term::Word(Vec::new())] } else { Vec::new() };
    }
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut w = vec![0u32; d];
            for slot in w.iter_mut().rev() {
                *slot = (idx % n) as u32;
                idx /= n;
            }
            Term::Word(w)
        })
        .collect()
}
