//! JSON interchange format for polynomials:
//!
//! ```json
//! {"flavor": "free", "n_vars": 2,
//!  "terms": [{"term": "z1 z2", "re": 1.0, "im": 0.0},
//!            {"term": "z2 z1", "re": 1.0, "im": 0.0}]}
//! ```
//!
//! Commutative terms are exponent arrays (`[2, 0, 1]`), free terms are
//! whitespace-separated letters `z1..zn` (the empty string is the unit
//! word). Coefficients round-trip exactly for `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cx, Real};

use super::{Flavor, Polynomial, Term};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub flavor: Flavor,
    pub n_vars: usize,
    pub terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub term: TermRepr,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermRepr {
    Exponents(Vec<u32>),
    Word(String),
}

impl TermRepr {
    pub fn from_term(t: &Term) -> Self {
        match t {
            Term::Monomial(e) => TermRepr::Exponents(e.clone()),
            Term::Word(_) => TermRepr::Word(t.to_string_word()),
        }
    }

    pub fn to_term(&self, flavor: Flavor, n_vars: usize) -> Result<Term> {
        match (flavor, self) {
            (Flavor::Commutative, TermRepr::Exponents(e)) => {
                if e.len() != n_vars {
                    return Err(Error::Parse(format!(
                        "exponent vector {e:?} has length {}, expected {n_vars}",
                        e.len()
                    )));
                }
                Ok(Term::Monomial(e.clone()))
            }
            (Flavor::Free, TermRepr::Word(s)) => parse_word(s, n_vars).map(Term::Word),
            (Flavor::Commutative, TermRepr::Word(s)) => {
                Err(Error::Parse(format!("commutative term must be an exponent array, got {s:?}")))
            }
            (Flavor::Free, TermRepr::Exponents(e)) => {
                Err(Error::Parse(format!("free term must be a word string, got {e:?}")))
            }
        }
    }
}

fn parse_word(s: &str, n_vars: usize) -> Result<Vec<u32>> {
    s.split_whitespace()
        .map(|tok| {
            let idx: usize = tok
                .strip_prefix('z')
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad letter {tok:?} in word {s:?}")))?;
            if idx == 0 || idx > n_vars {
                return Err(Error::Parse(format!("letter {tok:?} out of range 1..={n_vars}")));
            }
            Ok((idx - 1) as u32)
        })
        .collect()
}

impl Term {
    fn to_string_word(&self) -> String {
        match self {
            Term::Word(w) => w.iter().map(|z| format!("z{}", z + 1)).collect::<Vec<_>>().join(" "),
            Term::Monomial(_) => self.to_string(),
        }
    }
}

impl<T: Real> Polynomial<T> {
    pub fn to_doc(&self) -> PolynomialDoc {
        PolynomialDoc {
            flavor: self.flavor,
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(t, c)| TermDoc {
                    term: TermRepr::from_term(t),
                    re: c.re.to_f64_lossy(),
                    im: c.im.to_f64_lossy(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &PolynomialDoc) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|td| {
                let t = td.term.to_term(doc.flavor, doc.n_vars)?;
                if !td.re.is_finite() || !td.im.is_finite() {
                    return Err(Error::Parse(format!("non-finite coefficient for term {t}")));
                }
                Ok((t, cx(T::lit(td.re), T::lit(td.im))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(doc.flavor, doc.n_vars, terms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    /// Parses the JSON format; parse errors carry line and column.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PolynomialDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn free_document_parses() {
        let s = r#"{"flavor":"free","n_vars":2,"terms":[
            {"term":"z2 z1 z1 z2","re":1,"im":0},
            {"term":"z1 z2 z2 z1","re":1}]}"#;
        let p = Polynomial::<f64>::from_json(s).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.coefficient(&Term::Word(vec![1, 0, 0, 1])).re, 1.0);
    }

    #[test]
    fn parse_errors_have_position() {
        let err = Polynomial::<f64>::from_json("{\"flavor\": \"free\",\n \"n_vars\": }").unwrap_err();
        let Error::Parse(msg) = err else { panic!("wrong error") };
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn wrong_term_shapes_rejected() {
        let s = r#"{"flavor":"commutative","n_vars":2,"terms":[{"term":"z1","re":1}]}"#;
        assert!(Polynomial::<f64>::from_json(s).is_err());
        let s = r#"{"flavor":"free","n_vars":2,"terms":[{"term":"z3","re":1}]}"#;
        assert!(Polynomial::<f64>::from_json(s).is_err());
        let s = r#"{"flavor":"commutative","n_vars":2,"terms":[{"term":[1],"re":1}]}"#;
        assert!(Polynomial::<f64>::from_json(s).is_err());
    }

    #[test]
    fn empty_polynomial() {
        let s = r#"{"flavor":"commutative","n_vars":3,"terms":[]}"#;
        assert!(Polynomial::<f64>::from_json(s).unwrap().is_zero());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(
            free in any::<bool>(),
            coeffs in prop::collection::vec((0u32..3, 0u32..3, -1e6f64..1e6, -1e6f64..1e6), 0..8),
        ) {
            let flavor = if free { Flavor::Free } else { Flavor::Commutative };
            let terms = coeffs.iter().map(|&(a, b, re, im)| {
                let t = match flavor {
                    Flavor::Commutative => Term::Monomial(vec![a, b]),
                    Flavor::Free => Term::Word(vec![a % 2, b % 2, (a + b) % 2]),
                };
                (t, cx(re, im))
            });
            let p = Polynomial::<f64>::from_terms(flavor, 2, terms).unwrap();
            let back = Polynomial::<f64>::from_json(&p.to_json()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
