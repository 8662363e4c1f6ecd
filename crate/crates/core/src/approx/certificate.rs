use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{BasisDoc, PolyNorm, SquareBasis};
use crate::poly::{Polynomial, PolynomialDoc};
use crate::scalar::{cx, Cx, Real};

/// Relative tolerance for Σ q_i* q_i = a'.
pub const REASSEMBLY_TOLERANCE: f64 = 1e-8;

/// Which truncation produced the kept spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "schatten-2")]
    SchattenTwo,
    #[serde(rename = "schatten-inf")]
    SchattenInf,
    /// Exact decomposition, nothing truncated.
    #[serde(rename = "exact")]
    Exact,
}

/// One candidate truncation considered by the free pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSummary {
    pub route: Route,
    pub squares: usize,
    /// Coefficient 2-norm distance of the truncated Gram image.
    pub error: f64,
    pub accepted: bool,
}

/// An approximation a' = Σ q_i* q_i of a, together with its error and the
/// rank bound it was produced under.
#[derive(Debug, Clone)]
pub struct SosCertificate<T: Real> {
    pub basis: SquareBasis,
    pub input: Polynomial<T>,
    pub approximation: Polynomial<T>,
    /// Coefficient vectors of the q_i over `basis`.
    pub squares: Vec<Vec<Cx<T>>>,
    /// ‖a − a'‖ in `norm`; for the sphere norm this is the certified bound.
    pub error: T,
    pub norm: PolyNorm,
    pub route: Route,
    pub epsilon: T,
    /// tr of the Gram matrix that was truncated.
    pub sos_norm: T,
    /// The theoretical bound; the square count is strictly below it.
    pub rank_bound: T,
    /// Largest integer strictly below `rank_bound`.
    pub rank_cap: usize,
    pub routes: Vec<RouteSummary>,
}

/// q = Σ c_j v_j.
pub fn square_root_polynomial<T: Real>(basis: &SquareBasis, c: &[Cx<T>]) -> Result<Polynomial<T>> {
    let s = T::lit(basis.scale());
    Polynomial::from_terms(
        basis.flavor(),
        basis.n_vars(),
        basis.terms().iter().cloned().zip(c.iter().map(|&z| z * s)),
    )
}

/// Σ q_i* q_i computed by polynomial multiplication.
pub fn reassemble<T: Real>(basis: &SquareBasis, squares: &[Vec<Cx<T>>]) -> Result<Polynomial<T>> {
    let mut total = Polynomial::zero(basis.flavor(), basis.n_vars());
    for c in squares {
        if c.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: c.len() });
        }
        let q = square_root_polynomial(basis, c)?;
        total = total.checked_add(&q.involution().multiply(&q)?)?;
    }
    Ok(total)
}

impl<T: Real> SosCertificate<T> {
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// Re-checks every invariant from the stored data alone.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::CertificateInvalid(msg));
        let a_norm = self.input.coeff_two_norm();
        if self.squares.len() > self.rank_cap {
            return fail(format!("{} squares exceed the cap {}", self.squares.len(), self.rank_cap));
        }
        let back = reassemble(&self.basis, &self.squares)?;
        let drift = back.checked_sub(&self.approximation)?.coeff_two_norm();
        if drift > T::lit(REASSEMBLY_TOLERANCE) * (T::one() + a_norm) {
            return fail(format!("squares reassemble with residual {drift:e}"));
        }
        if !(self.error <= self.epsilon) {
            return fail(format!("error {} exceeds epsilon {}", self.error, self.epsilon));
        }
        let diff = self.input.checked_sub(&self.approximation)?;
        match self.norm {
            PolyNorm::CoefficientTwo => {
                let e = diff.coeff_two_norm();
                if e > self.error + T::lit(1e-12) * (T::one() + a_norm) {
                    return fail(format!("measured error {e:e} exceeds the recorded {:e}", self.error));
                }
            }
            PolyNorm::SupSphere => {
                let e = diff.sup_norm_sphere(2)?;
                if e > self.error + T::lit(1e-9) * (T::one() + a_norm) {
                    return fail(format!("sampled sphere error {e:e} exceeds the certified {:e}", self.error));
                }
            }
            PolyNorm::InheritedSchatten => return fail("inherited norm certificates are not produced".into()),
        }
        Ok(())
    }

    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            basis: self.basis.describe(),
            input: self.input.to_doc(),
            approximation: self.approximation.to_doc(),
            squares: self
                .squares
                .iter()
                .map(|c| c.iter().map(|z| (z.re.to_f64_lossy(), z.im.to_f64_lossy())).collect())
                .collect(),
            count: self.squares.len(),
            error: self.error.to_f64_lossy(),
            norm: self.norm,
            route: self.route,
            epsilon: self.epsilon.to_f64_lossy(),
            sos_norm: self.sos_norm.to_f64_lossy(),
            rank_bound: self.rank_bound.to_f64_lossy(),
            rank_cap: self.rank_cap,
            routes: self.routes.clone(),
        }
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<Self> {
        let b = &doc.basis;
        let basis = SquareBasis::new(b.flavor, b.n_vars, b.degree)?.scaled(b.scale)?;
        if basis.describe().terms != b.terms {
            return Err(Error::Parse("basis terms do not match the canonical order".into()));
        }
        Ok(Self {
            input: Polynomial::from_doc(&doc.input)?,
            approximation: Polynomial::from_doc(&doc.approximation)?,
            squares: doc
                .squares
                .iter()
                .map(|c| c.iter().map(|&(re, im)| cx(T::lit(re), T::lit(im))).collect())
                .collect(),
            basis,
            error: T::lit(doc.error),
            norm: doc.norm,
            route: doc.route,
            epsilon: T::lit(doc.epsilon),
            sos_norm: T::lit(doc.sos_norm),
            rank_bound: T::lit(doc.rank_bound),
            rank_cap: doc.rank_cap,
            routes: doc.routes.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CertificateDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub basis: BasisDoc,
    pub input: PolynomialDoc,
    pub approximation: PolynomialDoc,
    pub squares: Vec<Vec<(f64, f64)>>,
    pub count: usize,
    pub error: f64,
    pub norm: PolyNorm,
    pub route: Route,
    pub epsilon: f64,
    pub sos_norm: f64,
    pub rank_bound: f64,
    pub rank_cap: usize,
    #[serde(default)]
    pub routes: Vec<RouteSummary>,
}
