//! Seeded property suites spanning the modules, reported one line per
//! property. Used by the command-line `verify` command.

use serde::Serialize;

use crate::approx::{approximate, pythagoras_upper_bound};
use crate::error::Result;
use crate::gram::{build_constraints, gram_map, gram_preimage_free, SquareBasis};
use crate::linalg::{schatten_norm, truncate_rank, HermitianMatrix, Schatten};
use crate::poly::{monomials_of_degree, Flavor, Polynomial, SpherePoint, Term};
use crate::random::{normal, random_hermitian, random_psd, random_sos, seeded};
use crate::sdp::{dual_bound_from, free_sos_norm_closed_form, solve_trace_min, SdpStatus, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest violation-side quantity observed (residual, error, ratio).
    pub max_value: f64,
    pub limit: f64,
    pub detail: String,
}

struct Tally {
    property: &'static str,
    cases: usize,
    max_value: f64,
    limit: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new(property: &'static str, limit: f64) -> Self {
        Self { property, cases: 0, max_value: 0.0, limit, failures: Vec::new() }
    }

    /// Records one case; `value` must not exceed the tally's limit.
    fn record(&mut self, value: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        if value.is_nan() || value > self.max_value {
            self.max_value = value;
        }
        if !(value <= self.limit) {
            self.failures.push(context());
        }
    }

    fn fail(&mut self, context: String) {
        self.cases += 1;
        self.failures.push(context);
    }

    fn finish(self) -> PropertyReport {
        let detail = match self.failures.len() {
            0 => String::new(),
            k => format!("{k} failing case(s), first: {}", self.failures[0]),
        };
        PropertyReport {
            property: self.property,
            passed: self.failures.is_empty(),
            cases: self.cases,
            max_value: self.max_value,
            limit: self.limit,
            detail,
        }
    }
}

/// Runs every suite with instances drawn from `seed`.
pub fn run_all(seed: u64, opts: &SolverOptions) -> Result<Vec<PropertyReport>> {
    Ok(vec![
        free_round_trip(seed)?,
        monomial_vector_on_sphere(seed)?,
        constraint_adjoint(seed)?,
        truncation_bound(seed)?,
        free_closed_form(seed, opts)?,
        weak_duality(seed, opts)?,
        sup_below_sos(seed, opts)?,
        certificates(seed, opts)?,
        exact_decomposition(seed, opts)?,
        json_round_trip(seed)?,
    ])
}

/// G⁻¹(G(M)) = M for 100 random Hermitian M over words.
pub fn free_round_trip(seed: u64) -> Result<PropertyReport> {
    let mut rng = seeded(seed);
    let mut t = Tally::new("free-gram-round-trip", 1e-12);
    for i in 0..100 {
        let (n, d) = [(1, 2), (2, 1), (2, 2), (3, 1), (2, 3)][i % 5];
        let b = SquareBasis::new(Flavor::Free, n, d)?;
        let m: HermitianMatrix<f64> = random_hermitian(&mut rng, b.len());
        let back = gram_preimage_free(&gram_map(&m, &b)?, d)?;
        let r = back.sub(&m).max_abs_entry() / (1.0 + m.max_abs_entry());
        t.record(r, || format!("n={n} d={d} case {i}"));
    }
    Ok(t.finish())
}

/// ‖𝔪_d(s)‖₂ ≤ 1 for 1000 random sphere points and d ≤ 8.
pub fn monomial_vector_on_sphere(seed: u64) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0001);
    let mut t = Tally::new("monomial-vector-on-sphere", 1.0 + 1e-12);
    for i in 0..1000 {
        let n = 2 + i % 3;
        let d = 1 + i % 8;
        let raw: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let s = SpherePoint::normalized(raw)?;
        let norm2: f64 = monomials_of_degree(n, d)
            .iter()
            .map(|m| {
                let Term::Monomial(e) = m else { unreachable!() };
                e.iter().zip(s.coords()).map(|(&k, &x)| x.powi(k as i32)).product::<f64>().powi(2)
            })
            .sum();
        t.record(norm2.sqrt(), || format!("n={n} d={d} point {:?}", s.coords()));
    }
    Ok(t.finish())
}

/// ⟨A(M), y⟩ = tr(M · A*y).
pub fn constraint_adjoint(seed: u64) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0002);
    let mut t = Tally::new("constraint-adjoint", 1e-10);
    for i in 0..40 {
        let flavor = if i % 2 == 0 { Flavor::Commutative } else { Flavor::Free };
        let (n, d) = [(2, 1), (3, 2), (2, 2), (3, 1)][i % 4];
        let b = SquareBasis::new(flavor, n, d)?;
        let c = build_constraints(&Polynomial::<f64>::zero(flavor, n), &b)?;
        let m: HermitianMatrix<f64> = random_hermitian(&mut rng, b.len());
        let y: Vec<f64> = (0..c.len()).map(|_| normal(&mut rng)).collect();
        let lhs: f64 = c.apply(&m).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs = m.inner(&c.adjoint(&y));
        t.record((lhs - rhs).abs() / (1.0 + lhs.abs()), || format!("{flavor:?} n={n} d={d}"));
    }
    Ok(t.finish())
}

/// ‖M − M'‖_p ≤ ε and rank(M') < (tr/ε)^{p/(p−1)}.
pub fn truncation_bound(seed: u64) -> Result<PropertyReport> {
    use rand::Rng;
    let mut rng = seeded(seed ^ 0x5eed_0003);
    let mut t = Tally::new("truncation-bound", 1.0 + 1e-10);
    for i in 0..60 {
        let n = rng.gen_range(1..=30);
        let width = rng.gen_range(1..=n);
        let m: HermitianMatrix<f64> = random_psd(&mut rng, n, width);
        let p = [Schatten::P(2.0), Schatten::P(4.0), Schatten::Infinity][i % 3];
        let eps = [0.01, 0.1, 1.0][(i / 3) % 3] * m.trace();
        let tr = truncate_rank(&m, eps, p)?;
        let err = schatten_norm(&m.sub(&tr.matrix), p)?;
        if (tr.rank as f64) >= tr.rank_bound {
            t.fail(format!("rank {} not below {}", tr.rank, tr.rank_bound));
        } else {
            t.record(err / eps, || format!("dim {n} p {p:?}"));
        }
    }
    Ok(t.finish())
}

pub fn free_closed_form(seed: u64, opts: &SolverOptions) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0004);
    let mut t = Tally::new("free-sos-norm-closed-form", 1e-6);
    for i in 0..12 {
        let (n, d) = [(1, 1), (2, 1), (2, 2), (3, 1)][i % 4];
        let (p, b) = random_sos::<f64, _>(&mut rng, Flavor::Free, n, d, 1 + i % 3)?;
        let exact = free_sos_norm_closed_form(&p, d)?;
        let s = solve_trace_min(&build_constraints(&p, &b)?, opts)?;
        if s.status != SdpStatus::Optimal {
            t.fail(format!("status {:?} for n={n} d={d}", s.status));
            continue;
        }
        t.record((s.objective - exact).abs() / exact.max(1.0), || format!("n={n} d={d}"));
    }
    Ok(t.finish())
}

pub fn weak_duality(seed: u64, opts: &SolverOptions) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0005);
    let mut t = Tally::new("weak-duality", 1e-6);
    for i in 0..10 {
        let (n, d) = [(2, 1), (2, 2), (3, 1), (3, 2)][i % 4];
        let (p, b) = random_sos::<f64, _>(&mut rng, Flavor::Commutative, n, d, 2)?;
        let c = build_constraints(&p, &b)?;
        let s = solve_trace_min(&c, opts)?;
        let primal = s.objective;
        let dual = dual_bound_from(&c, s)?.value;
        t.record((dual - primal) / (1.0 + primal), || format!("n={n} d={d}"));
    }
    Ok(t.finish())
}

pub fn sup_below_sos(seed: u64, opts: &SolverOptions) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0006);
    let mut t = Tally::new("sup-norm-below-sos-norm", 1e-6);
    for i in 0..10 {
        let (n, d) = [(2, 1), (2, 2), (3, 1), (3, 2)][i % 4];
        let (p, b) = random_sos::<f64, _>(&mut rng, Flavor::Commutative, n, d, 2)?;
        let s = solve_trace_min(&build_constraints(&p, &b)?, opts)?;
        t.record(p.sup_norm_sphere(6)? - s.objective, || format!("n={n} d={d}"));
    }
    Ok(t.finish())
}

/// Approximation certificates re-verify from their stored data.
pub fn certificates(seed: u64, opts: &SolverOptions) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0007);
    let mut t = Tally::new("certificate-soundness", 0.0);
    for i in 0..12 {
        let flavor = if i % 2 == 0 { Flavor::Commutative } else { Flavor::Free };
        let (n, d) = [(2, 1), (2, 2), (3, 1)][i % 3];
        let (p, b) = random_sos::<f64, _>(&mut rng, flavor, n, d, 3)?;
        let eps = [0.05, 0.3, 1.0][i % 3];
        match approximate(&p, &b, eps, opts).and_then(|c| c.verify()) {
            Ok(()) => t.record(0.0, String::new),
            Err(e) => t.fail(format!("{flavor:?} n={n} d={d} eps={eps}: {e}")),
        }
    }
    Ok(t.finish())
}

/// n = 3, d = 2: at most ⌈√15⌉ = 4 squares, exactly.
pub fn exact_decomposition(seed: u64, opts: &SolverOptions) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0008);
    let mut t = Tally::new("exact-decomposition-count", 1e-6);
    for i in 0..6 {
        let (p, b) = random_sos::<f64, _>(&mut rng, Flavor::Commutative, 3, 2, 6)?;
        let r = pythagoras_upper_bound(&p, &b, opts)?;
        if r.count > 4 {
            t.fail(format!("case {i}: {} squares", r.count));
        } else {
            t.record(r.residual, || format!("case {i}"));
        }
    }
    Ok(t.finish())
}

pub fn json_round_trip(seed: u64) -> Result<PropertyReport> {
    let mut rng = seeded(seed ^ 0x5eed_0009);
    let mut t = Tally::new("json-round-trip", 0.0);
    for i in 0..20 {
        let flavor = if i % 2 == 0 { Flavor::Commutative } else { Flavor::Free };
        let (p, _) = random_sos::<f64, _>(&mut rng, flavor, 1 + i % 3, 1 + i % 2, 2)?;
        let back = Polynomial::<f64>::from_json(&p.to_json())?;
        t.record(if back == p { 0.0 } else { 1.0 }, || format!("case {i}"));
    }
    Ok(t.finish())
}
