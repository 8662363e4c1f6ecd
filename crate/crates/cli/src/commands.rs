use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use sos_approx::approx::{approximate, bound_report, SosCertificate};
use sos_approx::checks::run_all;
use sos_approx::gram::binomial;
use sos_approx::sdp::{
    dual_bound_from, free_sos_norm_closed_form, solve_trace_min, sos_feasible, DualFunctional, Feasibility, SdpStatus,
};
use sos_approx::{build_constraints, Flavor, Polynomial, SolverOptions, SquareBasis};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::emit;

pub const FREE_TAG: &str = "closed-form (free)";
pub const SDP_TAG: &str = "trace-minimization";
pub const FIGURE_HEADER: &str = "d,sos_norm,sqrt_dim_bound,identity_trace";

pub fn run_command(cfg: &RunConfig) -> CliResult<()> {
    match cfg.command {
        Command::SosNorm => cmd_sos_norm(cfg),
        Command::Approx => cmd_approx(cfg),
        Command::Feasible => cmd_feasible(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Figure => cmd_figure(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// p_{n,d} = Σ_{m ∈ basis} m* m.
pub fn sum_of_basis_squares(flavor: Flavor, n: usize, d: usize) -> CliResult<Polynomial> {
    let basis = SquareBasis::new(flavor, n, d)?;
    let terms = basis.terms().iter().map(|t| {
        let sq = t.involution().mul(t).expect("terms of one basis multiply");
        (sq, sos_approx::Cx::new(1.0, 0.0))
    });
    Ok(Polynomial::from_terms(flavor, n, terms)?)
}

/// The polynomial from `--input`, or p_{n,d} when no input is given, with
/// the basis of half its degree.
pub fn load_problem(cfg: &RunConfig) -> CliResult<(Polynomial, SquareBasis)> {
    let Some(path) = &cfg.input else {
        let flavor = cfg.flavor.unwrap_or(Flavor::Commutative);
        let d = cfg.d.unwrap_or(1);
        let p = sum_of_basis_squares(flavor, cfg.n, d)?;
        return Ok((p, SquareBasis::new(flavor, cfg.n, d)?));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let p = Polynomial::from_json(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if let Some(f) = cfg.flavor {
        if f != p.flavor() {
            return Err(CliError::Usage(format!(
                "--flavor {f:?} does not match the {:?} input",
                p.flavor()
            )));
        }
    }
    let d = match (p.degree(), cfg.d) {
        (Some(deg), _) if deg % 2 == 1 => {
            return Err(CliError::Parse(format!("{}: degree {deg} is odd", path.display())))
        }
        (Some(deg), Some(d)) if deg != 2 * d => {
            return Err(CliError::Usage(format!("--d {d} does not match the input degree {deg}")))
        }
        (Some(deg), _) => deg / 2,
        (None, d) => d.unwrap_or(1),
    };
    let basis = SquareBasis::new(p.flavor(), p.n_vars(), d)?;
    Ok((p, basis))
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn functional_summary(f: &DualFunctional<f64>) -> String {
    format!(
        "separating functional with phi(a) = {:e} and max eigenvalue of sum y_l A_l = {:e} ({} values)",
        f.objective,
        f.max_eigenvalue,
        f.values.len()
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalReport {
    pub values: Vec<f64>,
    pub max_eigenvalue: f64,
    pub objective: f64,
}

impl From<&DualFunctional<f64>> for FunctionalReport {
    fn from(f: &DualFunctional<f64>) -> Self {
        Self { values: f.values.clone(), max_eigenvalue: f.max_eigenvalue, objective: f.objective }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SosNormReport {
    pub flavor: Flavor,
    pub n: usize,
    pub d: usize,
    pub value: f64,
    pub method: &'static str,
    pub status: SdpStatus,
    pub dual_bound: f64,
    /// value − dual_bound.
    pub gap: f64,
    pub primal_residual: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face_dim: Option<usize>,
}

/// Value, status and the certified dual lower bound. Free inputs take the
/// value from the unique Gram matrix.
pub fn sos_norm_report(p: &Polynomial, basis: &SquareBasis, opts: &SolverOptions) -> CliResult<SosNormReport> {
    if basis.flavor() == Flavor::Free {
        if let Feasibility::Infeasible { certificate } = sos_feasible(p, basis, opts)? {
            return Err(CliError::Infeasible(functional_summary(&certificate)));
        }
    }
    let c = build_constraints(p, basis)?;
    let solution = solve_trace_min(&c, opts)?;
    match solution.status {
        SdpStatus::Infeasible => {
            let cert = solution.infeasibility_certificate.as_ref().expect("infeasible status carries a certificate");
            return Err(CliError::Infeasible(functional_summary(cert)));
        }
        SdpStatus::MaxIter if basis.flavor() == Flavor::Commutative => {
            if let Feasibility::Infeasible { certificate } = sos_feasible(p, basis, opts)? {
                return Err(CliError::Infeasible(functional_summary(&certificate)));
            }
            return Err(CliError::Solver(format!(
                "no convergence after {} iterations (primal residual {:e}, gap {:e})",
                solution.iterations, solution.primal_residual, solution.gap
            )));
        }
        _ => {}
    }
    let (value, method) = match basis.flavor() {
        Flavor::Free => (free_sos_norm_closed_form(p, basis.degree())?, FREE_TAG),
        Flavor::Commutative => (solution.objective, SDP_TAG),
    };
    let status = solution.status;
    let primal_residual = solution.primal_residual;
    let iterations = solution.iterations;
    let face_dim = solution.face_dim;
    let dual = dual_bound_from(&c, solution)?;
    Ok(SosNormReport {
        flavor: basis.flavor(),
        n: basis.n_vars(),
        d: basis.degree(),
        value,
        method,
        status,
        dual_bound: dual.value,
        gap: value - dual.value,
        primal_residual,
        iterations,
        face_dim,
    })
}

fn cmd_sos_norm(cfg: &RunConfig) -> CliResult<()> {
    let (p, basis) = load_problem(cfg)?;
    let report = sos_norm_report(&p, &basis, &cfg.solver)?;
    emit(cfg.output.as_deref(), &to_json(&report))
}

#[derive(Debug, Clone, Serialize)]
struct ApproxSummary<'a> {
    squares: usize,
    error: f64,
    epsilon: f64,
    sos_norm: f64,
    rank_cap: usize,
    route: &'a str,
    output: &'a Path,
}

fn cmd_approx(cfg: &RunConfig) -> CliResult<()> {
    let eps = cfg.require_eps()?;
    let (p, basis) = load_problem(cfg)?;
    let cert = approximate(&p, &basis, eps, &cfg.solver)?;
    let json = cert.to_json();
    SosCertificate::<f64>::from_json(&json)?.verify()?;
    let mut text = json;
    text.push('\n');
    emit(cfg.output.as_deref(), &text)?;
    if let Some(out) = &cfg.output {
        let route = serde_json::to_value(cert.route).expect("serializable");
        let summary = ApproxSummary {
            squares: cert.len(),
            error: cert.error,
            epsilon: eps,
            sos_norm: cert.sos_norm,
            rank_cap: cert.rank_cap,
            route: route.as_str().unwrap_or_default(),
            output: out,
        };
        emit(None, &to_json(&summary))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct FeasibleReport {
    feasible: bool,
    flavor: Flavor,
    n: usize,
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_trace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<FunctionalReport>,
}

/// A certified "no" is a complete answer: the report is written and the
/// exit code is 3.
fn cmd_feasible(cfg: &RunConfig) -> CliResult<()> {
    let (p, basis) = load_problem(cfg)?;
    let mut report = FeasibleReport {
        feasible: false,
        flavor: basis.flavor(),
        n: basis.n_vars(),
        d: basis.degree(),
        witness_trace: None,
        certificate: None,
    };
    match sos_feasible(&p, &basis, &cfg.solver)? {
        Feasibility::Feasible { witness } => {
            report.feasible = true;
            report.witness_trace = Some(witness.trace());
            emit(cfg.output.as_deref(), &to_json(&report))
        }
        Feasibility::Infeasible { certificate } => {
            report.certificate = Some((&certificate).into());
            emit(cfg.output.as_deref(), &to_json(&report))?;
            Err(CliError::Infeasible(functional_summary(&certificate)))
        }
        Feasibility::Inconclusive { solution } => Err(CliError::Solver(format!(
            "no verdict after {} iterations (primal residual {:e})",
            solution.iterations, solution.primal_residual
        ))),
    }
}

fn cmd_bounds(cfg: &RunConfig) -> CliResult<()> {
    let eps = cfg.require_eps()?;
    let (p, basis) = load_problem(cfg)?;
    let sos = match cfg.sos_norm {
        Some(v) => v,
        None => sos_norm_report(&p, &basis, &cfg.solver)?.value,
    };
    let report = bound_report(basis.flavor(), basis.n_vars(), basis.degree(), eps, sos)?;
    emit(cfg.output.as_deref(), &to_json(&report))
}

/// One CSV row; `sos_norm` is NaN when the solver failed for that d.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub d: usize,
    pub sos_norm: f64,
    pub sqrt_dim_bound: f64,
    pub identity_trace: u128,
}

impl FigureRow {
    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.d, self.sos_norm, self.sqrt_dim_bound, self.identity_trace)
    }
}

fn figure_row(n: usize, d: usize, opts: &SolverOptions) -> (FigureRow, Option<String>) {
    let dim_vv = binomial((2 * d + n - 1) as u128, (n - 1) as u128).unwrap_or(u128::MAX);
    let identity_trace = binomial((d + n - 1) as u128, (n - 1) as u128).unwrap_or(u128::MAX);
    let value = sum_of_basis_squares(Flavor::Commutative, n, d)
        .and_then(|p| Ok(sos_norm_report(&p, &SquareBasis::new(Flavor::Commutative, n, d)?, opts)?.value));
    let (sos_norm, failure) = match value {
        Ok(v) => (v, None),
        Err(e) => (f64::NAN, Some(e.to_string())),
    };
    (FigureRow { d, sos_norm, sqrt_dim_bound: (dim_vv as f64).sqrt(), identity_trace }, failure)
}

/// Rows d = 1..=d_max computed by `jobs` worker threads, returned in d-order.
pub fn figure_rows(n: usize, d_max: usize, jobs: usize, opts: &SolverOptions) -> Vec<(FigureRow, Option<String>)> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<(FigureRow, Option<String>)>>> = Mutex::new(vec![None; d_max]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(d_max) {
            scope.spawn(|| loop {
                // largest d first so the slowest rows start early
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= d_max {
                    break;
                }
                let d = d_max - k;
                let row = figure_row(n, d, opts);
                slots.lock().expect("no worker panicked")[d - 1] = Some(row);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every row computed")).collect()
}

fn cmd_figure(cfg: &RunConfig) -> CliResult<()> {
    let rows = figure_rows(cfg.n, cfg.d_max, cfg.jobs, &cfg.solver);
    let mut csv = String::from(FIGURE_HEADER);
    csv.push('\n');
    for (row, failure) in &rows {
        if let Some(msg) = failure {
            eprintln!("d = {}: {msg}", row.d);
        }
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    emit(cfg.output.as_deref(), &csv)
}

/// One JSON object per line; nonzero exit if any property fails.
fn cmd_verify(cfg: &RunConfig) -> CliResult<()> {
    let reports = run_all(cfg.seed, &cfg.solver)?;
    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&serde_json::to_string(r).expect("serializable report"));
        lines.push('\n');
    }
    emit(cfg.output.as_deref(), &lines)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.property).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("failed properties: {}", failed.join(", "))))
    }
}
