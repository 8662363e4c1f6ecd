//! Run configuration. Values come from built-in defaults, then from the
//! key = value file named by `SOS_APPROX_CONFIG`, then from command-line
//! flags, each layer overriding the previous one.
//!
//! | key           | default                         |
//! |---------------|---------------------------------|
//! | `input`       | none: use p_{n,d} = Σ m*m       |
//! | `output`      | none: write to stdout           |
//! | `n`           | 3                               |
//! | `d`           | from the input, else 1          |
//! | `d_max`       | 8                               |
//! | `full_range`  | false                           |
//! | `eps`         | none (required by `approx`, `bounds`) |
//! | `flavor`      | from the input, else commutative |
//! | `sos_norm`    | none: computed                  |
//! | `seed`        | 1                               |
//! | `jobs`        | available parallelism           |
//! | `tol_primal`  | 1e-8                            |
//! | `tol_dual`    | 1e-8                            |
//! | `tol_gap`     | 1e-7                            |
//! | `max_iter`    | 50000                           |
//! | `resolution`  | 6                               |
//!
//! Keys may use `-` or `_`. Blank lines and lines starting with `#` are
//! ignored.

use std::path::PathBuf;

use serde::Serialize;
use sos_approx::{Flavor, SolverOptions};

use crate::error::{CliError, CliResult};

pub const CONFIG_ENV: &str = "SOS_APPROX_CONFIG";

/// Largest `d_max` accepted by `figure` without `full_range`.
pub const DESK_D_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SosNorm,
    Approx,
    Feasible,
    Bounds,
    Figure,
    Verify,
}

/// One layer of settings; `None` leaves the lower layer in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub d_max: Option<usize>,
    pub full_range: Option<bool>,
    pub eps: Option<f64>,
    pub flavor: Option<Flavor>,
    pub sos_norm: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub tol_primal: Option<f64>,
    pub tol_dual: Option<f64>,
    pub tol_gap: Option<f64>,
    pub max_iter: Option<usize>,
    pub resolution: Option<usize>,
}

impl Overrides {
    /// `other` wins wherever it is set.
    pub fn merged(self, other: Overrides) -> Overrides {
        Overrides {
            input: other.input.or(self.input),
            output: other.output.or(self.output),
            n: other.n.or(self.n),
            d: other.d.or(self.d),
            d_max: other.d_max.or(self.d_max),
            full_range: other.full_range.or(self.full_range),
            eps: other.eps.or(self.eps),
            flavor: other.flavor.or(self.flavor),
            sos_norm: other.sos_norm.or(self.sos_norm),
            seed: other.seed.or(self.seed),
            jobs: other.jobs.or(self.jobs),
            tol_primal: other.tol_primal.or(self.tol_primal),
            tol_dual: other.tol_dual.or(self.tol_dual),
            tol_gap: other.tol_gap.or(self.tol_gap),
            max_iter: other.max_iter.or(self.max_iter),
            resolution: other.resolution.or(self.resolution),
        }
    }

    /// Parses a key = value config file.
    pub fn parse(text: &str) -> CliResult<Overrides> {
        let mut o = Overrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let bad = |msg: String| CliError::Parse(format!("config line {lineno}: {msg}"));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            fn num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, String> {
                value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
            }
            let r: Result<(), String> = (|| {
                match key.as_str() {
                    "input" => o.input = Some(PathBuf::from(value)),
                    "output" => o.output = Some(PathBuf::from(value)),
                    "n" => o.n = Some(num(&key, value)?),
                    "d" => o.d = Some(num(&key, value)?),
                    "d_max" => o.d_max = Some(num(&key, value)?),
                    "full_range" => o.full_range = Some(num(&key, value)?),
                    "eps" => o.eps = Some(num(&key, value)?),
                    "flavor" => o.flavor = Some(parse_flavor(value)?),
                    "sos_norm" => o.sos_norm = Some(num(&key, value)?),
                    "seed" => o.seed = Some(num(&key, value)?),
                    "jobs" => o.jobs = Some(num(&key, value)?),
                    "tol_primal" => o.tol_primal = Some(num(&key, value)?),
                    "tol_dual" => o.tol_dual = Some(num(&key, value)?),
                    "tol_gap" => o.tol_gap = Some(num(&key, value)?),
                    "max_iter" => o.max_iter = Some(num(&key, value)?),
                    "resolution" => o.resolution = Some(num(&key, value)?),
                    other => return Err(format!("unknown key {other:?}")),
                }
                Ok(())
            })();
            r.map_err(bad)?;
        }
        Ok(o)
    }

    /// Reads the file named by `SOS_APPROX_CONFIG`, if set.
    pub fn from_env() -> CliResult<Overrides> {
        match std::env::var_os(CONFIG_ENV) {
            None => Ok(Overrides::default()),
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(PathBuf::from(&path), e))?;
                Overrides::parse(&text)
            }
        }
    }
}

pub fn parse_flavor(s: &str) -> Result<Flavor, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "commutative" => Ok(Flavor::Commutative),
        "free" => Ok(Flavor::Free),
        other => Err(format!("unknown flavor {other:?} (expected commutative or free)")),
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub n: usize,
    pub d: Option<usize>,
    pub d_max: usize,
    pub full_range: bool,
    pub eps: Option<f64>,
    pub flavor: Option<Flavor>,
    pub sos_norm: Option<f64>,
    pub seed: u64,
    pub jobs: usize,
    pub solver: SolverOptions,
}

impl RunConfig {
    pub fn resolve(command: Command, o: Overrides) -> CliResult<RunConfig> {
        let defaults = SolverOptions::default();
        let solver = SolverOptions {
            tol_primal: o.tol_primal.unwrap_or(defaults.tol_primal),
            tol_dual: o.tol_dual.unwrap_or(defaults.tol_dual),
            tol_gap: o.tol_gap.unwrap_or(defaults.tol_gap),
            max_iter: o.max_iter.unwrap_or(defaults.max_iter),
            feasibility_resolution: o.resolution.unwrap_or(defaults.feasibility_resolution),
        };
        let cfg = RunConfig {
            command,
            input: o.input,
            output: o.output,
            n: o.n.unwrap_or(3),
            d: o.d,
            d_max: o.d_max.unwrap_or(DESK_D_MAX),
            full_range: o.full_range.unwrap_or(false),
            eps: o.eps,
            flavor: o.flavor,
            sos_norm: o.sos_norm,
            seed: o.seed.unwrap_or(1),
            jobs: o.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            solver,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if self.n == 0 {
            return usage("n must be at least 1".into());
        }
        if self.jobs == 0 {
            return usage("jobs must be at least 1".into());
        }
        if self.solver.max_iter == 0 {
            return usage("max-iter must be at least 1".into());
        }
        if self.solver.feasibility_resolution == 0 {
            return usage("resolution must be at least 1".into());
        }
        positive("tol-primal", self.solver.tol_primal)?;
        positive("tol-dual", self.solver.tol_dual)?;
        positive("tol-gap", self.solver.tol_gap)?;
        if let Some(e) = self.eps {
            positive("eps", e)?;
        }
        if let Some(s) = self.sos_norm {
            if !(s >= 0.0 && s.is_finite()) {
                return usage(format!("sos-norm must be nonnegative and finite, got {s}"));
            }
        }
        if self.command == Command::Figure {
            if self.d_max == 0 {
                return usage("d-max must be at least 1".into());
            }
            if self.d_max > DESK_D_MAX && !self.full_range {
                return usage(format!(
                    "d-max {} exceeds {DESK_D_MAX}; pass --full-range to run the larger sweep",
                    self.d_max
                ));
            }
        }
        Ok(())
    }

    pub fn require_eps(&self) -> CliResult<f64> {
        self.eps.ok_or_else(|| CliError::Usage(format!("{:?} needs --eps", self.command)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_dashes() {
        let o = Overrides::parse("# solver\ntol-primal = 1e-6\n\nmax_iter=100\nflavor = free\nfull_range = true\n").unwrap();
        assert_eq!(o.tol_primal, Some(1e-6));
        assert_eq!(o.max_iter, Some(100));
        assert_eq!(o.flavor, Some(Flavor::Free));
        assert_eq!(o.full_range, Some(true));
        assert_eq!(o.n, None);
    }

    #[test]
    fn reports_the_offending_line() {
        let e = Overrides::parse("n = 3\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = Overrides::parse("n = three\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        assert_eq!(Overrides::parse("no equals sign").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn flags_override_file() {
        let file = Overrides { n: Some(4), max_iter: Some(10), ..Default::default() };
        let flags = Overrides { n: Some(2), ..Default::default() };
        let cfg = RunConfig::resolve(Command::SosNorm, file.merged(flags)).unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.solver.max_iter, 10);
        assert_eq!(cfg.solver.tol_gap, SolverOptions::default().tol_gap);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |o: Overrides, cmd| RunConfig::resolve(cmd, o).unwrap_err().exit_code();
        assert_eq!(bad(Overrides { eps: Some(0.0), ..Default::default() }, Command::Approx), 2);
        assert_eq!(bad(Overrides { eps: Some(-1.0), ..Default::default() }, Command::Approx), 2);
        assert_eq!(bad(Overrides { d_max: Some(9), ..Default::default() }, Command::Figure), 2);
        assert_eq!(bad(Overrides { jobs: Some(0), ..Default::default() }, Command::Figure), 2);
        let ok = Overrides { d_max: Some(9), full_range: Some(true), ..Default::default() };
        assert!(RunConfig::resolve(Command::Figure, ok).is_ok());
    }
}
