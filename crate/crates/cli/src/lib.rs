//! Command-line front end for the `sos_approx` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sos_approx::Flavor;

use config::{Command, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sos-approx", version, about = "Sums of Hermitian squares: sos-norms, short approximate decompositions and bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CommandArg {
    /// Trace-minimal sos-norm with solver status and dual lower bound
    SosNorm,
    /// Approximate the input by few squares and write the certificate
    Approx,
    /// Decide whether the input is a sum of squares over its basis
    Feasible,
    /// Square-count bounds for a basis, ε and sos-norm
    Bounds,
    /// CSV of sos-norm(p_{n,d}) against the dimension bound, d = 1..d-max
    Figure,
    /// Run the property suites on seeded random instances (JSON lines)
    Verify,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::SosNorm => Command::SosNorm,
            CommandArg::Approx => Command::Approx,
            CommandArg::Feasible => Command::Feasible,
            CommandArg::Bounds => Command::Bounds,
            CommandArg::Figure => Command::Figure,
            CommandArg::Verify => Command::Verify,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Commutative,
    Free,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Commutative => Flavor::Commutative,
            FlavorArg::Free => Flavor::Free,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Polynomial JSON file; without it, p_{n,d} = Σ m*m over the basis is used
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file (written atomically); stdout if omitted
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Number of variables [default: 3]
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Half-degree of the basis [default: from the input, else 1]
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Last d of the figure sweep [default: 8]
    #[arg(long = "d-max", global = true)]
    pub d_max: Option<usize>,
    /// Allow figure sweeps past d = 8
    #[arg(long = "full-range", global = true)]
    pub full_range: bool,
    /// Approximation tolerance ε > 0
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub flavor: Option<FlavorArg>,
    /// Use this sos-norm value in `bounds` instead of computing it
    #[arg(long = "sos-norm", global = true)]
    pub sos_norm: Option<f64>,
    /// Seed for randomized instances [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative primal residual tolerance [default: 1e-8]
    #[arg(long = "tol-primal", global = true)]
    pub tol_primal: Option<f64>,
    /// Relative duality gap tolerance [default: 1e-7]
    #[arg(long = "tol-gap", global = true)]
    pub tol_gap: Option<f64>,
    /// Solver iteration cap [default: 50000]
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Sphere sampling resolution for the negativity test [default: 6]
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Worker threads for the figure sweep [default: available cores]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

impl From<Flags> for Overrides {
    fn from(f: Flags) -> Self {
        Overrides {
            input: f.input,
            output: f.output,
            n: f.n,
            d: f.d,
            d_max: f.d_max,
            full_range: f.full_range.then_some(true),
            eps: f.eps,
            flavor: f.flavor.map(Into::into),
            sos_norm: f.sos_norm,
            seed: f.seed,
            jobs: f.jobs,
            tol_primal: f.tol_primal,
            tol_dual: None,
            tol_gap: f.tol_gap,
            max_iter: f.max_iter,
            resolution: f.resolution,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = Overrides::from_env()
        .map(|file| file.merged(cli.flags.into()))
        .and_then(|o| RunConfig::resolve(cli.command.into(), o))
        .and_then(|cfg| commands::run_command(&cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sos-approx: {e}");
            e.exit_code()
        }
    }
}
