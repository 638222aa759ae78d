//! Command-line front end.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use output::g12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "laplace-kinetics",
    version,
    about = "Laplace cascade and exact Verhulst kinetics under telegraph noise"
)]
pub struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON object of default values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Model parameters in user units: `ẋ = p1 x + p2 x² + α(t) q2 x²`, noise
/// switching frequency `2ν`. Exact rationals such as `-2` or `1/2` are accepted.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub q2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Laplace invariants h and k of the master system (exact).
    Invariants {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Chain of invariants under repeated Laplace transformations (exact).
    Chain {
        #[command(flatten)]
        params: ParamArgs,
        /// Transformations per direction.
        #[arg(long)]
        steps: Option<usize>,
        /// Largest polynomial degree allowed in coefficients.
        #[arg(long)]
        degree_cap: Option<usize>,
    },
    /// Closed-form W, W1 on an x grid at dimensionless times τ = p1 t (requires ν = p1).
    Exact {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial density: smooth:a=..,b=.. (default smooth:a=0.1,b=0.3) | bump:a=..,b=.. | uniform:a=..,b=..
        #[arg(long)]
        init: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<f64>,
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Exact mixed solution for all mass initially at x★ (requires ν = p1).
    Delta {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        x_star: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<f64>,
        /// Grid points for the continuous part.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Monte Carlo ensemble of noisy trajectories.
    Mc {
        #[command(flatten)]
        params: ParamArgs,
        /// delta:x=.. (default delta:x=0.5) | smooth:a=..,b=.. | bump:a=..,b=.. | uniform:a=..,b=..
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Histogram bins per checkpoint instead of raw samples.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Upwind finite-volume solution of the master equations (any ν).
    Pde {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial density, as for `mc` (default smooth:a=0.1,b=0.3).
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        cfl: Option<f64>,
        /// ν/p1; overrides the value implied by --nu and --p1.
        #[arg(long)]
        nu_ratio: Option<f64>,
        /// Grid end in units of the outer equilibrium 1/|p2 + q2|.
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<f64>,
    },
    /// Cross-check the closed form against Monte Carlo or the PDE solver.
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        mode: Option<CompareMode>,
        /// Initial density, as for `mc` (default delta:x=0.5 against MC, smooth:a=0.1,b=0.3 against PDE).
        #[arg(long)]
        init: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        cfl: Option<f64>,
    },
    /// Complete solution of u_xy + x u_xz − u_z = 0 on polynomial data.
    Dini {
        /// Run the randomized suite and report residuals.
        #[arg(long)]
        demo: bool,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        max_degree: Option<u32>,
        /// φ(a, b), polynomial in a and b.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        /// ψ(y, z), polynomial in y and z.
        #[arg(long, allow_hyphen_values = true)]
        psi: Option<String>,
        /// θ(y), polynomial in y.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CompareMode {
    ExactVsMc,
    ExactVsPde,
}

impl CompareMode {
    fn name(self) -> &'static str {
        match self {
            CompareMode::ExactVsMc => "exact-vs-mc",
            CompareMode::ExactVsPde => "exact-vs-pde",
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = match cli.threads {
        Some(0) => return Err(CliError::Validation("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(cli))?,
        None => commands::dispatch(cli)?,
    };
    emit(cli, &text)
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
