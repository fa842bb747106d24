//! `mems4`: command-line front end for the radially symmetric fourth-order
//! MEMS model. Five subcommands cover the stationary branch (`continue`),
//! the fold (`lambda-star`), the touchdown endpoint profile (`endpoint`),
//! the dynamic models (`evolve`), and the built-in check suite (`validate`).
//!
//! Every run is reproducible from its command line plus an optional config
//! file; outputs are plain CSV and static SVG under `--out`. Exit codes:
//! 0 success, 2 configuration error, 3 solver failure, 4 validation failure.

mod commands;
mod config;
mod svg;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Failure with its process exit code: configuration 2, solver 3,
/// validation 4. Clap's own usage errors also exit 2.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(String),
    Validation(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<mems4_core::Error> for Failure {
    fn from(e: mems4_core::Error) -> Self {
        use mems4_core::Error;
        match e {
            // bad inputs, not solver breakdowns
            Error::InvalidParameter(_) | Error::GridMismatch => Failure::Config(e.to_string()),
            Error::Domain { .. }
            | Error::SingularPivot { .. }
            | Error::NoConvergence { .. }
            | Error::NoFold
            | Error::NoBracket { .. } => Failure::Solver(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mems4",
    version,
    about = "Radially symmetric fourth-order MEMS model: stationary branches, fold location, endpoint profiles, dynamics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the stationary branch through the fold; writes branch.csv,
    /// branch.svg, final_profile.csv.
    Continue(CommonArgs),
    /// Locate and refine the fold; writes fold.csv.
    LambdaStar(CommonArgs),
    /// Tabulate the touchdown endpoint profile; writes omega.csv, omega.svg.
    Endpoint(CommonArgs),
    /// Integrate the parabolic (gamma = 0) or hyperbolic (gamma > 0) model;
    /// writes trace.csv, trace.svg.
    Evolve(CommonArgs),
    /// Run the built-in check suite on one grid; exits 4 on any failure.
    Validate(CommonArgs),
}

/// Shared knobs. Precedence: built-in defaults, then `--config`, then flags.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Config file of key=value lines; '#' starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Space dimension, 1 or 2.
    #[arg(long, short = 'd')]
    d: Option<u32>,
    /// Bending stiffness B > 0.
    #[arg(long, short = 'B', alias = "B")]
    bending: Option<f64>,
    /// Tension T >= 0.
    #[arg(long, short = 'T', alias = "T")]
    tension: Option<f64>,
    /// Drive parameter lambda >= 0.
    #[arg(long)]
    lambda: Option<f64>,
    /// Inertia coefficient gamma >= 0; zero selects the parabolic model.
    #[arg(long)]
    gamma: Option<f64>,
    /// Grid intervals (nodes r_i = i/n).
    #[arg(long, short = 'n')]
    n: Option<usize>,
    /// Time horizon for evolve.
    #[arg(long)]
    horizon: Option<f64>,
    /// Newton residual tolerance.
    #[arg(long)]
    newton_tol: Option<f64>,
    /// Eigensolve residual tolerance.
    #[arg(long)]
    eig_tol: Option<f64>,
    /// Relative stall tolerance of the fold refinement.
    #[arg(long)]
    fold_tol: Option<f64>,
    /// Touchdown threshold on the gap 1 + min u.
    #[arg(long)]
    eps_td: Option<f64>,
    /// Continuation stops below this drive once folded.
    #[arg(long)]
    lambda_stop: Option<f64>,
    /// Continuation stops when the gap closes to this.
    #[arg(long)]
    eps_min: Option<f64>,
    /// Smallest arclength step.
    #[arg(long)]
    ds_min: Option<f64>,
    /// Largest arclength step.
    #[arg(long)]
    ds_max: Option<f64>,
    /// Initial time step.
    #[arg(long)]
    dt0: Option<f64>,
    /// Largest time step.
    #[arg(long)]
    dt_max: Option<f64>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the sweep execution order; numerics are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial data for evolve: zero, phi1:<alpha>, or file:<path>.
    #[arg(long)]
    data: Option<String>,
    /// Terminal-profile CSV (r,u) to compare against the endpoint profile.
    #[arg(long)]
    branch: Option<PathBuf>,
    /// lambda-star: rerun at 2n and report the fold drift.
    #[arg(long)]
    refine: bool,
    /// evolve: run the continuation first so the sharp bound and the M
    /// pairing apply.
    #[arg(long)]
    with_fold: bool,
    /// Fan one key over key=start:step:stop across a worker pool, one
    /// subdirectory of --out per value.
    #[arg(long, value_name = "KEY=A:STEP:B")]
    sweep: Option<String>,
}

impl CommonArgs {
    fn build(&self) -> Result<RunConfig, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        if let Some(d) = self.d {
            cfg.apply("d", &d.to_string())?;
        }
        if let Some(v) = self.bending {
            cfg.bending = v;
        }
        if let Some(v) = self.tension {
            cfg.tension = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.newton_tol {
            cfg.newton_tol = v;
        }
        if let Some(v) = self.eig_tol {
            cfg.eig_tol = v;
        }
        if let Some(v) = self.fold_tol {
            cfg.fold_tol = v;
        }
        if let Some(v) = self.eps_td {
            cfg.eps_td = v;
        }
        if let Some(v) = self.lambda_stop {
            cfg.lambda_stop = v;
        }
        if let Some(v) = self.eps_min {
            cfg.eps_min = v;
        }
        if let Some(v) = self.ds_min {
            cfg.ds_min = v;
        }
        if let Some(v) = self.ds_max {
            cfg.ds_max = v;
        }
        if let Some(v) = self.dt0 {
            cfg.dt0 = v;
        }
        if let Some(v) = self.dt_max {
            cfg.dt_max = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.data {
            cfg.data = v.clone();
        }
        if let Some(v) = &self.branch {
            cfg.branch = Some(v.clone());
        }
        if self.refine {
            cfg.refine = true;
        }
        if self.with_fold {
            cfg.with_fold = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let (args, runner): (&CommonArgs, commands::Runner) = match &cli.cmd {
        Command::Continue(a) => (a, commands::cmd_continue),
        Command::LambdaStar(a) => (a, commands::cmd_lambda_star),
        Command::Endpoint(a) => (a, commands::cmd_endpoint),
        Command::Evolve(a) => (a, commands::cmd_evolve),
        Command::Validate(a) => (a, commands::cmd_validate),
    };
    let cfg = args.build()?;
    match &args.sweep {
        Some(spec) => commands::run_sweep(&cfg, spec, runner),
        None => runner(&cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = dispatch(&cli) {
        eprintln!("error: {}", f.message());
        std::process::exit(f.code());
    }
}
