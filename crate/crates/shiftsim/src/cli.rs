use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::commands;
use crate::error::{CliError, Result};
use crate::suites::Suite;

#[derive(Debug, Parser)]
#[command(name = "shiftsim", version, about = "Randomly shifted curves: simulation, priors, posteriors and checks")]
pub struct Cli {
    /// Root seed; every output is a function of the flags and this seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Output file or directory (see each subcommand).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset; --out is the dataset JSON file.
    Simulate(SimulateArgs),
    /// Draw from a prior; --out is a directory.
    PriorSample(PriorSampleArgs),
    /// Sample a posterior; --out is a directory.
    Posterior(PosteriorArgs),
    /// Contraction table over sample sizes; --out is the CSV file.
    Contraction(ContractionArgs),
    /// Build (and optionally certify) a Fano net; --out is a directory.
    FanoNet(FanoNetArgs),
    /// Run a verification suite; --out is the report CSV.
    Verify(VerifyArgs),
    /// Tabulate modified Bessel functions; --out is the CSV file.
    BesselTable(BesselTableArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::PriorSample(_) => "prior-sample",
            Command::Posterior(_) => "posterior",
            Command::Contraction(_) => "contraction",
            Command::FanoNet(_) => "fano-net",
            Command::Verify(_) => "verify",
            Command::BesselTable(_) => "bessel-table",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Shape coefficients (series JSON).
    #[arg(long)]
    pub theta: PathBuf,
    /// Shift distribution (JSON with a "kind" tag).
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Observation cutoff L.
    #[arg(long)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Sieve,
    Dp,
    Smooth,
}

#[derive(Debug, Args, Serialize)]
pub struct PriorSampleArgs {
    #[arg(long, value_enum)]
    pub kind: PriorKind,
    /// key = value settings; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PosteriorArgs {
    /// Dataset JSON.
    #[arg(long)]
    pub data: PathBuf,
    /// key = value prior and sampler settings.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Gibbs sweeps, or importance draws.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Bins of the posterior mean shift density.
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Adaptive,
    Nonadaptive,
}

#[derive(Debug, Args, Serialize)]
pub struct ContractionArgs {
    /// Directory holding theta.json and g.json.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "50,200,800")]
    pub ns: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Preset::Adaptive)]
    pub preset: Preset,
    /// Smoothness for the rate column and the non-adaptive preset.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 8)]
    pub l_max: usize,
    #[arg(long, default_value_t = 1200)]
    pub steps: usize,
    #[arg(long, default_value_t = 400)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 3)]
    pub obs_cutoff: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub distance_draws: usize,
    #[arg(long, default_value_t = 2000)]
    pub distance_samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FanoNetArgs {
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.5)]
    pub nu: f64,
    /// Sobolev radius A.
    #[arg(long = "A", default_value_t = 2.0)]
    #[serde(rename = "A")]
    pub radius: f64,
    /// Fourier cutoff of the g_j (default 8p).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Also estimate the TV certificate.
    #[arg(long)]
    pub certify: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Random instances of the distances suite.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    /// Monte Carlo samples per estimate.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BesselTableArgs {
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    #[arg(long, default_value_t = 10.0)]
    pub a_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
}

/// Parse `args` (program name first) and run; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| CliError::Validation(format!("{}: --out is required", cli.command.name())))?;
    if cli.threads == 0 {
        return Err(CliError::Validation("--threads must be at least 1".into()));
    }
    let ctx = commands::Context { seed: cli.seed, threads: cli.threads, out, command: cli.command.name() };
    match &cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::PriorSample(a) => commands::prior_sample(&ctx, a),
        Command::Posterior(a) => commands::posterior(&ctx, a),
        Command::Contraction(a) => commands::contraction(&ctx, a),
        Command::FanoNet(a) => commands::fano_net(&ctx, a),
        Command::Verify(a) => commands::verify(&ctx, a),
        Command::BesselTable(a) => commands::bessel_table(&ctx, a),
    }
}
