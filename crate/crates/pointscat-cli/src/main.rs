//! `pointscat` — batch front-end for the point-scatterer spectral toolkit.
//!
//! Subcommands: `spectrum`, `scars`, `stats`, `dirichlet`, `oracle`.
//! Every run writes CSV/JSON reports into `--out` together with a manifest
//! whose hash is embedded in each file; identical configurations produce
//! byte-identical outputs. Exit codes: 0 success, 2 configuration error,
//! 3 numerical failure, 4 capacity exceeded.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "pointscat", version, about = "Point scatterer on a diophantine torus: spectra, momentum measures, spectral statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file mirroring the flags; flags override the file
    #[arg(long)]
    config: Option<PathBuf>,

    /// gamma = a^4: `golden`, `sqrt2`, or a decimal literal
    #[arg(long)]
    gamma: Option<String>,

    /// Enumeration ceiling for the norm table
    #[arg(long = "X")]
    x: Option<f64>,

    /// Self-adjoint extension phase in (-pi, pi)
    #[arg(long)]
    phi: Option<f64>,

    /// `torus` or `dirichlet`
    #[arg(long)]
    mode: Option<String>,

    /// Scatterer position as side-length fractions `t1,t2` (Dirichlet)
    #[arg(long)]
    z: Option<String>,

    /// Torus scatterer position `x1,x2` for phase-sensitive mixed elements
    #[arg(long)]
    x0: Option<String>,

    /// Filter exponent for the gap and inverse-square filters
    #[arg(long)]
    eps: Option<f64>,

    /// Largest angular harmonic for matrix elements
    #[arg(long = "k-max")]
    k_max: Option<i64>,

    /// Tail cutoff for the truncated spectral sums (default: X)
    #[arg(long)]
    cutoff: Option<f64>,

    /// `integral` (density tail correction) or `hard` (plain truncation)
    #[arg(long = "tail-mode")]
    tail_mode: Option<String>,

    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,

    /// Re-check fast statistics against the brute-force oracles
    #[arg(long)]
    oracle: bool,

    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,

    /// Eigenvalue strategy: `weak`, `midpoint`, `offset:<c>`, `custom:<v1,v2,...>`
    #[arg(long)]
    strategy: Option<String>,

    /// Working precision for gamma-dependent reals, in decimal digits
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Norm table and perturbed spectrum (norms.csv, eigenvalues.csv, measures.csv)
    Spectrum(CommonArgs),
    /// Momentum-space scarring diagnostics (scar_deviation.csv, scar_summary.json)
    Scars(CommonArgs),
    /// Spectral statistics (paircorr.csv, gaps.csv, clumping.csv, lemma_checks.json)
    Stats(CommonArgs),
    /// Dirichlet rectangle pipeline (delta weights, spectrum, scar elements)
    Dirichlet(CommonArgs),
    /// Brute-force verification of the fast paths at small X (oracle_report.json)
    Oracle(CommonArgs),
}

fn overrides(args: CommonArgs) -> Overrides {
    Overrides {
        gamma: args.gamma,
        x: args.x,
        phi: args.phi,
        mode: args.mode,
        z: args.z,
        x0: args.x0,
        eps: args.eps,
        k_max: args.k_max,
        cutoff: args.cutoff,
        tail_mode: args.tail_mode,
        out: args.out,
        oracle: args.oracle,
        threads: args.threads,
        strategy: args.strategy,
        precision_digits: args.precision,
        config: args.config,
    }
}

fn run() -> pointscat::Result<()> {
    let cli = Cli::parse();
    let (args, command): (CommonArgs, fn(&RunConfig) -> pointscat::Result<()>) =
        match cli.command {
            Command::Spectrum(a) => (a, commands::cmd_spectrum),
            Command::Scars(a) => (a, commands::cmd_scars),
            Command::Stats(a) => (a, commands::cmd_stats),
            Command::Dirichlet(a) => (a, commands::cmd_dirichlet),
            Command::Oracle(a) => (a, commands::cmd_oracle),
        };
    let cfg = RunConfig::resolve(overrides(args))?;
    if let Some(threads) = cfg.threads {
        // a second build_global in the same process is harmless; ignore it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    command(&cfg)
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
