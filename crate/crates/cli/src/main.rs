use std::path::PathBuf;
use std::process::ExitCode;

use abpole::config::{parse_config, Config};
use abpole::io::{write_outputs, Manifest};
use abpole::run::{self, Mode, Outcome, Overrides};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

/// Boundary asymptotics of half-flux Aharonov-Bohm eigenvalues on the half-disk.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Direction angle in radians; replaces the configured directions.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Vanishing order at the origin.
    #[arg(long)]
    j: Option<u32>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the reference mesh, or the slit pole mesh when --alpha is given.
    Mesh(Common),
    /// Lowest eigenvalues of the continuous or antiperiodic problem.
    Eig {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "continuous")]
        mode: Mode,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Frequency function of the unperturbed eigenfunction.
    Almgren(Common),
    /// Limit crack profile along one direction.
    LimitProfile(Common),
    /// Eigenvalue sweeps along rays.
    RaySweep(Common),
    /// Full verification: sweeps, limit identities and diagnostics.
    Verify(Common),
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Mesh(c) => ("mesh", c),
        Command::Eig { common, .. } => ("eig", common),
        Command::Almgren(c) => ("almgren", c),
        Command::LimitProfile(c) => ("limit-profile", c),
        Command::RaySweep(c) => ("ray-sweep", c),
        Command::Verify(c) => ("verify", c),
    };
    let cfg = match &common.config {
        Some(p) => parse_config(p)?,
        None => Config::default(),
    };
    let ov = Overrides { alpha: common.alpha, j: common.j, seed: common.seed };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .context("building the thread pool")?;
    let outcome: Outcome = pool.install(|| match &cli.command {
        Command::Mesh(_) => run::mesh(&cfg, &ov),
        Command::Eig { mode, count, .. } => run::eig(&cfg, &ov, *mode, *count),
        Command::Almgren(_) => run::almgren(&cfg, &ov),
        Command::LimitProfile(_) => run::limit_profile(&cfg, &ov),
        Command::RaySweep(_) => run::ray_sweep(&cfg, &ov),
        Command::Verify(_) => run::verify(&cfg, &ov),
    })?;
    for l in &outcome.lines {
        println!("{l}");
    }
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let manifest = Manifest {
        command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
        config_hash: cfg.hash.clone(),
        timings: outcome.timings.clone(),
        files: Vec::new(),
    };
    write_outputs(&dir, &outcome.files, manifest).with_context(|| format!("writing outputs to {}", dir.display()))?;
    println!("{name}: wrote {} file(s) to {}", outcome.files.len(), dir.display());
    Ok(outcome.pass)
}
