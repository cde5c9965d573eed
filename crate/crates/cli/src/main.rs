//! Command-line driver: every pipeline stage as a subcommand, configured by
//! a TOML file, with deterministic seeds and CSV/JSON artifacts.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::RunConfig;
use output::OutputWriter;

#[derive(Parser)]
#[command(
    name = "doublewell",
    version,
    about = "Tunneling-time laboratory for 1D double-well potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(short, long, global = true, default_value = "doublewell.toml")]
    config: PathBuf,

    /// Output directory; overrides DOUBLEWELL_OUT_DIR and [output].dir.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Base RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker-thread override for ensemble stages (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Grid-point override for solvers.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound levels and wavefunction export.
    Solve,
    /// Mean exit time by quadrature.
    Mfpt,
    /// One stochastic trajectory, with optional path/energy recording.
    Simulate,
    /// Parallel first-passage ensemble.
    Ensemble,
    /// Exponential tail fit of a stored ensemble.
    TailFit,
    /// Square-well mean exit time over (d, k0) grids.
    DswScan,
    /// Barrier integral and period quantities.
    Wkb,
    /// Two-state over exit-time ratio scans.
    RatioScan,
    /// End-to-end ammonia inversion pipeline.
    Ammonia,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Mfpt => "mfpt",
            Command::Simulate => "simulate",
            Command::Ensemble => "ensemble",
            Command::TailFit => "tail-fit",
            Command::DswScan => "dsw-scan",
            Command::Wkb => "wkb",
            Command::RatioScan => "ratio-scan",
            Command::Ammonia => "ammonia",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let payload = serde_json::json!({
                "error": format!("{err:#}"),
                "subcommand": name,
            });
            println!("{payload}");
            // Config-shaped problems exit 2, runtime failures exit 1.
            let msg = format!("{err:#}");
            if msg.contains("config") || msg.contains("unknown") {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    let (cfg, raw_text) = RunConfig::load(&cli.config)?;

    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("DOUBLEWELL_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let mut cfg = cfg;
    if let Some(gp) = cli.grid_points {
        apply_grid_points(&mut cfg, gp);
    }

    let overrides = format!(
        "seed={:?};workers={:?};grid_points={:?}",
        cli.seed, cli.workers, cli.grid_points
    );
    let seed = cli.seed.unwrap_or_else(|| default_seed(&cfg, &cli.command));
    let mut out = OutputWriter::new(out_dir, cli.command.name(), &raw_text, &overrides, seed);

    let summary = match &cli.command {
        Command::Solve => commands::solve::run(&cfg, &mut out)?,
        Command::Mfpt => commands::mfpt::run(&cfg, &mut out)?,
        Command::Simulate => commands::simulate::run(&cfg, &mut out, cli.seed)?,
        Command::Ensemble => commands::ensemble::run(&cfg, &mut out, cli.seed, cli.workers)?,
        Command::TailFit => commands::ensemble::run_tail_fit(&cfg, &mut out)?,
        Command::DswScan => commands::scans::run_dsw_scan(&cfg, &mut out)?,
        Command::Wkb => commands::scans::run_wkb(&cfg, &mut out)?,
        Command::RatioScan => commands::scans::run_ratio_scan(&cfg, &mut out)?,
        Command::Ammonia => commands::ammonia::run(&cfg, &mut out, cli.seed, cli.workers)?,
    };

    let manifest = out.finish().context("cannot write run manifest")?;
    Ok(format!(
        "{summary} [digest {} -> {} artifacts]",
        manifest.config_digest,
        manifest.outputs.len()
    ))
}

fn default_seed(cfg: &RunConfig, command: &Command) -> u64 {
    match command {
        Command::Simulate => cfg.simulate.as_ref().and_then(|s| s.seed),
        Command::Ensemble => cfg.ensemble.as_ref().and_then(|s| s.seed),
        Command::Ammonia => cfg.ammonia.as_ref().and_then(|s| s.seed),
        _ => None,
    }
    .unwrap_or(0)
}

fn apply_grid_points(cfg: &mut RunConfig, gp: usize) {
    if let Some(s) = cfg.solve.as_mut() {
        s.grid_points = Some(gp);
    }
    if let Some(s) = cfg.mfpt.as_mut() {
        s.grid_points = Some(gp);
    }
    if let Some(s) = cfg.simulate.as_mut() {
        s.grid_points = Some(gp);
    }
    if let Some(s) = cfg.ensemble.as_mut() {
        s.grid_points = Some(gp);
    }
    if let Some(s) = cfg.wkb.as_mut() {
        s.grid_points = Some(gp);
    }
    if let Some(s) = cfg.ratio_scan.as_mut() {
        s.grid_points = Some(gp);
    }
    if let Some(s) = cfg.ammonia.as_mut() {
        s.grid_points = Some(gp);
    }
}
