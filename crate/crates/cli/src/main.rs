use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use zvonkin_lab::config::parse_overrides;
use zvonkin_lab::{execute, Command, RunConfig, Which};

/// Experiments for SDEs with distributional drift.
#[derive(Parser)]
#[command(name = "zvonkin-lab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; defaults are used for anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Leaf overrides such as `--sde.M 100000` or `--grid.N=256`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize the drift and its regularity certificate.
    SynthDrift(Common),
    /// Select lambda and solve the resolvent equation for the drift and its ladder.
    Solve(Common),
    /// Simulate the transformed process and the mollified-drift processes.
    Simulate(Common),
    /// Run one verification.
    Verify {
        #[arg(long, value_enum)]
        which: Which,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence in law along the mollification ladder.
    Converge(Common),
}

fn init_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("ZVONKIN_LAB_THREADS") {
        let n: usize = raw.trim().parse().with_context(|| format!("ZVONKIN_LAB_THREADS = {raw:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run() -> Result<bool> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    init_threads()?;
    let (cmd, common) = match cli.cmd {
        Cmd::SynthDrift(c) => (Command::SynthDrift, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Verify { which, common } => (Command::Verify(which), common),
        Cmd::Converge(c) => (Command::Converge, c),
    };
    let overrides = parse_overrides(&common.overrides)?;
    let cfg = RunConfig::load(common.config.as_deref(), &overrides)?;
    let out = execute(cmd, &cfg).with_context(|| format!("{} failed", cmd.tag()))?;
    for c in &out.report.checks {
        println!(
            "{:<24} {:<4} value {:.6e} tolerance {:.3e}",
            c.id,
            if c.passed() { "pass" } else { "FAIL" },
            c.value,
            c.tolerance
        );
    }
    println!("manifest: {}", out.manifest.display());
    let failed = out.report.failed_ids();
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
