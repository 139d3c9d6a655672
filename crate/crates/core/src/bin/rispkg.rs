use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use rispkg::harness::oracle::run_checks;
use rispkg::harness::{emit_csv, load_config, run_sweep, ExperimentConfig, Preset};

#[derive(Parser)]
#[command(name = "rispkg", version, about = "RIS-assisted key generation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the result table as CSV.
    Simulate {
        /// YAML config; defaults are used when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "custom", value_parser = clap::value_parser!(String))]
        preset: String,
        #[arg(long)]
        output: PathBuf,
        /// master seed (overrides harness.master_seed)
        #[arg(long)]
        seed: Option<u64>,
        /// trials per cell (overrides harness.trials)
        #[arg(long)]
        trials: Option<usize>,
        /// worker threads, 0 = all cores
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the closed-form expressions against Monte-Carlo estimates.
    Oracle {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn simulate(
    config: Option<PathBuf>,
    preset: &str,
    output: PathBuf,
    seed: Option<u64>,
    trials: Option<usize>,
    jobs: usize,
) -> Result<()> {
    let preset: Preset = preset.parse().map_err(anyhow::Error::msg)?;
    let mut cfg = match &config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    preset.apply(&mut cfg);
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    cfg.validate()?;

    let start = Instant::now();
    let rows = run_sweep(&cfg, jobs)?;
    emit_csv(&rows, &output).with_context(|| format!("writing {}", output.display()))?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    eprintln!(
        "{preset}: {} rows -> {} in {:.1}s{}",
        rows.len(),
        output.display(),
        start.elapsed().as_secs_f64(),
        if failed > 0 { format!(", {failed} failed") } else { String::new() }
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, preset, output, seed, trials, jobs } => {
            simulate(config, &preset, output, seed, trials, jobs).map(|_| true)
        }
        Command::Validate { config } => load_config(&config).map(|_| {
            println!("{}: ok", config.display());
            true
        }).map_err(Into::into),
        Command::Oracle { samples, seed } => run_checks(samples, seed).map_err(Into::into).map(|checks| {
            for c in &checks {
                println!("{c}");
            }
            checks.iter().all(|c| c.passed())
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
