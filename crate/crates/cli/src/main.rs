//! `driftweight` — experiment runner for time-indexed importance weighting
//! on gradually drifting data streams.
//!
//! Exit codes: 0 success, 1 invalid configuration or flags, 2 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use driftweight::commands;
use driftweight::config::ExperimentConfig;
use driftweight::Result;

#[derive(Debug, Parser)]
#[command(
    name = "driftweight",
    version,
    about = "Benchmark time-indexed importance weighting on drifting data streams",
    after_help = "Commands read a TOML config (see README.md for the full reference); \
                  every field has a default, so all commands also run without one."
)]
struct Cli {
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override [run] seed.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Override [run] out_dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override [run] jobs (worker threads across replicate seeds).
    #[arg(long, global = true, value_name = "INT")]
    jobs: Option<usize>,
    /// Print the work plan and write nothing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Overwrite outputs produced under a different config.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the per-step stream CSV files.
    Gen,
    /// Fit the importance-weight estimator on the stream and snapshot it.
    TrainOmega,
    /// Compare training protocols by next-step test accuracy.
    Benchmark,
    /// Run the drifting-gridworld TD experiment (paired weighted/baseline).
    Rl {
        /// Run only the unweighted baseline arm.
        #[arg(long)]
        baseline_only: bool,
    },
    /// Report current-vs-past kernel discrepancy under the trained weights.
    Validate,
    /// Re-render SVG charts from existing report CSVs.
    Plot,
}

fn main() -> ExitCode {
    // Flag and usage problems count as validation errors (exit 1); help and
    // version remain successes.
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.run.out_dir = out.display().to_string();
    }
    if let Some(jobs) = cli.jobs {
        cfg.run.jobs = jobs;
    }
    cfg.validate()?;

    match cli.command {
        Command::Gen => commands::cmd_gen(&cfg, cli.dry_run, cli.force),
        Command::TrainOmega => commands::cmd_train_omega(&cfg, cli.dry_run, cli.force),
        Command::Benchmark => commands::cmd_benchmark(&cfg, cli.dry_run, cli.force),
        Command::Rl { baseline_only } => {
            commands::cmd_rl(&cfg, cli.dry_run, cli.force, baseline_only)
        }
        Command::Validate => commands::cmd_validate(&cfg, cli.dry_run, cli.force),
        Command::Plot => commands::cmd_plot(&cfg, cli.dry_run),
    }
}
