//! Command-line runner for time-changed SDE simulation and stability
//! certification.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pathstab::config::ExperimentConfig;
use pathstab::examples;
use pathstab::runner::{self, RunOptions, RunOutcome};
use pathstab::verify;

#[derive(Parser)]
#[command(
    name = "pathstab",
    version,
    about = "Simulate scalar SDEs driven by time-changed Levy noise and certify path stability"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute an experiment described by a key = value config file.
    Run {
        /// Config file path.
        #[arg(long)]
        config: PathBuf,
        /// Emit dB, dE and mark counts in the trajectory CSV.
        #[arg(long)]
        keep_increments: bool,
    },
    /// Re-run a registered example with its published parameters.
    Reproduce {
        /// One of the registered example ids.
        example_id: String,
        /// Output directory (default: out/<example_id>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ensemble seed (default: 1).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        keep_increments: bool,
    },
    /// Run a property suite (slln | martingale | duality | ito | moments).
    Verify { suite: String },
    /// List registered examples.
    Examples,
}

const USAGE_EXIT: u8 = 2;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PATHSTAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Run {
            config,
            keep_increments,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let mut cfg = match ExperimentConfig::parse(&text) {
                Ok(cfg) => cfg,
                Err(err) => {
                    eprintln!("config error: {err:#}");
                    return Ok(ExitCode::from(USAGE_EXIT));
                }
            };
            apply_out_override(&mut cfg);
            let outcome = runner::run(&cfg, RunOptions { keep_increments })?;
            print_outcome(&outcome);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Reproduce {
            example_id,
            out,
            seed,
            keep_increments,
        } => {
            let Some(example) = examples::registered(&example_id) else {
                eprintln!(
                    "unknown example id {example_id:?}; registered: {}",
                    examples::registered_ids().join(", ")
                );
                return Ok(ExitCode::from(USAGE_EXIT));
            };
            let mut cfg = example.config();
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            apply_out_override(&mut cfg);
            let outcome = runner::run(&cfg, RunOptions { keep_increments })?;
            print_outcome(&outcome);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite } => {
            if !verify::SUITES.contains(&suite.as_str()) {
                eprintln!(
                    "unknown verify suite {suite:?}; available: {}",
                    verify::SUITES.join(", ")
                );
                return Ok(ExitCode::from(USAGE_EXIT));
            }
            let outcome = verify::run_suite(&suite)?;
            outcome.print();
            Ok(if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Examples => {
            for id in examples::registered_ids() {
                let ex = examples::registered(id).unwrap();
                println!("{id}: {}", ex.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// `PATHSTAB_OUT` redirects artifacts under a common root.
fn apply_out_override(cfg: &mut ExperimentConfig) {
    if let Ok(root) = std::env::var("PATHSTAB_OUT") {
        let leaf = cfg
            .out_dir
            .file_name()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("run"));
        cfg.out_dir = PathBuf::from(root).join(leaf);
    }
}

fn print_outcome(outcome: &RunOutcome) {
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("artifacts = {}", outcome.out_dir.display());
    println!("manifest = {}", outcome.manifest.display());
}
