use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polarlab::{resolve_threads, run, write_outputs, ExperimentConfig, ExperimentName};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run symmetrization experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; falls back to LAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the experiments.
    List,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for e in ExperimentName::ALL {
                println!("{:<18} {}", e.as_str(), e.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => match execute(config, seed, out, threads) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}

fn execute(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, threads: Option<usize>) -> polarlab::Result<bool> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    let outcome = run(&cfg, resolve_threads(threads))?;
    for path in write_outputs(&outcome, &cfg.output.dir, &cfg.stem())? {
        println!("wrote {}", path.display());
    }
    for c in &outcome.checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    for (t, msg) in &outcome.failures {
        println!("trial {t} aborted: {msg}");
    }
    Ok(outcome.passed())
}
