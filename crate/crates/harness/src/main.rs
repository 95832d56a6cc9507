use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fedavo_core::fl::Algorithm;
use fedavo_harness::{parse_config, read_accuracy_series, rounds_to_threshold, run_experiment};

#[derive(Parser)]
#[command(name = "fedavo", version, about = "Federated learning with tuned client hyperparameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run this single seed instead of the configured list.
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Option<Algorithm>,
        /// Output directory (overrides `output_path`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print rounds-to-threshold for metric CSVs.
    Report {
        #[arg(long, required = true, num_args = 1..)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        threshold: f64,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|_| "expected one of fedavg, fedavo, fedpso, fedgwo".to_string())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, seed_override, algorithm, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = parse_config(&text).with_context(|| format!("parsing {}", config.display()))?;
            if let Some(seed) = seed_override {
                cfg.seeds = vec![seed];
            }
            if let Some(a) = algorithm {
                cfg.fl.algorithm = a;
            }
            if let Some(dir) = out {
                cfg.output_path = dir;
            }
            let summary = run_experiment(&cfg)?;
            for r in &summary.runs {
                let rounds = r.rounds_to_threshold.map_or("not reached".to_string(), |n| n.to_string());
                println!(
                    "{} seed {}: final accuracy {:.4}, rounds to {}: {rounds} ({})",
                    summary.algorithm,
                    r.seed,
                    r.final_accuracy,
                    summary.threshold,
                    r.csv_path.display()
                );
            }
            match summary.std_final_accuracy {
                Some(std) => println!("final accuracy {:.4} ± {:.4}", summary.mean_final_accuracy, std),
                None => println!("final accuracy {:.4}", summary.mean_final_accuracy),
            }
            println!("summary: {}", summary.summary_path.display());
        }
        Command::Report { csv, threshold } => {
            anyhow::ensure!(threshold > 0.0 && threshold < 1.0, "threshold out of range");
            for path in csv {
                let series = read_accuracy_series(&path)?;
                let rounds = rounds_to_threshold(&series, threshold).with_context(|| path.display().to_string())?;
                match rounds {
                    Some(n) => println!("{}: {n}", path.display()),
                    None => println!("{}: not reached", path.display()),
                }
            }
        }
    }
    Ok(())
}
