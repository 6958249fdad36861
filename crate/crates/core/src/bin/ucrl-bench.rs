use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ucrl2b::bench::{coverage_experiment, run_suite, ExperimentConfig, HarnessError};
use ucrl2b::mdp::{build_environment, EnvironmentSpec};
use ucrl2b::solver::ground_truth;

#[derive(Parser)]
#[command(name = "ucrl-bench", about = "Regret and coverage experiments for optimistic tabular RL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, seed) cell and write regret artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `experiment.output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Estimate how often the true MDP leaves the confidence sets.
    Coverage {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print gain, bias, diameter and support profile of an environment,
    /// e.g. `riverswim(6)` or `random-communicating(5,2,3,7)`.
    GroundTruth {
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, output_dir } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let report = run_suite(&cfg)?;
            for f in &report.files {
                println!("{}", f.display());
            }
        }
        Command::Coverage { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = coverage_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::GroundTruth { env, tol } => {
            let spec: EnvironmentSpec = env.parse()?;
            let mdp = build_environment(&spec)?;
            let truth = ground_truth(&mdp, tol)?;
            println!("{}", serde_json::to_string_pretty(&truth).expect("ground truth serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
