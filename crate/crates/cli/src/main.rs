//! `glycosim`: simulate the meal model, fit subjects, classify them by peak
//! time and compare groups.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{classify, fit, simulate, stats};
use config::Config;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "glycosim", version, about = "Glucose-insulin meal model: simulate, fit, classify, compare")]
struct Cli {
    /// JSON configuration file, or a run manifest to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Recorded in the manifest. Runs are deterministic regardless.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one meal response and write the trajectory CSV.
    Simulate(simulate::SimulateArgs),
    /// Estimate parameters for one subject or a directory of subjects.
    Fit(fit::FitArgs),
    /// Group fitted subjects by glycemic peak time.
    Classify(classify::ClassifyArgs),
    /// Group statistics, ANOVA and Bonferroni pairwise tests.
    Stats(stats::StatsArgs),
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut config = Config::load_or_default(cli.config.as_deref())?;
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    match cli.command {
        Command::Simulate(a) => simulate::run(a, config),
        Command::Fit(a) => fit::run(a, config),
        Command::Classify(a) => classify::run(a, config),
        Command::Stats(a) => stats::run(a, config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
