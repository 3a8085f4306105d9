use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use rcfp_cli::commands::{self, print_stdout};

/// Resource-consumption fingerprints and family classification.
#[derive(Debug, Parser)]
#[command(name = "rcfp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic traces from a family spec
    Synth(commands::SynthArgs),
    /// Sample a proc-style tree into a trace file
    Collect(commands::CollectArgs),
    /// Print the fingerprint of a trace as `feature,value` CSV
    Fingerprint(commands::FingerprintArgs),
    /// Train a model from a labeled manifest
    Train(commands::TrainArgs),
    /// Predict the family of traces
    Classify(commands::ClassifyArgs),
    /// Repeated stratified holdout evaluation
    Evaluate(commands::EvaluateArgs),
    /// DFA exponent spread across runs or trace lengths
    Stability(commands::StabilityArgs),
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => {
            for p in commands::synth(&a)? {
                print_stdout(&format!("{}\n", p.display()))?;
            }
        }
        Command::Collect(a) => commands::collect_cmd(&a)?,
        Command::Fingerprint(a) => print_stdout(&commands::fingerprint_cmd(&a)?)?,
        Command::Train(a) => print_stdout(&commands::train(&a)?)?,
        Command::Classify(a) => print_stdout(&commands::classify(&a)?)?,
        Command::Evaluate(a) => print_stdout(&commands::evaluate(&a)?)?,
        Command::Stability(a) => {
            for p in commands::stability(&a)? {
                print_stdout(&format!("{}\n", p.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
