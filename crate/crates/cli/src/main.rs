//! `hashlag`: issuance calculator, hash-supply simulator and lead-lag
//! analysis of price and hash-rate histories.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 the model refused
//! the configuration.

mod analyze;
mod calc;
mod error;
mod scenario;
mod simulate;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hashlag", version, about = "Mining economics: calculators, simulation and empirical lead-lag analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hashes per bitcoin and a miner's expected revenue.
    Calc(calc::CalcArgs),
    /// Run a scenario through the hash-supply recursion.
    Simulate(simulate::SimulateArgs),
    /// Segment a price/hash-rate history and test which leads.
    Analyze(analyze::AnalyzeArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result: Result<(), CliError> = match &cli.command {
        Command::Calc(args) => calc::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Analyze(args) => analyze::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hashlag: {e}");
            e.exit_code()
        }
    }
}
