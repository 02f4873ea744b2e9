//! `bmdrate` — achievable rates for bit-metric decoding on Gray-labeled ASK
//! over AWGN and on finite discrete channels.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

#[derive(Parser)]
#[command(
    name = "bmdrate",
    version,
    about = "Achievable rates for bit-metric decoding: rate curves, SNR gaps, \
             input optimization and Monte Carlo decoding checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace rate functionals over an SNR grid (CSV/JSON)
    RateCurve(commands::RateCurveArgs),
    /// SNR per functional at a target rate, with dB gaps to capacity
    Gap(commands::GapArgs),
    /// Evaluate the built-in identity / erase-all channel examples and
    /// verify their exact rates
    Examples(commands::ExamplesArgs),
    /// Optimize the input distribution at one SNR point
    Optimize(commands::OptimizeArgs),
    /// Monte Carlo random-coding simulation sweep (CSV)
    Simulate(commands::SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RateCurve(args) => commands::run_rate_curve(args),
        Command::Gap(args) => commands::run_gap(args),
        Command::Examples(args) => commands::run_examples(args),
        Command::Optimize(args) => commands::run_optimize(args),
        Command::Simulate(args) => commands::run_simulate(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
