//! `mfpca`: ingest, smooth, fit, forecast, evaluate and diagnose mortality
//! surfaces from the command line.

mod commands;
mod config;
mod data;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Opts, RunConfig};

#[derive(Parser)]
#[command(name = "mfpca", version, about = "Multi-population mortality forecasting with functional PCA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an HMD Mx_1x1 file into <data>/observed/.
    Ingest {
        /// HMD period death-rate table.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_age: u32,
        #[command(flatten)]
        opts: Opts,
    },
    /// Smooth observed surfaces into <data>/smoothed/ and <data>/sigma/.
    Smooth {
        #[command(flatten)]
        opts: Opts,
    },
    /// Fit a model and write its components under <out>/<model>/.
    Fit {
        #[command(flatten)]
        opts: Opts,
    },
    /// Forecast h years ahead with intervals.
    Forecast {
        #[command(flatten)]
        opts: Opts,
    },
    /// Rolling-window RMSE for every model and horizon given.
    Evaluate {
        #[command(flatten)]
        opts: Opts,
    },
    /// Life expectancy and sex ratios, optionally extended by a forecast.
    Diagnose {
        #[command(flatten)]
        opts: Opts,
    },
    /// Write a seeded synthetic two-population HMD file.
    Simulate {
        #[arg(long, default_value_t = 50)]
        years: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        divergence: f64,
        #[arg(long, default_value = "SYN")]
        label: String,
        #[command(flatten)]
        opts: Opts,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { input, max_age, opts } => commands::ingest(&RunConfig::resolve(&opts)?, &input, max_age),
        Command::Smooth { opts } => commands::smooth(&RunConfig::resolve(&opts)?),
        Command::Fit { opts } => commands::fit(&RunConfig::resolve(&opts)?),
        Command::Forecast { opts } => commands::forecast(&RunConfig::resolve(&opts)?),
        Command::Evaluate { opts } => commands::evaluate(&RunConfig::resolve(&opts)?),
        Command::Diagnose { opts } => commands::diagnose(&RunConfig::resolve(&opts)?),
        Command::Simulate {
            years,
            divergence,
            label,
            opts,
        } => commands::simulate(&RunConfig::resolve(&opts)?, years, divergence, &label).map(|_| ()),
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error: cli: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
