//! `amsdec` — decomposition, verification, entropy and trace pipelines for
//! finite dynamical systems and finite-alphabet Markov sources.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 invalid
//! input, 3 cylinder budget exceeded.

mod commands;
mod document;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{CliError, CommandOptions};
use document::{NumericMode, SystemDocument};
use num_rational::BigRational;
use report::ReportDocument;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "amsdec",
    about = "Ergodic decomposition and convergence verification on finite systems and Markov sources",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose into ergodic components (finite) or recurrent classes
    /// (sources) and run the full identity suites.
    Decompose {
        input: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Uniform-convergence profile and the density/measure equivalence
    /// witnesses along a schedule.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Per-class entropy rates, their weighted average, and the block-entropy
    /// table of the stationary mean.
    Entropy {
        input: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Contraction-average trace per point, with Hopf part labels.
    Trace {
        input: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Sample seeded trajectories from a source, one per line.
    Sample {
        input: PathBuf,
        /// Symbols per trajectory.
        #[arg(long, default_value_t = 1000)]
        length: usize,
        /// Number of independent trajectories.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

#[derive(Args)]
struct CommonFlags {
    /// Output format (trace defaults to csv, everything else to table).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Override the document's numeric mode.
    #[arg(long, value_enum)]
    numeric: Option<NumericArg>,
    /// Convergence threshold, e.g. "1/1000" or "1e-3" as "0.001".
    #[arg(long)]
    epsilon: Option<String>,
    /// Comma-separated average indices, e.g. 1,2,4,8.
    #[arg(long = "n-schedule", value_delimiter = ',')]
    n_schedule: Option<Vec<u64>>,
    /// Cylinder depth for marginals, block entropies and bounds.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Seed for sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Ceiling on |alphabet|^depth (env AMSDEC_BUDGET overrides).
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NumericArg {
    Rational,
    Float,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err((code, message)) => {
            eprintln!("amsdec: {message}");
            ExitCode::from(code)
        }
    }
}

fn run() -> Result<ExitCode, (u8, String)> {
    let cli = Cli::parse();
    let (input, flags, default_format) = match &cli.command {
        Command::Decompose { input, flags } => (input, flags, Format::Table),
        Command::Verify { input, flags } => (input, flags, Format::Table),
        Command::Entropy { input, flags } => (input, flags, Format::Table),
        Command::Trace { input, flags } => (input, flags, Format::Csv),
        Command::Sample { input, flags, .. } => (input, flags, Format::Table),
    };

    let text = std::fs::read_to_string(input)
        .map_err(|e| (EXIT_INVALID, format!("cannot read {}: {e}", input.display())))?;
    let doc = SystemDocument::from_json(&text).map_err(|e| (EXIT_INVALID, e))?;
    let echo: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| (EXIT_INVALID, e.to_string()))?;

    let mode = match flags.numeric {
        Some(NumericArg::Rational) => NumericMode::Rational,
        Some(NumericArg::Float) => NumericMode::Float,
        None => doc.numeric_mode().map_err(|e| (EXIT_INVALID, e))?,
    };
    let options = resolve_options(flags, &doc);
    let format = flags.format.unwrap_or(default_format);

    let outcome = match (&cli.command, mode) {
        (Command::Sample { length, trials, .. }, NumericMode::Rational) => {
            return commands::run_sample::<BigRational>(&doc, &options, *length, *trials)
                .map(|text| {
                    print!("{text}");
                    ExitCode::SUCCESS
                })
                .map_err(map_cli_error)
        }
        (Command::Sample { length, trials, .. }, NumericMode::Float) => {
            return commands::run_sample::<f64>(&doc, &options, *length, *trials)
                .map(|text| {
                    print!("{text}");
                    ExitCode::SUCCESS
                })
                .map_err(map_cli_error)
        }
        (Command::Decompose { .. }, NumericMode::Rational) => {
            commands::run_decompose::<BigRational>(&doc, echo, mode, &options)
        }
        (Command::Decompose { .. }, NumericMode::Float) => {
            commands::run_decompose::<f64>(&doc, echo, mode, &options)
        }
        (Command::Verify { .. }, NumericMode::Rational) => {
            commands::run_verify::<BigRational>(&doc, echo, mode, &options)
        }
        (Command::Verify { .. }, NumericMode::Float) => {
            commands::run_verify::<f64>(&doc, echo, mode, &options)
        }
        (Command::Entropy { .. }, NumericMode::Rational) => {
            commands::run_entropy::<BigRational>(&doc, echo, mode, &options)
        }
        (Command::Entropy { .. }, NumericMode::Float) => {
            commands::run_entropy::<f64>(&doc, echo, mode, &options)
        }
        (Command::Trace { .. }, NumericMode::Rational) => {
            commands::run_trace::<BigRational>(&doc, echo, mode, &options)
        }
        (Command::Trace { .. }, NumericMode::Float) => {
            commands::run_trace::<f64>(&doc, echo, mode, &options)
        }
    };

    let report = outcome.map_err(map_cli_error)?;
    emit(&report, format);
    if report.all_checks_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_CHECK_FAILED))
    }
}

fn map_cli_error(error: CliError) -> (u8, String) {
    match error {
        CliError::Invalid(message) => (EXIT_INVALID, message),
        CliError::Budget(message) => (EXIT_BUDGET, message),
    }
}

fn resolve_options(flags: &CommonFlags, doc: &SystemDocument) -> CommandOptions {
    let schedule = flags
        .n_schedule
        .clone()
        .or_else(|| doc.schedule.clone())
        .unwrap_or_else(amsdec_core::krengel::default_schedule);
    let budget = flags
        .budget
        .or_else(|| {
            std::env::var("AMSDEC_BUDGET")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .or(doc.budget)
        .unwrap_or(amsdec_core::sources::DEFAULT_CYLINDER_BUDGET);
    CommandOptions {
        schedule,
        epsilon: flags.epsilon.clone(),
        max_depth: flags.max_depth.or(doc.max_depth).unwrap_or(8),
        budget,
        seed: flags.seed.or(doc.seed).unwrap_or(0),
    }
}

fn emit(report: &ReportDocument, format: Format) {
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => println!("{}", report.to_json()),
        Format::Csv => print!("{}", report.to_csv()),
    }
}
