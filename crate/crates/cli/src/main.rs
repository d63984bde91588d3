//! `kscheck`: verdicts on Kochen–Specker scenarios from the command line.

mod commands;
mod error;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use error::CliError;
use report::Report;

#[derive(Parser)]
#[command(name = "kscheck", version, about = "Check Kochen-Specker scenarios and noncontextual models")]
struct Cli {
    /// Print the machine-readable JSON report
    #[arg(long, global = true)]
    json: bool,
    /// Cap on vertices (verify) or basic measurements (model searches)
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Reserved for randomized drivers; no verdict depends on it
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for value assignments respecting every hyperedge's product rule
    Verify { input: String },
    /// Classify a realization as argument type I, II or III
    Classify {
        input: String,
        #[arg(long)]
        realization: Option<String>,
    },
    /// Search for a noncontextual value-definite ontological model
    SearchModel {
        input: String,
        #[arg(long)]
        realization: Option<String>,
    },
    /// Run the eigenstate argument for a type II realization
    Ghz {
        #[arg(default_value = "ghz")]
        input: String,
        #[arg(long)]
        realization: Option<String>,
        /// Eigenvalues of the non-comeasurable hyperedge, e.g. "+1,+1,+1,-1"
        #[arg(long, allow_hyphen_values = true)]
        tuple: Option<String>,
        /// Control run with the last pinned value flipped
        #[arg(long)]
        flip_sign: bool,
    },
    /// Smallest fraction of joint measurements an outcome assignment must miss
    Robustness {
        input: String,
        #[arg(long)]
        realization: Option<String>,
    },
    /// List built-in scenarios, or show one
    Catalog { name: Option<String> },
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let cap = cli.cap;
    match &cli.command {
        Command::Verify { input } => commands::verify(&commands::load(input)?, cap),
        Command::Classify { input, realization } => commands::classify(&commands::load(input)?, realization.as_deref()),
        Command::SearchModel { input, realization } => {
            commands::search_model(&commands::load(input)?, realization.as_deref(), cap)
        }
        Command::Ghz {
            input,
            realization,
            tuple,
            flip_sign,
        } => commands::ghz(
            &commands::load(input)?,
            realization.as_deref(),
            tuple.as_deref(),
            *flip_sign,
            cap,
        ),
        Command::Robustness { input, realization } => {
            commands::robustness(&commands::load(input)?, realization.as_deref(), cap)
        }
        Command::Catalog { name } => commands::catalog(name.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut report) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kscheck: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
