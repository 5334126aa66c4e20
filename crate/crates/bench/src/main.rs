use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spider_bench::report::load_summaries;
use spider_bench::run::output_dir;
use spider_bench::{report_complexity, run_experiment, BenchError, ExperimentConfig};

/// Benchmark harness for the recursive variance-reduced optimizers.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (solver, seed) cell of a config and write traces and a summary.
    Run { config: PathBuf },
    /// Tabulate SFO-to-target against eps and fit the scaling exponent.
    Report {
        /// `summary.json` files or the directories holding them.
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// Target for each summary, in order (defaults to each summary's eps).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        eps: Option<Vec<f64>>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a config against the schema without running anything.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, BenchError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run_experiment(&cfg)?;
            let dir = output_dir(&cfg);
            for c in &summary.cells {
                if let Some(e) = &c.error {
                    eprintln!("aborted: {} seed {}: {e}", c.solver, c.seed);
                }
            }
            println!(
                "{}: {} cells, {} aborted, written to {}",
                summary.name,
                summary.cells.len(),
                summary.aborted(),
                dir.display()
            );
            Ok(if summary.aborted() > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Report {
            summaries,
            eps,
            json,
        } => {
            let loaded = load_summaries(&summaries)?;
            let report = report_complexity(&loaded, eps.as_deref())?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                print!("{report}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!(
                "{}: ok ({} solvers, {} seeds)",
                cfg.name,
                cfg.solvers.len(),
                cfg.seeds.len()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
