//! The `somkm` binary.
//!
//! Machine-readable output goes to stdout or to `--out` files; diagnostics
//! go to stderr, prefixed `warning:` on success paths. Exit codes: 0 on
//! success, 1 on any runtime error (the error name leads the message), 2
//! on usage errors (clap's default).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use somkm::config::{load_config, parse_month_spec};
use somkm::csvio;
use somkm::error::CliError;
use somkm::resultfile;
use somkm_core::calendar::MonthKey;
use somkm_core::ingest::{build_monthly_matrices, synth_generate, ReadingTable};
use somkm_core::pipeline::{run_pipeline, run_sweep};

/// One `--months` value: a comma-separated list or the default token.
#[derive(Clone)]
struct MonthList(Vec<MonthKey>);

fn parse_month_list(value: &str) -> Result<MonthList, String> {
    parse_month_spec(value).map(MonthList)
}

#[derive(Parser)]
#[command(
    name = "somkm",
    version,
    about = "Monthly time-series clustering: per-month SOMs, pooled centers, PCA, silhouette-driven k-means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a readings CSV and write a per-month ingestion summary
    Ingest {
        /// Readings CSV (header `series_id,timestamp,kwh`)
        #[arg(long)]
        input: PathBuf,
        /// Months as YYYY-MM[,YYYY-MM...], or `paper-default` for the
        /// built-in twelve-month window
        #[arg(long, value_parser = parse_month_list)]
        months: MonthList,
        /// Where to write the JSON summary
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a labeled synthetic readings CSV
    Synth {
        /// Number of series
        #[arg(long)]
        series: usize,
        /// Number of archetypes (at most the number of series)
        #[arg(long)]
        archetypes: usize,
        /// Months as YYYY-MM[,YYYY-MM...], or `paper-default`
        #[arg(long, value_parser = parse_month_list)]
        months: MonthList,
        /// Generator seed
        #[arg(long)]
        seed: u64,
        /// Gaussian noise sigma added to each daily total
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
        /// Where to write the readings CSV
        #[arg(long)]
        out: PathBuf,
        /// Optional sidecar CSV `series_id,archetype` with the true labels
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run the full pipeline and write the result JSON
    Run {
        /// Pipeline config JSON; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Readings CSV
        #[arg(long)]
        input: PathBuf,
        /// Where to write the result file
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the shared stages plus the k sweep; print the report as JSON
    Sweep {
        /// Pipeline config JSON; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Readings CSV
        #[arg(long)]
        input: PathBuf,
    },
    /// Export the assignments of a result file to stdout
    Report {
        /// Result JSON produced by `run`
        #[arg(long)]
        result: PathBuf,
        /// Output format
        #[arg(long, value_enum)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct IngestSummary {
    source: String,
    months: Vec<MonthSummary>,
}

#[derive(Serialize)]
struct MonthSummary {
    month: String,
    series: usize,
    dropped: Vec<DroppedRow>,
}

#[derive(Serialize)]
struct DroppedRow {
    series_id: String,
    reason: String,
}

fn read_table(path: &Path) -> Result<ReadingTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    csvio::parse_readings(&text, &path.display().to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn warn_all(warnings: &[String]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest { input, months, out } => {
            let table = read_table(&input)?;
            warn_all(&table.warnings);
            let matrices = build_monthly_matrices(&table, &months.0)?;
            let summary = IngestSummary {
                source: table.source.clone(),
                months: matrices
                    .iter()
                    .map(|m| MonthSummary {
                        month: m.month.to_string(),
                        series: m.series_ids.len(),
                        dropped: m
                            .dropped
                            .iter()
                            .map(|(series_id, reason)| DroppedRow {
                                series_id: series_id.clone(),
                                reason: reason.clone(),
                            })
                            .collect(),
                    })
                    .collect(),
            };
            let mut json = resultfile::to_fixed_json(&summary);
            json.push('\n');
            write_file(&out, &json)
        }
        Command::Synth { series, archetypes, months, seed, noise, out, truth } => {
            let table = synth_generate(series, archetypes, &months.0, noise, seed)?;
            write_file(&out, &csvio::readings_to_csv(&table))?;
            if let Some(truth_path) = truth {
                let labels = table
                    .truth_labels
                    .as_ref()
                    .expect("synthetic tables always carry truth labels");
                write_file(&truth_path, &csvio::truth_to_csv(labels))?;
            }
            Ok(())
        }
        Command::Run { config, input, out } => {
            let config = load_config(config.as_deref())?;
            let table = read_table(&input)?;
            let result = run_pipeline(&table, &config)?;
            resultfile::save_result(&result, &out)?;
            // Result warnings already include the table's own.
            warn_all(&result.warnings);
            Ok(())
        }
        Command::Sweep { config, input } => {
            let config = load_config(config.as_deref())?;
            let table = read_table(&input)?;
            warn_all(&table.warnings);
            let report = run_sweep(&table, &config)?;
            println!("{}", resultfile::report_to_json(&report));
            Ok(())
        }
        Command::Report { result, format } => {
            let loaded = resultfile::load_result(&result)?;
            match format {
                Format::Json => println!("{}", resultfile::assignments_to_json(&loaded.assignments)),
                Format::Csv => print!("{}", csvio::assignments_to_csv(&loaded.assignments)),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
