//! Command-line front end: `run`, `compare`, `metrics` and `validate-data`.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 data or I/O
//! error, 3 model failure.

mod compare;
pub mod config;
mod run;
pub mod svg;

pub use compare::{compare_runs, CompareOutcome};
pub use config::ExperimentConfig;
pub use run::{run_experiment, DatasetSummary, RunManifest, RunOutcome};

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::data::{parse_rate_csv, Dataset};
use crate::metrics::{monthly_rf_from_rates, MonthlyReturns};
use crate::report::{monthly_report, ReportTable, StrategyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("model error: {0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

#[derive(Debug, Parser)]
#[command(name = "es-daytime", version, about = "Walk-forward backtests of daytime ES futures strategies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Backtest one strategy and write its report bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides `master_seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Fractional cost per side (overrides `cost_per_side`).
        #[arg(long)]
        cost: Option<f64>,
    },
    /// Put completed runs over the same dataset side by side.
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute monthly metrics from `year,month,percent` files.
    Metrics {
        #[arg(long)]
        monthly: PathBuf,
        /// Annual yields as `date,annual_yield_percent`.
        #[arg(long)]
        rates: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load and align the input files, then print a summary.
    ValidateData {
        #[arg(long, conflicts_with_all = ["es", "vix", "rates"])]
        config: Option<PathBuf>,
        #[arg(long, requires_all = ["vix", "rates"])]
        es: Option<PathBuf>,
        #[arg(long)]
        vix: Option<PathBuf>,
        #[arg(long)]
        rates: Option<PathBuf>,
    },
}

/// Monthly report for `monthly` against `benchmark`, with the risk-free
/// rate taken from a yield table.
pub fn metrics_from_files(
    monthly: &Path,
    rates: &Path,
    benchmark: &Path,
) -> Result<(ReportTable, StrategyReport), CliError> {
    let parse_monthly = |p: &Path| {
        MonthlyReturns::from_percent_csv(&read_file(p)?).map_err(|e| io_err(p, e))
    };
    let model = parse_monthly(monthly)?;
    let bench = parse_monthly(benchmark)?;
    let rate_points = parse_rate_csv(&read_file(rates)?).map_err(|e| io_err(rates, e))?;
    let rf = monthly_rf_from_rates(&model, &rate_points).map_err(|e| io_err(rates, e))?;
    let report = monthly_report(&model, &bench, &rf).map_err(|e| CliError::Data(e.to_string()))?;
    let bench_rf = monthly_rf_from_rates(&bench, &rate_points).map_err(|e| io_err(rates, e))?;
    let bench_report =
        monthly_report(&bench, &bench, &bench_rf).map_err(|e| CliError::Data(e.to_string()))?;
    let stem = |p: &Path| {
        p.file_stem()
            .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
    };
    let table = ReportTable::new(vec![(stem(monthly), &report), (stem(benchmark), &bench_report)]);
    Ok((table, report))
}

fn validate_data(es: &Path, vix: &Path, rates: &Path) -> Result<String, CliError> {
    for p in [es, vix, rates] {
        if !p.exists() {
            return Err(io_err(p, "file not found"));
        }
    }
    let ds = Dataset::load(es, vix, rates).map_err(|e| CliError::Data(e.to_string()))?;
    let days = ds.days();
    let (Some(first), Some(last)) = (days.first(), days.last()) else {
        return Err(CliError::Data("no aligned sessions".into()));
    };
    Ok(format!(
        "sessions: {}\nrange: {} .. {}\nlong labels: {} ({:.2}%)\nfingerprint: {}\n",
        ds.len(),
        first.date,
        last.date,
        ds.positive_count(),
        100.0 * ds.positive_count() as f64 / ds.len() as f64,
        ds.fingerprint()
    ))
}

pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            cost,
        } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(CliError::Config)?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(cost) = cost {
                if !(cost >= 0.0 && cost.is_finite()) {
                    return Err(CliError::Config(format!("--cost {cost} must be non-negative")));
                }
                cfg.cost_per_side = cost;
            }
            let outcome = run_experiment(&cfg)?;
            Ok(format!(
                "{}: {} sessions, final equity {:.4}, wrote {}\n",
                cfg.name,
                outcome.series.len(),
                outcome.final_equity,
                cfg.out_dir.display()
            ))
        }
        Command::Compare { runs, out } => {
            let outcome = compare_runs(&runs, &out)?;
            Ok(outcome.markdown)
        }
        Command::Metrics {
            monthly,
            rates,
            benchmark,
            out,
        } => {
            let (table, _) = metrics_from_files(&monthly, &rates, &benchmark)?;
            let md = table.to_markdown();
            if let Some(out) = out {
                std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
                write_file(&out.join("report.md"), &md)?;
                write_file(&out.join("report.csv"), &table.to_csv())?;
            }
            Ok(md)
        }
        Command::ValidateData {
            config,
            es,
            vix,
            rates,
        } => match (config, es, vix, rates) {
            (Some(config), ..) => {
                let cfg = ExperimentConfig::load(&config).map_err(CliError::Config)?;
                validate_data(&cfg.paths.es_csv, &cfg.paths.vix_csv, &cfg.paths.rates_csv)
            }
            (None, Some(es), Some(vix), Some(rates)) => validate_data(&es, &vix, &rates),
            _ => Err(CliError::Config("give --config or all of --es, --vix, --rates".into())),
        },
    }
}

/// Parses `args`, runs the command, reports to stdout/stderr and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
