use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, CONFIG_FORMAT};
use super::svg::{histogram_chart, line_chart};
use super::{io_err, write_file, CliError};
use crate::backtest::{
    equity_curve, equity_to_csv, plan_windows, run_walkforward, window_seed, BacktestError,
    RunOptions, SignalSeries, WalkForwardPlan,
};
use crate::data::Dataset;
use crate::metrics::histogram;
use crate::report::{
    monthly_grid_markdown, monthly_with_rf, strategy_report, ReportTable, StrategyReport,
    HIST_BIN_WIDTH,
};
use crate::signals::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub fingerprint: String,
    pub sessions: usize,
    pub start: Option<chrono::NaiveDate>,
    pub end: Option<chrono::NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_format: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub windows: usize,
    pub window_seeds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub series: SignalSeries,
    pub benchmark: SignalSeries,
    pub report: StrategyReport,
    pub final_equity: f64,
}

fn backtest(
    kind: ModelKind,
    cfg: &ExperimentConfig,
    ds: &Dataset,
) -> Result<(WalkForwardPlan, SignalSeries), CliError> {
    let plan = plan_windows(ds.len(), cfg.train_window, cfg.effective_test_window(kind)).map_err(
        |e| match e {
            BacktestError::TooShort { .. } => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        },
    )?;
    let params = cfg.model_params();
    let series = run_walkforward(
        || params.build(kind),
        kind.carries_state(),
        ds,
        &plan,
        cfg.master_seed,
        &RunOptions {
            cost_per_side: cfg.cost_per_side,
            ..RunOptions::default()
        },
    )
    .map_err(|e| match e {
        BacktestError::BadCost(_) => CliError::Config(e.to_string()),
        _ => CliError::Model(format!("{kind}: {e}")),
    })?;
    Ok((plan, series))
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    let p = &cfg.paths;
    for path in [&p.es_csv, &p.vix_csv, &p.rates_csv] {
        if !path.exists() {
            return Err(io_err(path, "file not found"));
        }
    }
    let ds = Dataset::load(&p.es_csv, &p.vix_csv, &p.rates_csv)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let (start, end) = cfg.range.bounds().map_err(CliError::Config)?;
    Ok(if start.is_some() || end.is_some() {
        ds.restrict(start, end)
    } else {
        ds
    })
}

/// Loads data, backtests the configured model and its benchmark, and writes
/// the report bundle to `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let ds = load_dataset(cfg)?;
    let (plan, series) = backtest(cfg.model, cfg, &ds)?;
    let benchmark = if cfg.benchmark == cfg.model {
        series.clone()
    } else {
        backtest(cfg.benchmark, cfg, &ds)?.1
    };
    let report_err = |e: crate::report::ReportError| CliError::Data(e.to_string());
    let report = strategy_report(&series, &benchmark, &ds).map_err(report_err)?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_format: CONFIG_FORMAT.to_string(),
        config: cfg.resolved(),
        dataset: DatasetSummary {
            fingerprint: ds.fingerprint(),
            sessions: ds.len(),
            start: ds.meta().start,
            end: ds.meta().end,
        },
        windows: plan.windows.len(),
        window_seeds: plan
            .windows
            .iter()
            .map(|w| window_seed(cfg.master_seed, w.index))
            .collect(),
    };

    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out.join("manifest.json"), &(json + "\n"))?;
    write_file(&out.join("signals.csv"), &series.to_csv())?;

    let curve = equity_curve(&series.daily_returns()).map_err(|e| CliError::Model(e.to_string()))?;
    let bench_curve =
        equity_curve(&benchmark.daily_returns()).map_err(|e| CliError::Model(e.to_string()))?;
    write_file(&out.join("equity.csv"), &equity_to_csv(&curve))?;

    let mut columns = vec![(cfg.model.display_name().to_string(), &report)];
    let bench_report;
    if cfg.benchmark != cfg.model {
        bench_report = strategy_report(&benchmark, &benchmark, &ds).map_err(report_err)?;
        columns.push((cfg.benchmark.display_name().to_string(), &bench_report));
    }
    let table = ReportTable::new(columns);
    write_file(&out.join("report.csv"), &table.to_csv())?;

    let (monthly, _) = monthly_with_rf(&series, &ds).map_err(report_err)?;
    write_file(&out.join("monthly.csv"), &monthly.to_percent_csv())?;

    let returns = series.strategy_returns();
    let bins = histogram(&returns, HIST_BIN_WIDTH).map_err(|e| CliError::Data(e.to_string()))?;
    let mut hist = String::from("lower,count\n");
    for b in &bins {
        let _ = writeln!(hist, "{},{}", b.lower, b.count);
    }
    write_file(&out.join("hist.csv"), &hist)?;
    write_file(
        &out.join("hist.svg"),
        &histogram_chart(
            &format!("{}: daily daytime returns (bin size 0.33%)", cfg.model.display_name()),
            &bins,
            HIST_BIN_WIDTH,
        ),
    )?;

    let dates: Vec<_> = curve.iter().map(|p| p.date).collect();
    let pct = |c: &[crate::backtest::EquityPoint]| c.iter().map(|p| (p.value - 1.0) * 100.0).collect();
    let mut lines = vec![(cfg.model.display_name().to_string(), pct(&curve))];
    if cfg.benchmark != cfg.model {
        lines.push((cfg.benchmark.display_name().to_string(), pct(&bench_curve)));
    }
    write_file(
        &out.join("equity.svg"),
        &line_chart("Cumulative daytime profit", "%", &dates, &lines),
    )?;

    write_file(&out.join("report.md"), &report_markdown(cfg, &series, &table, &monthly))?;

    Ok(RunOutcome {
        final_equity: curve.last().map_or(1.0, |p| p.value),
        manifest,
        series,
        benchmark,
        report,
    })
}

fn report_markdown(
    cfg: &ExperimentConfig,
    series: &SignalSeries,
    table: &ReportTable,
    monthly: &crate::metrics::MonthlyReturns,
) -> String {
    let rows = series.rows();
    let mut md = format!("# {}\n\n", cfg.name);
    let _ = writeln!(
        md,
        "Model: {} (`{}`), benchmark: {}.",
        cfg.model.display_name(),
        cfg.model,
        cfg.benchmark.display_name()
    );
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        let _ = writeln!(
            md,
            "Out-of-sample sessions: {} to {} ({} days). Training window {} days, test window {} days, master seed {}, cost per side {}.",
            first.date,
            last.date,
            rows.len(),
            cfg.train_window,
            cfg.effective_test_window(cfg.model),
            cfg.master_seed,
            cfg.cost_per_side
        );
    }
    md.push_str(&table.to_markdown());
    md.push_str("\n## Monthly Returns\n\n");
    md.push_str(&monthly_grid_markdown(monthly));
    md
}

/// Reads a run's manifest back.
pub(crate) fn read_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let path = dir.join("manifest.json");
    let text = super::read_file(&path)?;
    serde_json::from_str(&text).map_err(|e| io_err(&path, e))
}
