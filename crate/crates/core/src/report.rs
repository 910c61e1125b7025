//! Performance tables: one column per strategy, one row per metric, grouped
//! into classification, daily-return, return, risk and exposure sections.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backtest::SignalSeries;
use crate::data::Dataset;
use crate::metrics::{
    classification_rates, compound_monthly, confusion_counts, exposure_stats,
    monthly_rf_from_daily, perf_report, summary_stats, ClassificationRates, ExposureStats,
    MetricsError, MonthlyReturns, PerfReport, SummaryStats,
};

/// Histogram bin width for daily returns (0.33%).
pub const HIST_BIN_WIDTH: f64 = 0.0033;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("signal date {0} is not a session of the dataset")]
    UnknownDate(chrono::NaiveDate),
    #[error("strategy and benchmark cover different dates")]
    BenchmarkDates,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Percent,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metric {
    pub section: &'static str,
    pub label: &'static str,
    pub format: Format,
}

const fn m(section: &'static str, label: &'static str, format: Format) -> Metric {
    Metric {
        section,
        label,
        format,
    }
}

pub const CLASSIFICATION: &str = "Prediction Accuracy";
pub const DAILY: &str = "Daily Returns";
pub const RETURNS: &str = "Performance";
pub const RISK: &str = "Risk";
pub const EXPOSURE: &str = "Exposure and Contribution";

/// Every row of the report, in display order.
pub const METRICS: [Metric; 27] = [
    m(CLASSIFICATION, "Accuracy", Format::Percent),
    m(CLASSIFICATION, "Positive Predictive Value", Format::Percent),
    m(CLASSIFICATION, "Negative Predictive Value", Format::Percent),
    m(DAILY, "Mean", Format::Percent),
    m(DAILY, "Standard deviation", Format::Percent),
    m(DAILY, "Minimum", Format::Percent),
    m(DAILY, "Maximum", Format::Percent),
    m(DAILY, "Skew", Format::Ratio),
    m(DAILY, "Kurtosis", Format::Ratio),
    m(RETURNS, "Alpha (annualised)", Format::Percent),
    m(RETURNS, "Annualised Return", Format::Percent),
    m(RETURNS, "Average Return (Monthly)", Format::Percent),
    m(RETURNS, "Average Gain (Monthly)", Format::Percent),
    m(RETURNS, "Average Loss (Monthly)", Format::Percent),
    m(RETURNS, "Annualized Volatility", Format::Percent),
    m(RETURNS, "Beta", Format::Ratio),
    m(RETURNS, "Sharpe Ratio", Format::Ratio),
    m(RETURNS, "Sortino Ratio", Format::Ratio),
    m(RISK, "Maximum Drawdown", Format::Percent),
    m(RISK, "% Winning Months", Format::Percent),
    m(RISK, "% Losing Months", Format::Percent),
    m(RISK, "Calmar Ratio", Format::Ratio),
    m(RISK, "Information Ratio", Format::Ratio),
    m(EXPOSURE, "% Exposure Long", Format::Percent),
    m(EXPOSURE, "% Exposure Short", Format::Percent),
    m(EXPOSURE, "Long Contribution", Format::Percent),
    m(EXPOSURE, "Short Contribution", Format::Percent),
];

/// Everything measured for one strategy. Parts that need raw sessions are
/// absent when the report is built from monthly returns alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub classification: Option<ClassificationRates>,
    pub daily: Option<SummaryStats>,
    pub perf: PerfReport,
    pub exposure: Option<ExposureStats>,
}

impl StrategyReport {
    /// Values in `METRICS` order.
    pub fn values(&self) -> Vec<Option<f64>> {
        let c = self.classification.as_ref();
        let d = self.daily.as_ref();
        let p = &self.perf;
        let e = self.exposure.as_ref();
        vec![
            c.map(|c| c.accuracy),
            c.and_then(|c| c.ppv),
            c.and_then(|c| c.npv),
            d.map(|d| d.mean),
            d.map(|d| d.std),
            d.map(|d| d.min),
            d.map(|d| d.max),
            d.and_then(|d| d.skew),
            d.and_then(|d| d.kurtosis),
            Some(p.alpha_annualized),
            Some(p.annualized_return),
            Some(p.avg_monthly_return),
            p.avg_monthly_gain,
            p.avg_monthly_loss,
            Some(p.annualized_vol),
            Some(p.beta),
            p.sharpe,
            p.sortino,
            Some(p.max_drawdown),
            Some(p.winning_share),
            Some(p.losing_share),
            p.calmar,
            p.information_ratio,
            e.map(|e| e.long_share),
            e.map(|e| e.short_share),
            e.and_then(|e| e.long_contribution),
            e.and_then(|e| e.short_contribution),
        ]
    }
}

/// Monthly strategy returns and the matching monthly risk-free rates.
pub fn monthly_with_rf(series: &SignalSeries, dataset: &Dataset) -> Result<(MonthlyReturns, Vec<f64>), ReportError> {
    let days = dataset.days();
    let mut yields = Vec::with_capacity(series.len());
    for row in series.rows() {
        let i = days
            .binary_search_by_key(&row.date, |d| d.date)
            .map_err(|_| ReportError::UnknownDate(row.date))?;
        yields.push((row.date, days[i].rf_annual));
    }
    Ok((compound_monthly(&series.daily_returns()), monthly_rf_from_daily(&yields)))
}

/// Full report for a backtested strategy against a benchmark run over the
/// same sessions.
pub fn strategy_report(
    series: &SignalSeries,
    benchmark: &SignalSeries,
    dataset: &Dataset,
) -> Result<StrategyReport, ReportError> {
    if series.len() != benchmark.len()
        || series
            .rows()
            .iter()
            .zip(benchmark.rows())
            .any(|(a, b)| a.date != b.date)
    {
        return Err(ReportError::BenchmarkDates);
    }
    let days = dataset.days();
    let mut labels = Vec::with_capacity(series.len());
    for row in series.rows() {
        let i = days
            .binary_search_by_key(&row.date, |d| d.date)
            .map_err(|_| ReportError::UnknownDate(row.date))?;
        labels.push(days[i].label);
    }
    let decisions = series.decisions();
    let calls: Vec<_> = decisions.iter().map(|d| d.call()).collect();
    let returns = series.strategy_returns();
    let (monthly, rf) = monthly_with_rf(series, dataset)?;
    let bench_monthly = compound_monthly(&benchmark.daily_returns());
    Ok(StrategyReport {
        classification: Some(classification_rates(&confusion_counts(&calls, &labels)?)?),
        daily: Some(summary_stats(&returns)?),
        perf: perf_report(&monthly, &bench_monthly, &rf)?,
        exposure: Some(exposure_stats(&decisions, &returns)?),
    })
}

/// Report from monthly returns only.
pub fn monthly_report(
    monthly: &MonthlyReturns,
    benchmark: &MonthlyReturns,
    rf: &[f64],
) -> Result<StrategyReport, ReportError> {
    Ok(StrategyReport {
        classification: None,
        daily: None,
        perf: perf_report(monthly, benchmark, rf)?,
        exposure: None,
    })
}

/// Two-decimal rendering; values that round to zero print unsigned.
pub fn format_value(v: Option<f64>, format: Format) -> String {
    let Some(v) = v else {
        return "-".to_string();
    };
    let (scaled, suffix) = match format {
        Format::Percent => (v * 100.0, "%"),
        Format::Ratio => (v, ""),
    };
    let s = format!("{scaled:.2}");
    let s = if s == "-0.00" { "0.00".to_string() } else { s };
    format!("{s}{suffix}")
}

/// Strategies side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub columns: Vec<String>,
    /// `values[row][column]`, rows in `METRICS` order.
    pub values: Vec<Vec<Option<f64>>>,
}

impl ReportTable {
    pub fn new(columns: Vec<(String, &StrategyReport)>) -> Self {
        let mut values = vec![Vec::with_capacity(columns.len()); METRICS.len()];
        for (_, r) in &columns {
            for (row, v) in values.iter_mut().zip(r.values()) {
                row.push(v);
            }
        }
        Self {
            columns: columns.into_iter().map(|(c, _)| c).collect(),
            values,
        }
    }

    pub fn value(&self, label: &str, column: usize) -> Option<f64> {
        let row = METRICS.iter().position(|m| m.label == label)?;
        self.values[row][column]
    }

    /// One markdown table per section.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (metric, row) in METRICS.iter().zip(&self.values) {
            if metric.section != section {
                section = metric.section;
                let _ = writeln!(out, "\n## {section}\n");
                let _ = writeln!(out, "| Metric | {} |", self.columns.join(" | "));
                let _ = writeln!(out, "|---|{}", "---:|".repeat(self.columns.len()));
            }
            let cells: Vec<String> = row.iter().map(|v| format_value(*v, metric.format)).collect();
            let _ = writeln!(out, "| {} | {} |", metric.label, cells.join(" | "));
        }
        out
    }

    /// `section,metric,<columns...>` with unrounded fractions; absent
    /// values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["section".to_string(), "metric".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (metric, row) in METRICS.iter().zip(&self.values) {
            let mut rec = vec![metric.section.to_string(), metric.label.to_string()];
            rec.extend(row.iter().map(|v| v.map_or(String::new(), |x| x.to_string())));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let err = |line: usize, message: String| ReportError::Parse { line, message };
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if header.len() < 3 || &header[0] != "section" || &header[1] != "metric" {
            return Err(err(1, "expected `section,metric,...` header".into()));
        }
        let columns: Vec<String> = header.iter().skip(2).map(String::from).collect();
        let mut values = Vec::with_capacity(METRICS.len());
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| err(line, e.to_string()))?;
            let metric = METRICS
                .get(i)
                .ok_or_else(|| err(line, "more rows than metrics".into()))?;
            if &rec[1] != metric.label {
                return Err(err(line, format!("expected metric `{}`", metric.label)));
            }
            let row = rec
                .iter()
                .skip(2)
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(Some).map_err(|e| err(line, e.to_string()))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            values.push(row);
        }
        if values.len() != METRICS.len() {
            return Err(err(values.len() + 1, "missing metric rows".into()));
        }
        Ok(Self { columns, values })
    }
}

const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// Year-by-month grid of percentage returns with a compounded yearly column.
pub fn monthly_grid_markdown(monthly: &MonthlyReturns) -> String {
    let mut out = format!("| Year | {} | Year |\n", MONTH_NAMES.join(" | "));
    let _ = writeln!(out, "|---|{}", "---:|".repeat(13));
    let mut years: Vec<i32> = monthly.months().iter().map(|m| m.year).collect();
    years.dedup();
    for year in years.into_iter().rev() {
        let mut cells = vec!["".to_string(); 12];
        let mut growth = 1.0;
        for m in monthly.months().iter().filter(|m| m.year == year) {
            cells[m.month as usize - 1] = format_value(Some(m.ret), Format::Percent);
            growth *= 1.0 + m.ret;
        }
        let _ = writeln!(
            out,
            "| {year} | {} | {} |",
            cells.join(" | "),
            format_value(Some(growth - 1.0), Format::Percent)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format_value(Some(0.030908), Format::Percent), "3.09%");
        assert_eq!(format_value(Some(-1e-17), Format::Percent), "0.00%");
        assert_eq!(format_value(Some(1.0), Format::Ratio), "1.00");
        assert_eq!(format_value(None, Format::Ratio), "-");
    }

    #[test]
    fn table_csv_round_trip() {
        let months = MonthlyReturns::from_values(2020, 1, &[0.01, -0.02, 0.03, 0.005]);
        let bench = MonthlyReturns::from_values(2020, 1, &[0.02, -0.01, 0.01, 0.0]);
        let r = monthly_report(&months, &bench, &[0.001; 4]).unwrap();
        let t = ReportTable::new(vec![("A".into(), &r), ("B, quoted".into(), &r)]);
        let back = ReportTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_markdown().contains("| Accuracy | - | - |"));
    }
}
