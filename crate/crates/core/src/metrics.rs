//! Classification and performance statistics.
//!
//! Daily statistics (moments, exposure, histogram) work on daytime returns.
//! Everything risk-adjusted works on calendar-month returns compounded from
//! the daily series. All returns are fractions; percent formatting is left to
//! the report writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::RatePoint;
use crate::types::{Decision, Direction};

/// Ratios with a denominator below this are reported as absent.
const ZERO_TOL: f64 = 1e-15;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("no scored observations")]
    Empty,
    #[error("return {0} <= -1 wipes out the account")]
    Ruin(f64),
    #[error("benchmark excess returns have zero variance")]
    ZeroBenchmarkVariance,
    #[error("months do not line up: {0}")]
    Misaligned(String),
    #[error("bin width must be positive, got {0}")]
    BadBinWidth(f64),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("months not strictly increasing at {year}-{month:02}")]
    Unordered { year: i32, month: u32 },
}

/// A dated daily return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyReturn {
    pub date: NaiveDate,
    pub ret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts predictions against observed labels. `None` predictions abstain
/// and are left out of every cell.
pub fn confusion_counts(
    predictions: &[Option<Direction>],
    labels: &[Direction],
) -> Result<ConfusionCounts, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p, l) {
            (None, _) => {}
            (Some(Direction::Long), Direction::Long) => c.tp += 1,
            (Some(Direction::Long), Direction::Short) => c.fp += 1,
            (Some(Direction::Short), Direction::Short) => c.tn += 1,
            (Some(Direction::Short), Direction::Long) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRates {
    pub accuracy: f64,
    /// `None` when nothing was predicted positive.
    pub ppv: Option<f64>,
    /// `None` when nothing was predicted negative.
    pub npv: Option<f64>,
}

pub fn classification_rates(c: &ConfusionCounts) -> Result<ClassificationRates, MetricsError> {
    let total = c.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(ClassificationRates {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        ppv: ratio(c.tp, c.tp + c.fp),
        npv: ratio(c.tn, c.tn + c.fn_),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Population skewness; absent for a constant series.
    pub skew: Option<f64>,
    /// Pearson (non-excess) kurtosis; absent for a constant series.
    pub kurtosis: Option<f64>,
}

pub fn summary_stats(values: &[f64]) -> Result<SummaryStats, MetricsError> {
    let n = values.len();
    if n < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let std = m2.sqrt();
    let (skew, kurtosis) = if m2 > ZERO_TOL * ZERO_TOL {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        mean,
        std,
        min,
        max,
        skew,
        kurtosis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthlyReturn {
    pub year: i32,
    pub month: u32,
    pub ret: f64,
}

impl MonthlyReturn {
    pub fn key(&self) -> (i32, u32) {
        (self.year, self.month)
    }
}

/// Calendar-month returns in strictly increasing month order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonthlyReturns {
    months: Vec<MonthlyReturn>,
}

impl MonthlyReturns {
    pub fn new(months: Vec<MonthlyReturn>) -> Result<Self, MetricsError> {
        for m in &months {
            if !(1..=12).contains(&m.month) {
                return Err(MetricsError::Misaligned(format!(
                    "month {} out of range",
                    m.month
                )));
            }
        }
        if let Some(pair) = months.windows(2).find(|p| p[1].key() <= p[0].key()) {
            return Err(MetricsError::Unordered {
                year: pair[1].year,
                month: pair[1].month,
            });
        }
        Ok(Self { months })
    }

    /// Consecutive months starting at `year`/`month`.
    pub fn from_values(year: i32, month: u32, values: &[f64]) -> Self {
        let mut months = Vec::with_capacity(values.len());
        let (mut y, mut m) = (year, month);
        for &ret in values {
            months.push(MonthlyReturn { year: y, month: m, ret });
            m += 1;
            if m > 12 {
                m = 1;
                y += 1;
            }
        }
        Self { months }
    }

    pub fn months(&self) -> &[MonthlyReturn] {
        &self.months
    }

    pub fn values(&self) -> Vec<f64> {
        self.months.iter().map(|m| m.ret).collect()
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    /// Parses `year,month,percent` rows.
    pub fn from_percent_csv(text: &str) -> Result<Self, MetricsError> {
        let mut months = Vec::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, h)) if h.replace(' ', "").eq_ignore_ascii_case("year,month,percent") => {}
            Some((line, h)) => {
                return Err(MetricsError::Malformed {
                    line,
                    message: format!("expected header `year,month,percent`, found `{h}`"),
                })
            }
            None => {
                return Err(MetricsError::Malformed {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        }
        for (line, l) in lines {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            let bad = |message: String| MetricsError::Malformed { line, message };
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", fields.len())));
            }
            let year = fields[0]
                .parse()
                .map_err(|_| bad(format!("bad year `{}`", fields[0])))?;
            let month = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad month `{}`", fields[1])))?;
            let pct: f64 = fields[2]
                .parse()
                .map_err(|_| bad(format!("bad percent `{}`", fields[2])))?;
            months.push(MonthlyReturn {
                year,
                month,
                ret: pct / 100.0,
            });
        }
        Self::new(months)
    }

    /// Writes `year,month,percent` rows, the inverse of `from_percent_csv`.
    pub fn to_percent_csv(&self) -> String {
        let mut out = String::from("year,month,percent\n");
        for m in &self.months {
            let _ = writeln!(out, "{},{},{}", m.year, m.month, m.ret * 100.0);
        }
        out
    }
}

/// Compounds daily returns into calendar months: `∏(1 + r_d) − 1`.
pub fn compound_monthly(daily: &[DailyReturn]) -> MonthlyReturns {
    let mut acc: BTreeMap<(i32, u32), f64> = BTreeMap::new();
    for d in daily {
        *acc.entry((d.date.year(), d.date.month())).or_insert(1.0) *= 1.0 + d.ret;
    }
    MonthlyReturns {
        months: acc
            .into_iter()
            .map(|((year, month), growth)| MonthlyReturn {
                year,
                month,
                ret: growth - 1.0,
            })
            .collect(),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Geometric annualization of `n` monthly returns: `(∏(1+r))^(12/n) − 1`.
fn annualized_growth(monthly: &[f64]) -> Result<f64, MetricsError> {
    let mut log_growth = 0.0;
    for &r in monthly {
        if r <= -1.0 {
            return Err(MetricsError::Ruin(r));
        }
        log_growth += r.ln_1p();
    }
    Ok((log_growth * 12.0 / monthly.len() as f64).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annualized {
    pub annualized_return: f64,
    /// Sample standard deviation of monthly returns times √12.
    pub annualized_vol: f64,
}

pub fn annualize(monthly: &[f64]) -> Result<Annualized, MetricsError> {
    if monthly.len() < 2 {
        return Err(MetricsError::TooFew {
            needed: 2,
            got: monthly.len(),
        });
    }
    Ok(Annualized {
        annualized_return: annualized_growth(monthly)?,
        annualized_vol: sample_std(monthly) * 12f64.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capm {
    /// Monthly OLS intercept times 12.
    pub alpha_annualized: f64,
    pub beta: f64,
}

/// Regresses the model's monthly excess returns on the benchmark's.
pub fn capm(model: &[f64], benchmark: &[f64], rf: &[f64]) -> Result<Capm, MetricsError> {
    check_len(model, benchmark)?;
    check_len(model, rf)?;
    if model.len() < 3 {
        return Err(MetricsError::TooFew {
            needed: 3,
            got: model.len(),
        });
    }
    let y: Vec<f64> = model.iter().zip(rf).map(|(r, f)| r - f).collect();
    let x: Vec<f64> = benchmark.iter().zip(rf).map(|(r, f)| r - f).collect();
    let (mx, my) = (mean(&x), mean(&y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(&y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    if sxx <= ZERO_TOL * ZERO_TOL {
        return Err(MetricsError::ZeroBenchmarkVariance);
    }
    let beta = sxy / sxx;
    Ok(Capm {
        alpha_annualized: (my - beta * mx) * 12.0,
        beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskRatios {
    pub sharpe: Option<f64>,
    pub sortino: Option<f64>,
    pub information_ratio: Option<f64>,
}

/// Sharpe, Sortino (target = rf) and information ratio on monthly data.
pub fn risk_ratios(
    monthly: &[f64],
    rf: &[f64],
    benchmark: &[f64],
) -> Result<RiskRatios, MetricsError> {
    check_len(monthly, rf)?;
    check_len(monthly, benchmark)?;
    let ann = annualize(monthly)?;
    let rf_ann = annualized_growth(rf)?;
    let excess_ann = ann.annualized_return - rf_ann;
    let sharpe = (ann.annualized_vol > ZERO_TOL).then(|| excess_ann / ann.annualized_vol);

    let downside = (monthly
        .iter()
        .zip(rf)
        .map(|(r, f)| (r - f).min(0.0).powi(2))
        .sum::<f64>()
        / monthly.len() as f64)
        .sqrt()
        * 12f64.sqrt();
    let sortino = (downside > ZERO_TOL).then(|| excess_ann / downside);

    let active: Vec<f64> = monthly.iter().zip(benchmark).map(|(r, b)| r - b).collect();
    let tracking = sample_std(&active) * 12f64.sqrt();
    let information_ratio = (tracking > ZERO_TOL).then(|| mean(&active) * 12.0 / tracking);

    Ok(RiskRatios {
        sharpe,
        sortino,
        information_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drawdown {
    /// Worst peak-to-trough decline of the compounded curve; `<= 0`.
    pub max_drawdown: f64,
    pub calmar: Option<f64>,
}

/// Maximum drawdown of the monthly equity curve (starting wealth 1.0 counts
/// as a peak) and the Calmar ratio.
pub fn drawdown_calmar(monthly: &[f64]) -> Result<Drawdown, MetricsError> {
    if monthly.is_empty() {
        return Err(MetricsError::TooFew { needed: 1, got: 0 });
    }
    let max_drawdown = max_drawdown(monthly)?;
    let calmar = if max_drawdown < -ZERO_TOL && monthly.len() >= 2 {
        Some(annualized_growth(monthly)? / max_drawdown.abs())
    } else {
        None
    };
    Ok(Drawdown {
        max_drawdown,
        calmar,
    })
}

/// Running-peak drawdown of `∏(1 + r)`, including the initial unit of wealth.
pub fn max_drawdown(returns: &[f64]) -> Result<f64, MetricsError> {
    let (mut equity, mut peak, mut worst) = (1.0f64, 1.0f64, 0.0f64);
    for &r in returns {
        if r <= -1.0 {
            return Err(MetricsError::Ruin(r));
        }
        equity *= 1.0 + r;
        peak = peak.max(equity);
        worst = worst.min(equity / peak - 1.0);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthWinLoss {
    pub avg_return: f64,
    pub avg_gain: Option<f64>,
    pub avg_loss: Option<f64>,
    /// Fraction of months with a strictly positive return.
    pub winning_share: f64,
    /// Fraction of months with a zero or negative return.
    pub losing_share: f64,
}

pub fn month_win_loss(monthly: &[f64]) -> Result<MonthWinLoss, MetricsError> {
    if monthly.is_empty() {
        return Err(MetricsError::TooFew { needed: 1, got: 0 });
    }
    let gains: Vec<f64> = monthly.iter().copied().filter(|r| *r > 0.0).collect();
    let losses: Vec<f64> = monthly.iter().copied().filter(|r| *r < 0.0).collect();
    let n = monthly.len() as f64;
    let avg = |xs: &[f64]| (!xs.is_empty()).then(|| mean(xs));
    let winning_share = gains.len() as f64 / n;
    Ok(MonthWinLoss {
        avg_return: mean(monthly),
        avg_gain: avg(&gains),
        avg_loss: avg(&losses),
        winning_share,
        losing_share: (monthly.len() - gains.len()) as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureStats {
    /// Fraction of days holding a long position.
    pub long_share: f64,
    /// Fraction of days holding a short position.
    pub short_share: f64,
    /// Share of the simple-sum profit earned on long days.
    pub long_contribution: Option<f64>,
    pub short_contribution: Option<f64>,
}

impl ExposureStats {
    pub fn total_exposure(&self) -> f64 {
        self.long_share + self.short_share
    }
}

pub fn exposure_stats(
    decisions: &[Decision],
    strategy_returns: &[f64],
) -> Result<ExposureStats, MetricsError> {
    check_len(decisions, strategy_returns)?;
    if decisions.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = decisions.len() as f64;
    let (mut long_days, mut short_days) = (0usize, 0usize);
    let (mut long_sum, mut short_sum, mut total) = (0.0, 0.0, 0.0);
    for (d, r) in decisions.iter().zip(strategy_returns) {
        total += r;
        match d.call() {
            Some(Direction::Long) => {
                long_days += 1;
                long_sum += r;
            }
            Some(Direction::Short) => {
                short_days += 1;
                short_sum += r;
            }
            None => {}
        }
    }
    let share = |s: f64| (total.abs() > ZERO_TOL).then(|| s / total);
    Ok(ExposureStats {
        long_share: long_days as f64 / n,
        short_share: short_days as f64 / n,
        long_contribution: share(long_sum),
        short_contribution: share(short_sum),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub count: usize,
}

/// Fixed-width histogram with one bin centered on zero, so edges sit at
/// `(k ± ½)·width`. Empty bins between the extremes are included.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>, MetricsError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(MetricsError::BadBinWidth(bin_width));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(bin_index(*v, bin_width)).or_default() += 1;
    }
    let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) else {
        return Ok(Vec::new());
    };
    Ok((lo..=hi)
        .map(|k| HistogramBin {
            lower: (k as f64 - 0.5) * bin_width,
            count: counts.get(&k).copied().unwrap_or(0),
        })
        .collect())
}

fn bin_index(v: f64, width: f64) -> i64 {
    (v / width + 0.5).floor() as i64
}

/// Monthly risk-free fractions from a table of annual yields.
///
/// Each month uses the mean yield of the observations inside it, divided by
/// 12. Months with no observation take the latest earlier one.
pub fn monthly_rf_from_rates(
    months: &MonthlyReturns,
    rates: &[RatePoint],
) -> Result<Vec<f64>, MetricsError> {
    let mut by_month: BTreeMap<(i32, u32), (f64, usize)> = BTreeMap::new();
    for r in rates {
        let e = by_month
            .entry((r.date.year(), r.date.month()))
            .or_insert((0.0, 0));
        e.0 += r.annual_yield;
        e.1 += 1;
    }
    months
        .months()
        .iter()
        .map(|m| {
            by_month
                .range(..=m.key())
                .next_back()
                .map(|(_, (sum, n))| sum / *n as f64 / 12.0)
                .ok_or_else(|| {
                    MetricsError::Misaligned(format!(
                        "no rate on or before {}-{:02}",
                        m.year, m.month
                    ))
                })
        })
        .collect()
}

/// Monthly risk-free fractions from per-session annual yields: the mean
/// yield of the sessions in each month, divided by 12.
pub fn monthly_rf_from_daily(daily_yields: &[(NaiveDate, f64)]) -> Vec<f64> {
    let mut by_month: BTreeMap<(i32, u32), (f64, usize)> = BTreeMap::new();
    for (date, y) in daily_yields {
        let e = by_month.entry((date.year(), date.month())).or_insert((0.0, 0));
        e.0 += y;
        e.1 += 1;
    }
    by_month
        .values()
        .map(|(sum, n)| sum / *n as f64 / 12.0)
        .collect()
}

/// Every monthly metric for one strategy measured against a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub annualized_return: f64,
    pub annualized_vol: f64,
    pub alpha_annualized: f64,
    pub beta: f64,
    pub sharpe: Option<f64>,
    pub sortino: Option<f64>,
    pub calmar: Option<f64>,
    pub information_ratio: Option<f64>,
    pub max_drawdown: f64,
    pub avg_monthly_return: f64,
    pub avg_monthly_gain: Option<f64>,
    pub avg_monthly_loss: Option<f64>,
    pub winning_share: f64,
    pub losing_share: f64,
}

pub fn perf_report(
    model: &MonthlyReturns,
    benchmark: &MonthlyReturns,
    rf: &[f64],
) -> Result<PerfReport, MetricsError> {
    if let Some((a, b)) = model
        .months()
        .iter()
        .zip(benchmark.months())
        .find(|(a, b)| a.key() != b.key())
    {
        return Err(MetricsError::Misaligned(format!(
            "model {}-{:02} vs benchmark {}-{:02}",
            a.year, a.month, b.year, b.month
        )));
    }
    if model.len() != benchmark.len() {
        return Err(MetricsError::Misaligned(format!(
            "{} model months vs {} benchmark months",
            model.len(),
            benchmark.len()
        )));
    }
    let r = model.values();
    let b = benchmark.values();
    let ann = annualize(&r)?;
    let reg = capm(&r, &b, rf)?;
    let ratios = risk_ratios(&r, rf, &b)?;
    let dd = drawdown_calmar(&r)?;
    let wl = month_win_loss(&r)?;
    Ok(PerfReport {
        annualized_return: ann.annualized_return,
        annualized_vol: ann.annualized_vol,
        alpha_annualized: reg.alpha_annualized,
        beta: reg.beta,
        sharpe: ratios.sharpe,
        sortino: ratios.sortino,
        calmar: dd.calmar,
        information_ratio: ratios.information_ratio,
        max_drawdown: dd.max_drawdown,
        avg_monthly_return: wl.avg_return,
        avg_monthly_gain: wl.avg_gain,
        avg_monthly_loss: wl.avg_loss,
        winning_share: wl.winning_share,
        losing_share: wl.losing_share,
    })
}

fn check_len<A, B>(a: &[A], b: &[B]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn confusion_enumeration() {
        use Direction::*;
        let c = confusion_counts(&[Some(Long), Some(Long), Some(Short)], &[Long, Short, Short])
            .unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 0
            }
        );
        let r = classification_rates(&c).unwrap();
        assert!(close(r.accuracy, 2.0 / 3.0, 1e-15));
        assert_eq!(r.ppv, Some(0.5));
        assert_eq!(r.npv, Some(1.0));
    }

    #[test]
    fn confusion_rejects_length_mismatch() {
        assert!(matches!(
            confusion_counts(&[None], &[]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn abstentions_are_not_counted() {
        use Direction::*;
        let c = confusion_counts(&[None, Some(Long)], &[Long, Long]).unwrap();
        assert_eq!(c.total(), 1);
    }

    #[test]
    fn undefined_predictive_values() {
        let all_negative = ConfusionCounts {
            tp: 0,
            fp: 0,
            tn: 5,
            fn_: 5,
        };
        let r = classification_rates(&all_negative).unwrap();
        assert_eq!(r.ppv, None);
        assert_eq!(r.npv, Some(0.5));
        assert_eq!(r.accuracy, 0.5);
        let passive = ConfusionCounts {
            tp: 824,
            fp: 685,
            tn: 0,
            fn_: 0,
        };
        let r = classification_rates(&passive).unwrap();
        assert_eq!(r.npv, None);
        assert!(close(r.accuracy * 100.0, 54.61, 0.005));
        assert_eq!(
            classification_rates(&ConfusionCounts::default()),
            Err(MetricsError::Empty)
        );
    }

    #[test]
    fn moments_of_three_points() {
        let s = summary_stats(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!(close(s.std, (2.0f64 / 3.0).sqrt(), 1e-15));
        assert!(close(s.skew.unwrap(), 0.0, 1e-15));
        assert!(close(s.kurtosis.unwrap(), 1.5, 1e-12));
        assert_eq!((s.min, s.max), (-1.0, 1.0));
    }

    #[test]
    fn constant_series_has_no_shape() {
        let s = summary_stats(&[0.01; 10]).unwrap();
        assert!(close(s.mean, 0.01, 1e-15));
        assert!(s.std < 1e-15);
        assert_eq!((s.skew, s.kurtosis), (None, None));
        assert!(summary_stats(&[1.0]).is_err());
    }

    #[test]
    fn monthly_compounding() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        let daily = [
            DailyReturn { date: d("2020-01-02"), ret: 0.01 },
            DailyReturn { date: d("2020-01-03"), ret: 0.01 },
            DailyReturn { date: d("2020-02-03"), ret: -0.05 },
            DailyReturn { date: d("2020-04-01"), ret: 0.1 },
            DailyReturn { date: d("2020-04-02"), ret: -0.1 },
        ];
        let m = compound_monthly(&daily);
        let keys: Vec<_> = m.months().iter().map(|x| x.key()).collect();
        assert_eq!(keys, vec![(2020, 1), (2020, 2), (2020, 4)]);
        let v = m.values();
        assert!(close(v[0], 0.0201, 1e-15));
        assert!(close(v[1], -0.05, 1e-15));
        assert!(close(v[2], -0.01, 1e-15));
    }

    #[test]
    fn annualize_examples() {
        let a = annualize(&[0.01; 12]).unwrap();
        assert!(close(a.annualized_return, 1.01f64.powi(12) - 1.0, 1e-14));
        assert!(close(a.annualized_return, 0.126825, 1e-6));
        assert!(a.annualized_vol < 1e-15);
        let z = annualize(&[0.0; 6]).unwrap();
        assert_eq!((z.annualized_return, z.annualized_vol), (0.0, 0.0));
        assert_eq!(annualize(&[0.1, -1.0]), Err(MetricsError::Ruin(-1.0)));
    }

    #[test]
    fn capm_constructed_regressions() {
        let bench = [0.01, -0.02, 0.03, 0.005, -0.01, 0.02];
        let rf = [0.001, 0.001, 0.002, 0.002, 0.003, 0.003];
        let same = capm(&bench, &bench, &rf).unwrap();
        assert_eq!(same.beta, 1.0);
        assert_eq!(same.alpha_annualized, 0.0);

        let double: Vec<f64> = bench.iter().zip(&rf).map(|(b, f)| 2.0 * (b - f) + f).collect();
        let c = capm(&double, &bench, &rf).unwrap();
        assert!(close(c.beta, 2.0, 1e-12));
        assert!(close(c.alpha_annualized, 0.0, 1e-12));

        let shifted: Vec<f64> = bench.iter().zip(&rf).map(|(b, f)| (b - f) + 0.01 + f).collect();
        let c = capm(&shifted, &bench, &rf).unwrap();
        assert!(close(c.beta, 1.0, 1e-12));
        assert!(close(c.alpha_annualized, 0.12, 1e-12));

        assert_eq!(
            capm(&bench[..3], &[0.01; 3], &[0.0; 3]),
            Err(MetricsError::ZeroBenchmarkVariance)
        );
    }

    #[test]
    fn ratios_with_degenerate_denominators() {
        let r = risk_ratios(&[0.01; 12], &[0.0; 12], &[0.01; 12]).unwrap();
        assert_eq!(r.sharpe, None);
        assert_eq!(r.sortino, None);
        assert_eq!(r.information_ratio, None);
    }

    #[test]
    fn drawdown_examples() {
        let d = drawdown_calmar(&[-0.10, -0.10]).unwrap();
        assert!(close(d.max_drawdown, -0.19, 1e-15));
        let d = drawdown_calmar(&[0.10, -0.05, 0.10]).unwrap();
        assert!(close(d.max_drawdown, -0.05, 1e-15));
        let up = drawdown_calmar(&[0.01, 0.02]).unwrap();
        assert_eq!(up.max_drawdown, 0.0);
        assert_eq!(up.calmar, None);
    }

    #[test]
    fn win_loss_examples() {
        let w = month_win_loss(&[0.01, -0.01]).unwrap();
        assert_eq!(w.avg_gain, Some(0.01));
        assert_eq!(w.avg_loss, Some(-0.01));
        assert_eq!((w.winning_share, w.losing_share), (0.5, 0.5));
        let z = month_win_loss(&[0.0; 4]).unwrap();
        assert_eq!(z.winning_share, 0.0);
        assert_eq!(z.losing_share, 1.0);
        assert_eq!(z.avg_gain, None);
    }

    #[test]
    fn exposure_examples() {
        let passive = vec![Decision::long(); 4];
        let rets = [0.01, -0.02, 0.005, 0.02];
        let e = exposure_stats(&passive, &rets).unwrap();
        assert_eq!(e.long_share, 1.0);
        assert_eq!(e.short_share, 0.0);
        assert_eq!(e.long_contribution, Some(1.0));

        let closed = vec![Decision::closed(Direction::Long); 4];
        let e = exposure_stats(&closed, &[0.0; 4]).unwrap();
        assert_eq!(e.total_exposure(), 0.0);
        assert_eq!(e.long_contribution, None);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.0, 0.001], 0.0033).unwrap();
        assert_eq!(h.len(), 1);
        assert!(close(h[0].lower, -0.00165, 1e-15));
        assert_eq!(h[0].count, 2);

        let h = histogram(&[0.003], 0.0033).unwrap();
        assert!(close(h[0].lower, 0.00165, 1e-15));

        let h = histogram(&[0.005], 0.0033).unwrap();
        assert!(close(h[0].lower, 0.00495, 1e-15));

        let h = histogram(&[-0.004, 0.004], 0.0033).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 0, 1]);
        assert!(histogram(&[0.0], 0.0).is_err());
    }

    #[test]
    fn monthly_csv_round_trip() {
        let m = MonthlyReturns::from_values(2018, 11, &[0.031, -0.0351, 0.0]);
        let back = MonthlyReturns::from_percent_csv(&m.to_percent_csv()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.months()[2].key(), (2019, 1));
        for (a, b) in m.values().iter().zip(back.values()) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn unordered_months_rejected() {
        let text = "year,month,percent\n2019,2,1.0\n2019,1,1.0\n";
        assert!(matches!(
            MonthlyReturns::from_percent_csv(text),
            Err(MetricsError::Unordered { .. })
        ));
    }

    #[test]
    fn rf_lookup_forward_fills() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        let rates = [
            RatePoint { date: d("2020-01-01"), annual_yield: 0.012 },
            RatePoint { date: d("2020-01-15"), annual_yield: 0.024 },
        ];
        let months = MonthlyReturns::from_values(2020, 1, &[0.0, 0.0]);
        let rf = monthly_rf_from_rates(&months, &rates).unwrap();
        assert!(close(rf[0], 0.0015, 1e-15));
        assert!(close(rf[1], 0.0015, 1e-15));
        let early = MonthlyReturns::from_values(2019, 12, &[0.0]);
        assert!(monthly_rf_from_rates(&early, &rates).is_err());
    }
}
