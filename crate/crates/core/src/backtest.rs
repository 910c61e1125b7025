//! Walk-forward orchestration and equity curves.
//!
//! The sample is cut into consecutive test windows, each preceded by a
//! rolling training window. A model is fitted once per window and then
//! decides every test day without refitting. The concatenated decisions
//! form one out-of-sample signal.

use std::fmt::Write as _;
use std::ops::Range;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::metrics::DailyReturn;
use crate::signals::{DecisionView, SignalError, SignalModel, TrainSlice};
use crate::types::{Decision, Direction};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("{n_days} sessions do not exceed the {train_window}-day training window")]
    TooShort { n_days: usize, train_window: usize },
    #[error("window lengths must be positive")]
    ZeroWindow,
    #[error("cost per side must be finite and non-negative, got {0}")]
    BadCost(f64),
    #[error("model fit failed in window {window}: {source}")]
    ModelFit {
        window: usize,
        #[source]
        source: SignalError,
    },
    #[error("model decision failed on {date}: {source}")]
    ModelDecide {
        date: NaiveDate,
        #[source]
        source: SignalError,
    },
    #[error("return {ret} on {date} wipes out the account")]
    Ruin { date: NaiveDate, ret: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub index: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkForwardPlan {
    pub train_window: usize,
    pub test_window: usize,
    pub windows: Vec<Window>,
}

impl WalkForwardPlan {
    /// All test indices, in order.
    pub fn test_days(&self) -> impl Iterator<Item = usize> + '_ {
        self.windows.iter().flat_map(|w| w.test.clone())
    }
}

/// Test windows start at `train_window` and advance by `test_window`; a
/// final shorter window is kept.
pub fn plan_windows(
    n_days: usize,
    train_window: usize,
    test_window: usize,
) -> Result<WalkForwardPlan, BacktestError> {
    if train_window == 0 || test_window == 0 {
        return Err(BacktestError::ZeroWindow);
    }
    if n_days <= train_window {
        return Err(BacktestError::TooShort {
            n_days,
            train_window,
        });
    }
    let windows = (train_window..n_days)
        .step_by(test_window)
        .enumerate()
        .map(|(index, start)| Window {
            index,
            train: start - train_window..start,
            test: start..(start + test_window).min(n_days),
        })
        .collect();
    Ok(WalkForwardPlan {
        train_window,
        test_window,
        windows,
    })
}

pub fn window_seed(master_seed: u64, window: usize) -> u64 {
    master_seed ^ window as u64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Independent windows are fitted on the rayon pool. Models that carry
    /// state between windows always run in order.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Fractional cost charged on entry and again on exit of every open day.
    pub cost_per_side: f64,
    pub execution: Execution,
}

/// `position × r`, less two sides of cost when a position is open.
pub fn strategy_return(decision: Decision, daytime_return: f64, cost_per_side: f64) -> f64 {
    let gross = decision.position() * daytime_return;
    if decision.is_open() {
        gross - 2.0 * cost_per_side
    } else {
        gross
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalRow {
    pub date: NaiveDate,
    pub decision: Decision,
    pub strategy_return: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    rows: Vec<SignalRow>,
}

const SIGNALS_HEADER: &str = "date,direction,scale,strategy_return";

impl SignalSeries {
    pub fn new(rows: Vec<SignalRow>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[SignalRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn decisions(&self) -> Vec<Decision> {
        self.rows.iter().map(|r| r.decision).collect()
    }

    pub fn strategy_returns(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.strategy_return).collect()
    }

    pub fn daily_returns(&self) -> Vec<DailyReturn> {
        self.rows
            .iter()
            .map(|r| DailyReturn {
                date: r.date,
                ret: r.strategy_return,
            })
            .collect()
    }

    /// `direction` is written as `1` or `-1`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SIGNALS_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.date,
                r.decision.direction.sign(),
                r.decision.scale,
                r.strategy_return
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, BacktestError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| parse_err(1, e))?.clone();
        if header.iter().collect::<Vec<_>>().join(",") != SIGNALS_HEADER {
            return Err(parse_err(1, format!("expected header `{SIGNALS_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| parse_err(line, e))?;
            if rec.len() != 4 {
                return Err(parse_err(line, "expected 4 fields"));
            }
            let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| parse_err(line, e))?;
            let sign: i64 = rec[1].parse().map_err(|e| parse_err(line, e))?;
            let direction =
                Direction::from_sign(sign).ok_or_else(|| parse_err(line, "direction must be 1 or -1"))?;
            let scale: f64 = rec[2].parse().map_err(|e| parse_err(line, e))?;
            if !(0.0..=1.0).contains(&scale) {
                return Err(parse_err(line, "scale outside [0, 1]"));
            }
            let strategy_return: f64 = rec[3].parse().map_err(|e| parse_err(line, e))?;
            rows.push(SignalRow {
                date,
                decision: Decision::new(direction, scale),
                strategy_return,
            });
        }
        Ok(Self { rows })
    }
}

fn parse_err(line: usize, e: impl ToString) -> BacktestError {
    BacktestError::Parse {
        line,
        message: e.to_string(),
    }
}

fn run_window(
    model: &mut dyn SignalModel,
    dataset: &Dataset,
    window: &Window,
    seed: u64,
    cost: f64,
) -> Result<Vec<SignalRow>, BacktestError> {
    let days = dataset.days();
    let train = TrainSlice::new(&days[..window.train.end], window.train.start);
    model.fit(&train, seed).map_err(|source| BacktestError::ModelFit {
        window: window.index,
        source,
    })?;
    window
        .test
        .clone()
        .map(|t| {
            let day = &days[t];
            let decision = model
                .decide(&DecisionView::at(days, t))
                .map_err(|source| BacktestError::ModelDecide {
                    date: day.date,
                    source,
                })?;
            Ok(SignalRow {
                date: day.date,
                decision,
                strategy_return: strategy_return(decision, day.daytime_return, cost),
            })
        })
        .collect()
}

/// Fits and runs every window of `plan`. Window `k` is fitted with seed
/// `master_seed ^ k`. When `carries_state` is set a single model instance
/// is refitted window after window; otherwise each window gets a fresh
/// model from `factory`.
pub fn run_walkforward<F>(
    factory: F,
    carries_state: bool,
    dataset: &Dataset,
    plan: &WalkForwardPlan,
    master_seed: u64,
    opts: &RunOptions,
) -> Result<SignalSeries, BacktestError>
where
    F: Fn() -> Box<dyn SignalModel> + Sync,
{
    let cost = opts.cost_per_side;
    if !(cost >= 0.0 && cost.is_finite()) {
        return Err(BacktestError::BadCost(cost));
    }
    if let Some(last) = plan.windows.last() {
        if last.test.end > dataset.len() {
            return Err(BacktestError::TooShort {
                n_days: dataset.len(),
                train_window: plan.train_window,
            });
        }
    }
    let per_window: Vec<Vec<SignalRow>> = if carries_state {
        let mut model = factory();
        plan.windows
            .iter()
            .map(|w| run_window(model.as_mut(), dataset, w, window_seed(master_seed, w.index), cost))
            .collect::<Result<_, _>>()?
    } else {
        let one = |w: &Window| {
            let mut model = factory();
            run_window(model.as_mut(), dataset, w, window_seed(master_seed, w.index), cost)
        };
        match opts.execution {
            Execution::Sequential => plan.windows.iter().map(one).collect::<Result<_, _>>()?,
            Execution::Parallel => plan.windows.par_iter().map(one).collect::<Result<_, _>>()?,
        }
    };
    Ok(SignalSeries::new(per_window.into_iter().flatten().collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquityPoint {
    pub date: NaiveDate,
    pub value: f64,
}

/// Daily-compounded value of one unit invested before the first return.
pub fn equity_curve(returns: &[DailyReturn]) -> Result<Vec<EquityPoint>, BacktestError> {
    let mut value = 1.0;
    returns
        .iter()
        .map(|r| {
            if r.ret.is_nan() || r.ret <= -1.0 {
                return Err(BacktestError::Ruin {
                    date: r.date,
                    ret: r.ret,
                });
            }
            value *= 1.0 + r.ret;
            Ok(EquityPoint {
                date: r.date,
                value,
            })
        })
        .collect()
}

pub fn equity_to_csv(curve: &[EquityPoint]) -> String {
    let mut out = String::from("date,value\n");
    for p in curve {
        let _ = writeln!(out, "{},{}", p.date, p.value);
    }
    out
}

pub fn equity_from_csv(text: &str) -> Result<Vec<EquityPoint>, BacktestError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| parse_err(1, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["date", "value"] {
        return Err(parse_err(1, "expected header `date,value`"));
    }
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let line = i + 2;
            let rec = rec.map_err(|e| parse_err(line, e))?;
            if rec.len() != 2 {
                return Err(parse_err(line, "expected 2 fields"));
            }
            Ok(EquityPoint {
                date: NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| parse_err(line, e))?,
                value: rec[1].parse().map_err(|e| parse_err(line, e))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::Passive;
    use crate::synth::{synth_dataset, SynthConfig};

    #[test]
    fn plan_examples() {
        let p = plan_windows(350, 250, 50).unwrap();
        assert_eq!(p.windows.len(), 2);
        assert_eq!((p.windows[0].train.clone(), p.windows[0].test.clone()), (0..250, 250..300));
        assert_eq!((p.windows[1].train.clone(), p.windows[1].test.clone()), (50..300, 300..350));
        assert_eq!(plan_windows(300, 250, 50).unwrap().windows.len(), 1);
        let daily = plan_windows(251, 250, 1).unwrap();
        assert_eq!(daily.windows.len(), 1);
        assert_eq!(daily.windows[0].test, 250..251);
        assert!(matches!(plan_windows(250, 250, 50), Err(BacktestError::TooShort { .. })));
    }

    #[test]
    fn partial_final_window_is_kept() {
        let p = plan_windows(1509, 250, 50).unwrap();
        assert_eq!(p.windows.len(), 26);
        assert_eq!(p.windows.last().unwrap().test, 1500..1509);
        assert_eq!(p.test_days().count(), 1259);
    }

    #[test]
    fn strategy_return_examples() {
        assert_eq!(strategy_return(Decision::full(Direction::Short), 0.01, 0.0), -0.01);
        assert_eq!(strategy_return(Decision::closed(Direction::Long), 0.05, 0.001), 0.0);
        assert!((strategy_return(Decision::long(), 0.01, 0.001) - 0.008).abs() < 1e-15);
    }

    #[test]
    fn passive_reproduces_daytime_returns() {
        let ds = synth_dataset(&SynthConfig {
            days: 320,
            ..SynthConfig::default()
        });
        let plan = plan_windows(ds.len(), 250, 50).unwrap();
        let s = run_walkforward(|| Box::new(Passive), false, &ds, &plan, 1, &RunOptions::default())
            .unwrap();
        assert_eq!(s.len(), 70);
        for (row, day) in s.rows().iter().zip(&ds.days()[250..]) {
            assert_eq!(row.date, day.date);
            assert_eq!(row.strategy_return, day.daytime_return);
        }
    }

    #[test]
    fn equity_examples() {
        let d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let r = |v: &[f64]| -> Vec<DailyReturn> {
            v.iter().map(|&ret| DailyReturn { date: d, ret }).collect()
        };
        let c = equity_curve(&r(&[0.01, 0.01])).unwrap();
        assert!((c[0].value - 1.01).abs() < 1e-15 && (c[1].value - 1.0201).abs() < 1e-15);
        assert!(equity_curve(&[]).unwrap().is_empty());
        let c = equity_curve(&r(&[0.10, -0.10])).unwrap();
        assert!((c[1].value - 0.99).abs() < 1e-15);
        assert!(matches!(equity_curve(&r(&[-1.0])), Err(BacktestError::Ruin { .. })));
    }

    #[test]
    fn signals_csv_round_trip() {
        let d = NaiveDate::from_ymd_opt(2021, 3, 4).unwrap();
        let s = SignalSeries::new(vec![
            SignalRow {
                date: d,
                decision: Decision::full(Direction::Short),
                strategy_return: -0.012345678901234,
            },
            SignalRow {
                date: d.succ_opt().unwrap(),
                decision: Decision::closed(Direction::Long),
                strategy_return: 0.0,
            },
        ]);
        assert_eq!(SignalSeries::from_csv(&s.to_csv()).unwrap(), s);
    }
}
