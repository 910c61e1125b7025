//! Feature builders. Every builder reads a `DecisionView`, so nothing from
//! day `t` beyond its two opens can reach a model.

use serde::{Deserialize, Serialize};

use super::{DecisionView, SignalError};
use crate::data::TradingDay;

/// Per-day inputs of the recurrent model: ES open, VIX open, prior ES volume.
pub const LSTM_INPUTS: usize = 3;

/// Price encoding for tree features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// Log-ratios to the current opens; invariant to price level.
    #[default]
    LogRatio,
    /// Raw prices and volumes.
    Raw,
}

fn log_ratio(num: f64, den: f64, day: &TradingDay) -> Result<f64, SignalError> {
    if num > 0.0 && den > 0.0 {
        Ok((num / den).ln())
    } else {
        Err(SignalError::NonPositivePrice { date: day.date })
    }
}

fn check_opens(view: &DecisionView<'_>) -> Result<(), SignalError> {
    if view.es_open() > 0.0 && view.vix_open() > 0.0 {
        Ok(())
    } else {
        Err(SignalError::NonPositivePrice { date: view.date() })
    }
}

/// Sessions of history the recurrent window needs.
pub fn lstm_history(seq_len: usize) -> usize {
    seq_len.saturating_sub(1).max(1)
}

/// Unnormalized `seq_len × 3` window ending at day `t`, oldest row first.
/// Each row is (ES open, VIX open, ES volume of the previous session).
pub fn lstm_window(view: &DecisionView<'_>, seq_len: usize) -> Result<Vec<f64>, SignalError> {
    view.require(lstm_history(seq_len))?;
    let past = view.past();
    let mut out = Vec::with_capacity(seq_len * LSTM_INPUTS);
    for d in &past[past.len() + 1 - seq_len..] {
        out.extend([d.es.open, d.vix.open, d.prev_volume as f64]);
    }
    let prev = past[past.len() - 1].volume() as f64;
    out.extend([view.es_open(), view.vix_open(), prev]);
    Ok(out)
}

/// Per-column standardization with statistics frozen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl ZScore {
    /// Column statistics over rows of width `dim` (population variance).
    pub fn fit<'r>(rows: impl IntoIterator<Item = &'r [f64]>, dim: usize) -> Self {
        let mut n = 0usize;
        let mut mean = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for row in rows {
            n += 1;
            for j in 0..dim {
                let delta = row[j] - mean[j];
                mean[j] += delta / n as f64;
                m2[j] += delta * (row[j] - mean[j]);
            }
        }
        let std = m2
            .iter()
            .map(|s| if n > 0 { (s / n as f64).sqrt() } else { 0.0 })
            .collect();
        Self { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standardizes each `dim`-wide chunk in place; zero-variance columns
    /// become zero.
    pub fn apply(&self, values: &mut [f64]) {
        let dim = self.dim();
        for chunk in values.chunks_mut(dim) {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = if self.std[j] > 0.0 {
                    (*v - self.mean[j]) / self.std[j]
                } else {
                    0.0
                };
            }
        }
    }
}

pub fn tree_feature_dim(lookback: usize) -> usize {
    9 * lookback + 2
}

/// Lagged ES OHLCV and VIX OHLC for days `t-L..t-1`, followed by the two
/// overnight gaps into day `t`.
///
/// With `LogRatio`, prices are logs of ratios to day `t`'s opens, volume is
/// `ln((v + 1) / (mean + 1))` against the mean of the `L` lagged volumes, and
/// the gaps are `ln(open_t / close_{t-1})` for ES and VIX.
pub fn tree_features(
    view: &DecisionView<'_>,
    lookback: usize,
    encoding: Encoding,
) -> Result<Vec<f64>, SignalError> {
    view.require(lookback.max(1))?;
    check_opens(view)?;
    let past = view.past();
    let lagged = &past[past.len() - lookback..];
    let (es0, vix0) = (view.es_open(), view.vix_open());
    let mut out = Vec::with_capacity(tree_feature_dim(lookback));
    let last = &past[past.len() - 1];
    match encoding {
        Encoding::LogRatio => {
            let mean_vol =
                lagged.iter().map(|d| d.volume() as f64).sum::<f64>() / lookback.max(1) as f64;
            for d in lagged.iter().rev() {
                for p in [d.es.open, d.es.high, d.es.low, d.es.close] {
                    out.push(log_ratio(p, es0, d)?);
                }
                out.push(((d.volume() as f64 + 1.0) / (mean_vol + 1.0)).ln());
                for p in [d.vix.open, d.vix.high, d.vix.low, d.vix.close] {
                    out.push(log_ratio(p, vix0, d)?);
                }
            }
            out.push(log_ratio(es0, last.es.close, last)?);
            out.push(log_ratio(vix0, last.vix.close, last)?);
        }
        Encoding::Raw => {
            for d in lagged.iter().rev() {
                out.extend([d.es.open, d.es.high, d.es.low, d.es.close, d.volume() as f64]);
                out.extend([d.vix.open, d.vix.high, d.vix.low, d.vix.close]);
            }
            out.extend([es0, vix0]);
        }
    }
    Ok(out)
}

pub fn sequence_feature_dim(lags: usize) -> usize {
    2 * lags + 2
}

/// A compact long-horizon encoding: for each of `lags` prior sessions the
/// ES daytime log-return and the VIX close relative to today's VIX open,
/// then the two overnight gaps.
pub fn sequence_features(view: &DecisionView<'_>, lags: usize) -> Result<Vec<f64>, SignalError> {
    view.require(lags.max(1))?;
    check_opens(view)?;
    let past = view.past();
    let vix0 = view.vix_open();
    let mut out = Vec::with_capacity(sequence_feature_dim(lags));
    for d in past[past.len() - lags..].iter().rev() {
        out.push(log_ratio(d.es.close, d.es.open, d)?);
        out.push(log_ratio(d.vix.close, vix0, d)?);
    }
    let last = &past[past.len() - 1];
    out.push(log_ratio(view.es_open(), last.es.close, last)?);
    out.push(log_ratio(vix0, last.vix.close, last)?);
    Ok(out)
}
