//! Strategy models behind one contract.
//!
//! A model is fitted on a training slice and then asked for a `Decision` one
//! day at a time. The `DecisionView` handed to `decide` holds only the
//! sessions before day `t` plus day `t`'s ES and VIX opens, so a model
//! cannot read the close, range or volume of the day it is trading.

mod binary;
pub mod features;
mod model_a;

pub use binary::{GbtModel, GbtSpec, LstmModel, LstmSpec, RfModel, RfSpec};
pub use model_a::{select_theta, ModelA, ModelASpec};

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TradingDay;
use crate::learners::LearnError;
use crate::types::Decision;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("need {needed} prior sessions, have {have}")]
    InsufficientHistory { needed: usize, have: usize },
    #[error("non-positive price on {date}")]
    NonPositivePrice { date: NaiveDate },
    #[error("no usable training samples")]
    NoTrainingSamples,
    #[error("model used before fit")]
    NotFitted,
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// What is known when the day-`t` position is taken.
#[derive(Debug, Clone, Copy)]
pub struct DecisionView<'a> {
    past: &'a [TradingDay],
    date: NaiveDate,
    es_open: f64,
    vix_open: f64,
}

impl<'a> DecisionView<'a> {
    pub fn new(past: &'a [TradingDay], date: NaiveDate, es_open: f64, vix_open: f64) -> Self {
        Self {
            past,
            date,
            es_open,
            vix_open,
        }
    }

    /// View of `days[t]`: sessions `0..t` and the opens of `t`.
    pub fn at(days: &'a [TradingDay], t: usize) -> Self {
        let d = &days[t];
        Self::new(&days[..t], d.date, d.es.open, d.vix.open)
    }

    pub fn past(&self) -> &'a [TradingDay] {
        self.past
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn es_open(&self) -> f64 {
        self.es_open
    }

    pub fn vix_open(&self) -> f64 {
        self.vix_open
    }

    /// The session `lag` days back (`lag >= 1`).
    pub fn lagged(&self, lag: usize) -> Option<&'a TradingDay> {
        self.past.len().checked_sub(lag).map(|i| &self.past[i])
    }

    pub(crate) fn require(&self, needed: usize) -> Result<(), SignalError> {
        if self.past.len() < needed {
            return Err(SignalError::InsufficientHistory {
                needed,
                have: self.past.len(),
            });
        }
        Ok(())
    }
}

/// Sessions available to a fit: `history[start..]` are the training days and
/// anything before `start` may be read as feature history.
#[derive(Debug, Clone, Copy)]
pub struct TrainSlice<'a> {
    history: &'a [TradingDay],
    start: usize,
}

impl<'a> TrainSlice<'a> {
    pub fn new(history: &'a [TradingDay], start: usize) -> Self {
        assert!(start <= history.len(), "training start past the end of history");
        Self { history, start }
    }

    pub fn history(&self) -> &'a [TradingDay] {
        self.history
    }

    pub fn days(&self) -> &'a [TradingDay] {
        &self.history[self.start..]
    }

    /// Absolute indices of the training days within `history`.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.history.len()
    }

    pub fn view(&self, t: usize) -> DecisionView<'a> {
        DecisionView::at(self.history, t)
    }
}

pub trait SignalModel: Send {
    fn fit(&mut self, train: &TrainSlice<'_>, seed: u64) -> Result<(), SignalError>;
    fn decide(&self, view: &DecisionView<'_>) -> Result<Decision, SignalError>;
}

/// Always long at full scale.
#[derive(Debug, Clone, Copy, Default)]
pub struct Passive;

impl SignalModel for Passive {
    fn fit(&mut self, _train: &TrainSlice<'_>, _seed: u64) -> Result<(), SignalError> {
        Ok(())
    }

    fn decide(&self, _view: &DecisionView<'_>) -> Result<Decision, SignalError> {
        Ok(Decision::long())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Passive,
    Lstm,
    Gbt,
    Rf,
    ModelA,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Passive,
        ModelKind::Lstm,
        ModelKind::Gbt,
        ModelKind::Rf,
        ModelKind::ModelA,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Passive => "passive",
            ModelKind::Lstm => "lstm",
            ModelKind::Gbt => "gbt",
            ModelKind::Rf => "rf",
            ModelKind::ModelA => "model_a",
        }
    }

    /// Column heading used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Passive => "Passive",
            ModelKind::Lstm => "LSTM",
            ModelKind::Gbt => "Boosted",
            ModelKind::Rf => "Forest",
            ModelKind::ModelA => "Model A",
        }
    }

    /// Whether one window's fitted state feeds the next window's fit.
    pub fn carries_state(self) -> bool {
        self == ModelKind::ModelA
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| format!("unknown model `{s}` (expected passive, lstm, gbt, rf or model_a)"))
    }
}

/// Hyperparameters for every model, keyed as `lstm.*`, `gbt.*`, `rf.*` and
/// `model_a.*` in run configs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub lstm: LstmSpec,
    pub gbt: GbtSpec,
    pub rf: RfSpec,
    pub model_a: ModelASpec,
}

impl ModelParams {
    pub fn build(&self, kind: ModelKind) -> Box<dyn SignalModel> {
        match kind {
            ModelKind::Passive => Box::new(Passive),
            ModelKind::Lstm => Box::new(LstmModel::new(self.lstm.clone())),
            ModelKind::Gbt => Box::new(GbtModel::new(self.gbt.clone())),
            ModelKind::Rf => Box::new(RfModel::new(self.rf.clone())),
            ModelKind::ModelA => Box::new(ModelA::new(self.model_a.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_dataset, SynthConfig};

    #[test]
    fn passive_is_always_long() {
        let ds = synth_dataset(&SynthConfig {
            days: 30,
            ..SynthConfig::default()
        });
        let m = Passive;
        for t in 0..ds.len() {
            assert_eq!(m.decide(&DecisionView::at(ds.days(), t)).unwrap(), Decision::long());
        }
    }

    #[test]
    fn view_hides_the_current_session() {
        let ds = synth_dataset(&SynthConfig {
            days: 10,
            ..SynthConfig::default()
        });
        let v = DecisionView::at(ds.days(), 4);
        assert_eq!(v.past().len(), 4);
        assert_eq!(v.es_open(), ds.days()[4].es.open);
        assert_eq!(v.lagged(1).unwrap().date, ds.days()[3].date);
        assert!(v.lagged(5).is_none());
    }

    #[test]
    fn model_ids_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.id().parse::<ModelKind>().unwrap(), k);
        }
        assert!("svm".parse::<ModelKind>().is_err());
    }
}
