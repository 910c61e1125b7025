//! Always-invested classifiers: the recurrent model and the two tree
//! ensembles. Each decides long or short at full scale.

use serde::{Deserialize, Serialize};

use super::features::{lstm_history, lstm_window, tree_features, Encoding, ZScore, LSTM_INPUTS};
use super::{DecisionView, SignalError, SignalModel, TrainSlice};
use crate::learners::{
    forest_fit, gbt_fit, lstm_fit, lstm_forward, BoostConfig, BoostedModel, FeatureMatrix,
    FeatureSubset, Forest, ForestConfig, LstmConfig, LstmParams, TreeConfig,
};
use crate::types::{Decision, Direction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmSpec {
    pub hidden_dim: usize,
    pub sequence_length: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LstmSpec {
    fn default() -> Self {
        Self {
            hidden_dim: 16,
            sequence_length: 20,
            epochs: 60,
            learning_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LstmModel {
    spec: LstmSpec,
    fitted: Option<(LstmParams, ZScore)>,
}

impl LstmModel {
    pub fn new(spec: LstmSpec) -> Self {
        Self { spec, fitted: None }
    }
}

impl SignalModel for LstmModel {
    fn fit(&mut self, train: &TrainSlice<'_>, seed: u64) -> Result<(), SignalError> {
        let seq_len = self.spec.sequence_length;
        let mut seqs = Vec::new();
        let mut labels = Vec::new();
        for t in train.indices().filter(|t| *t >= lstm_history(seq_len)) {
            seqs.push(lstm_window(&train.view(t), seq_len)?);
            labels.push(train.history()[t].label);
        }
        if seqs.is_empty() {
            return Err(SignalError::NoTrainingSamples);
        }
        let z = ZScore::fit(seqs.iter().flat_map(|s| s.chunks(LSTM_INPUTS)), LSTM_INPUTS);
        seqs.iter_mut().for_each(|s| z.apply(s));
        let cfg = LstmConfig {
            input_dim: LSTM_INPUTS,
            hidden_dim: self.spec.hidden_dim,
            sequence_length: seq_len,
            epochs: self.spec.epochs,
            learning_rate: self.spec.learning_rate,
            seed,
        };
        self.fitted = Some((lstm_fit(&seqs, &labels, &cfg)?, z));
        Ok(())
    }

    fn decide(&self, view: &DecisionView<'_>) -> Result<Decision, SignalError> {
        let (params, z) = self.fitted.as_ref().ok_or(SignalError::NotFitted)?;
        let mut w = lstm_window(view, self.spec.sequence_length)?;
        z.apply(&mut w);
        let p = lstm_forward(&w, self.spec.sequence_length, params)?;
        Ok(Decision::full(Direction::from_positive(p - 0.5)))
    }
}

/// Tree features and labels for every training day with enough history.
pub(crate) fn tree_training_set(
    train: &TrainSlice<'_>,
    lookback: usize,
    encoding: Encoding,
) -> Result<(FeatureMatrix, Vec<Direction>), SignalError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for t in train.indices().filter(|t| *t >= lookback.max(1)) {
        rows.push(tree_features(&train.view(t), lookback, encoding)?);
        labels.push(train.history()[t].label);
    }
    if rows.is_empty() {
        return Err(SignalError::NoTrainingSamples);
    }
    Ok((FeatureMatrix::from_rows(&rows)?, labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtSpec {
    pub lookback: usize,
    pub encoding: Encoding,
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for GbtSpec {
    fn default() -> Self {
        Self {
            lookback: 5,
            encoding: Encoding::LogRatio,
            n_rounds: 50,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GbtModel {
    spec: GbtSpec,
    fitted: Option<BoostedModel>,
}

impl GbtModel {
    pub fn new(spec: GbtSpec) -> Self {
        Self { spec, fitted: None }
    }
}

impl SignalModel for GbtModel {
    fn fit(&mut self, train: &TrainSlice<'_>, seed: u64) -> Result<(), SignalError> {
        let (x, y) = tree_training_set(train, self.spec.lookback, self.spec.encoding)?;
        let cfg = BoostConfig {
            n_rounds: self.spec.n_rounds,
            learning_rate: self.spec.learning_rate,
            tree: TreeConfig {
                max_depth: self.spec.max_depth,
                min_samples_split: self.spec.min_samples_split,
                features_per_split: FeatureSubset::All,
                seed,
            },
        };
        self.fitted = Some(gbt_fit(&x, &y, &cfg)?);
        Ok(())
    }

    fn decide(&self, view: &DecisionView<'_>) -> Result<Decision, SignalError> {
        let model = self.fitted.as_ref().ok_or(SignalError::NotFitted)?;
        let f = tree_features(view, self.spec.lookback, self.spec.encoding)?;
        Ok(Decision::full(model.predict(&f).direction))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSpec {
    pub lookback: usize,
    pub encoding: Encoding,
    pub n_trees: usize,
    pub bootstrap: bool,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub features_per_split: FeatureSubset,
}

impl Default for RfSpec {
    fn default() -> Self {
        Self {
            lookback: 5,
            encoding: Encoding::LogRatio,
            n_trees: 100,
            bootstrap: true,
            max_depth: 8,
            min_samples_split: 2,
            features_per_split: FeatureSubset::Sqrt,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RfModel {
    spec: RfSpec,
    fitted: Option<Forest>,
}

impl RfModel {
    pub fn new(spec: RfSpec) -> Self {
        Self { spec, fitted: None }
    }
}

impl SignalModel for RfModel {
    fn fit(&mut self, train: &TrainSlice<'_>, seed: u64) -> Result<(), SignalError> {
        let (x, y) = tree_training_set(train, self.spec.lookback, self.spec.encoding)?;
        let cfg = ForestConfig {
            n_trees: self.spec.n_trees,
            bootstrap: self.spec.bootstrap,
            tree: TreeConfig {
                max_depth: self.spec.max_depth,
                min_samples_split: self.spec.min_samples_split,
                features_per_split: self.spec.features_per_split,
                seed,
            },
        };
        self.fitted = Some(forest_fit(&x, &y, &cfg)?);
        Ok(())
    }

    fn decide(&self, view: &DecisionView<'_>) -> Result<Decision, SignalError> {
        let forest = self.fitted.as_ref().ok_or(SignalError::NotFitted)?;
        let f = tree_features(view, self.spec.lookback, self.spec.encoding)?;
        Ok(Decision::full(forest.predict(&f).direction))
    }
}
