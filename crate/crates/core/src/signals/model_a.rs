//! Two-agent model with a closed state.
//!
//! A feedforward network reads the short lag block and a shallow tree reads
//! a longer sequence of daytime moves. A position is opened only when both
//! agents point the same way and their combined confidence clears an
//! exposure threshold `θ`. After every fit, `θ` is re-chosen from a grid by
//! replaying the gate over the most recent training days and keeping the
//! value with the best mean-to-deviation ratio of realized rewards.

use serde::{Deserialize, Serialize};

use super::features::{sequence_features, tree_features, Encoding, ZScore};
use super::{DecisionView, SignalError, SignalModel, TrainSlice};
use crate::learners::{
    mlp_fit, tree_fit, FeatureMatrix, FeatureSubset, MlpConfig, MlpParams, Tree, TreeConfig,
};
use crate::types::{Decision, Direction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelASpec {
    pub lookback: usize,
    pub hidden: [usize; 2],
    /// Epochs for the first fit.
    pub cold_epochs: usize,
    /// Epochs for each later fit, continuing from the previous weights.
    pub warm_epochs: usize,
    pub learning_rate: f64,
    pub tree_lags: usize,
    pub tree_depth: usize,
    pub tree_min_samples_split: usize,
    pub theta_grid: Vec<f64>,
    pub reward_window: usize,
}

impl Default for ModelASpec {
    fn default() -> Self {
        Self {
            lookback: 5,
            hidden: [16, 8],
            cold_epochs: 100,
            warm_epochs: 10,
            learning_rate: 0.1,
            tree_lags: 20,
            tree_depth: 4,
            tree_min_samples_split: 10,
            theta_grid: (0..9).map(|k| 0.5 + 0.05 * k as f64).collect(),
            reward_window: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAState {
    net: MlpParams,
    scaler: ZScore,
    tree: Tree,
    theta: f64,
}

impl ModelAState {
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone)]
pub struct ModelA {
    spec: ModelASpec,
    state: Option<ModelAState>,
}

/// Opens at full scale when the agents agree and
/// `½(|2p_net − 1| + |2p_tree − 1|) ≥ θ`; otherwise closed. The direction
/// always follows the network.
pub fn gate(p_net: f64, p_tree: f64, theta: f64) -> Decision {
    let d_net = Direction::from_positive(p_net - 0.5);
    let d_tree = Direction::from_positive(p_tree - 0.5);
    let confidence = 0.5 * ((2.0 * p_net - 1.0).abs() + (2.0 * p_tree - 1.0).abs());
    if d_net == d_tree && confidence >= theta {
        Decision::full(d_net)
    } else {
        Decision::closed(d_net)
    }
}

fn reward_ratio(rewards: &[f64]) -> f64 {
    if rewards.is_empty() {
        return 0.0;
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        mean / var.sqrt()
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

/// Picks the grid value whose reward trace has the highest mean/std ratio.
/// Equal scores resolve to the smaller threshold. `traces[k]` belongs to
/// `grid[k]`.
pub fn select_theta(grid: &[f64], traces: &[Vec<f64>]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (&theta, trace) in grid.iter().zip(traces) {
        let score = reward_ratio(trace);
        best = match best {
            Some((s, t)) if s > score || (s == score && t <= theta) => Some((s, t)),
            _ => Some((score, theta)),
        };
    }
    best.map(|(_, t)| t)
}

impl ModelA {
    pub fn new(spec: ModelASpec) -> Self {
        Self { spec, state: None }
    }

    pub fn state(&self) -> Option<&ModelAState> {
        self.state.as_ref()
    }

    fn net_features(&self, view: &DecisionView<'_>) -> Result<Vec<f64>, SignalError> {
        tree_features(view, self.spec.lookback, Encoding::LogRatio)
    }

    fn probabilities(
        &self,
        state: &ModelAState,
        view: &DecisionView<'_>,
    ) -> Result<(f64, f64), SignalError> {
        let mut f = self.net_features(view)?;
        state.scaler.apply(&mut f);
        let p_net = state.net.predict_proba(&f);
        let p_tree = state.tree.value(&sequence_features(view, self.spec.tree_lags)?);
        Ok((p_net, p_tree))
    }

    fn validate(&self) -> Result<(), SignalError> {
        let bad = |m: &str| Err(crate::learners::LearnError::Config(m.into()).into());
        if self.spec.theta_grid.is_empty() {
            return bad("model_a.theta_grid must not be empty");
        }
        if self.spec.theta_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("model_a.theta_grid values must lie in [0, 1]");
        }
        if self.spec.reward_window == 0 {
            return bad("model_a.reward_window must be >= 1");
        }
        Ok(())
    }
}

impl SignalModel for ModelA {
    fn fit(&mut self, train: &TrainSlice<'_>, seed: u64) -> Result<(), SignalError> {
        self.validate()?;
        let spec = &self.spec;
        let hist = train.history();

        let net_start = train.indices().start.max(spec.lookback.max(1));
        let mut rows = Vec::new();
        let mut net_labels = Vec::new();
        for (t, day) in hist.iter().enumerate().skip(net_start) {
            rows.push(self.net_features(&train.view(t))?);
            net_labels.push(day.label);
        }
        if rows.is_empty() {
            return Err(SignalError::NoTrainingSamples);
        }
        let dim = rows[0].len();
        let scaler = ZScore::fit(rows.iter().map(Vec::as_slice), dim);
        rows.iter_mut().for_each(|r| scaler.apply(r));
        let prior = self.state.as_ref().map(|s| &s.net);
        let cfg = MlpConfig {
            hidden: spec.hidden,
            epochs: if prior.is_some() {
                spec.warm_epochs
            } else {
                spec.cold_epochs
            },
            learning_rate: spec.learning_rate,
            seed,
        };
        let net = mlp_fit(&FeatureMatrix::from_rows(&rows)?, &net_labels, &cfg, prior)?;

        let seq_start = train.indices().start.max(spec.tree_lags.max(1));
        let mut seq_rows = Vec::new();
        let mut seq_labels = Vec::new();
        for (t, day) in hist.iter().enumerate().skip(seq_start) {
            seq_rows.push(sequence_features(&train.view(t), spec.tree_lags)?);
            seq_labels.push(day.label);
        }
        if seq_rows.is_empty() {
            return Err(SignalError::NoTrainingSamples);
        }
        let tree_cfg = TreeConfig {
            max_depth: spec.tree_depth,
            min_samples_split: spec.tree_min_samples_split,
            features_per_split: FeatureSubset::All,
            seed,
        };
        let tree = tree_fit(&FeatureMatrix::from_rows(&seq_rows)?, &seq_labels, None, &tree_cfg)?;

        let mut state = ModelAState {
            net,
            scaler,
            tree,
            theta: spec.theta_grid[0],
        };
        let replay_start = net_start.max(seq_start).max(hist.len().saturating_sub(spec.reward_window));
        let mut probs = Vec::new();
        for (t, day) in hist.iter().enumerate().skip(replay_start) {
            probs.push((self.probabilities(&state, &train.view(t))?, day.daytime_return));
        }
        let traces: Vec<Vec<f64>> = spec
            .theta_grid
            .iter()
            .map(|&theta| {
                probs
                    .iter()
                    .map(|&((pn, pt), r)| gate(pn, pt, theta).position() * r)
                    .collect()
            })
            .collect();
        state.theta = select_theta(&spec.theta_grid, &traces).expect("grid is non-empty");
        self.state = Some(state);
        Ok(())
    }

    fn decide(&self, view: &DecisionView<'_>) -> Result<Decision, SignalError> {
        let state = self.state.as_ref().ok_or(SignalError::NotFitted)?;
        let (p_net, p_tree) = self.probabilities(state, view)?;
        Ok(gate(p_net, p_tree, state.theta))
    }
}
