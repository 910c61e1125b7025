//! Gradient boosting with logistic loss.
//!
//! Each round fits a squared-error tree to the negative gradient
//! `y − σ(F)`, sets every leaf to one Newton step `Σr / Σσ(1−σ)` scaled by
//! the learning rate, and adds it to the score. If a scaled Newton step would
//! raise the loss on its leaf, the step is halved until it does not, so the
//! training loss never increases from one round to the next.

use serde::{Deserialize, Serialize};

use super::tree::{regression_tree_fit, Tree, TreeConfig};
use super::{check_training_set, logit_loss, sigmoid, FeatureMatrix, LearnError};
use crate::types::Direction;

/// Prior probabilities are clamped away from 0 and 1 so the base score stays
/// finite on single-class data.
const PRIOR_CLAMP: f64 = 1e-6;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// Round `k` uses seed `tree.seed ^ k`.
    pub tree: TreeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    base_score: f64,
    trees: Vec<Tree>,
    loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostVote {
    pub direction: Direction,
    pub probability: f64,
}

pub fn gbt_fit(
    x: &FeatureMatrix,
    y: &[Direction],
    cfg: &BoostConfig,
) -> Result<BoostedModel, LearnError> {
    check_training_set(x, y.len())?;
    cfg.tree.validate(x.cols())?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0) {
        return Err(LearnError::Config(format!(
            "learning_rate {} outside (0, 1]",
            cfg.learning_rate
        )));
    }
    let n = x.rows();
    let y01: Vec<f64> = y.iter().map(|d| d.as_unit()).collect();
    let prior = (y01.iter().sum::<f64>() / n as f64).clamp(PRIOR_CLAMP, 1.0 - PRIOR_CLAMP);
    let base_score = (prior / (1.0 - prior)).ln();

    let mut score = vec![base_score; n];
    let mean_loss = |score: &[f64]| {
        score
            .iter()
            .zip(&y01)
            .map(|(z, t)| logit_loss(*z, *t))
            .sum::<f64>()
            / n as f64
    };
    let mut loss_trace = vec![mean_loss(&score)];
    let mut trees = Vec::with_capacity(cfg.n_rounds);

    for round in 0..cfg.n_rounds {
        let residual: Vec<f64> = score
            .iter()
            .zip(&y01)
            .map(|(z, t)| t - sigmoid(*z))
            .collect();
        let tree_cfg = TreeConfig {
            seed: cfg.tree.seed ^ round as u64,
            ..cfg.tree
        };
        let leaf_rule = |idx: &[usize]| newton_leaf(idx, &score, &y01, cfg.learning_rate);
        let tree = regression_tree_fit(x, &residual, &tree_cfg, leaf_rule)?;
        for (i, s) in score.iter_mut().enumerate() {
            *s += tree.value(x.row(i));
        }
        loss_trace.push(mean_loss(&score));
        trees.push(tree);
    }
    Ok(BoostedModel {
        base_score,
        trees,
        loss_trace,
    })
}

/// Damped Newton step for the rows in one leaf.
fn newton_leaf(idx: &[usize], score: &[f64], y01: &[f64], learning_rate: f64) -> f64 {
    let (mut g, mut h) = (0.0, 0.0);
    for &i in idx {
        let p = sigmoid(score[i]);
        g += y01[i] - p;
        h += p * (1.0 - p);
    }
    if h <= f64::MIN_POSITIVE {
        return 0.0;
    }
    let leaf_loss = |step: f64| -> f64 {
        idx.iter()
            .map(|&i| logit_loss(score[i] + step, y01[i]))
            .sum()
    };
    let before = leaf_loss(0.0);
    let mut step = learning_rate * g / h;
    for _ in 0..MAX_HALVINGS {
        if leaf_loss(step) <= before {
            return step;
        }
        step *= 0.5;
    }
    0.0
}

impl BoostedModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.value(row)).sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> BoostVote {
        let probability = sigmoid(self.raw_score(row));
        BoostVote {
            direction: Direction::from_positive(probability - 0.5),
            probability,
        }
    }

    /// Mean training log-loss before boosting and after every round.
    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}
