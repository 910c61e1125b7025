//! Desk-scale learners written from scratch: CART trees, random forests,
//! logistic gradient boosting, an LSTM classifier and a small feedforward
//! network.
//!
//! Every learner is deterministic given its seed. Labels are `Direction`s;
//! internally long maps to 1 and short to 0.

mod forest;
mod gbt;
mod lstm;
mod mlp;
mod tree;

pub use forest::{forest_fit, Forest, ForestConfig, ForestVote};
pub use gbt::{gbt_fit, BoostConfig, BoostVote, BoostedModel};
pub use lstm::{
    lstm_fit, lstm_fit_traced, lstm_forward, lstm_loss_and_grad, LstmConfig, LstmParams,
};
pub use mlp::{mlp_fit, MlpConfig, MlpParams};
pub use tree::{tree_fit, FeatureSubset, Node, Tree, TreeConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("no training samples")]
    Empty,
    #[error("{what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LearnError> {
        if data.len() != rows * cols {
            return Err(LearnError::Dimension {
                what: "matrix data length",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LearnError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LearnError::Dimension {
                    what: "row width",
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    fn check_finite(&self) -> Result<(), LearnError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(LearnError::NonFinite {
                row: k / self.cols,
                col: k % self.cols,
            }),
            None => Ok(()),
        }
    }
}

/// Shared precondition for supervised fits.
fn check_training_set(x: &FeatureMatrix, n_labels: usize) -> Result<(), LearnError> {
    if x.rows() == 0 {
        return Err(LearnError::Empty);
    }
    if n_labels != x.rows() {
        return Err(LearnError::Dimension {
            what: "label count",
            expected: x.rows(),
            got: n_labels,
        });
    }
    x.check_finite()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy of logit `z` against a 0/1 target.
pub(crate) fn logit_loss(z: f64, y01: f64) -> f64 {
    softplus(z) - y01 * z
}
