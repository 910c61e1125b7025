//! Two-hidden-layer feedforward classifier (tanh hidden units, logistic
//! output), trained by full-batch gradient descent on cross-entropy.
//!
//! Fits can start from a previous set of weights, which is how a daily
//! refit carries yesterday's network forward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::{check_training_set, logit_loss, sigmoid, FeatureMatrix, LearnError};
use crate::types::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: [usize; 2],
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: [16, 8],
            epochs: 100,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layer {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs × inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    /// Glorot-uniform weights, zero bias.
    fn init(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let dist = Uniform::new(-limit, limit).expect("valid range");
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| dist.sample(rng)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.weights[j * self.inputs..(j + 1) * self.inputs];
            *o = self.bias[j] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    layers: [Layer; 3],
}

impl MlpParams {
    pub fn init(input_dim: usize, hidden: [usize; 2], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            layers: [
                Layer::init(input_dim, hidden[0], &mut rng),
                Layer::init(hidden[0], hidden[1], &mut rng),
                Layer::init(hidden[1], 1, &mut rng),
            ],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    fn shape(&self) -> (usize, [usize; 2]) {
        (
            self.layers[0].inputs,
            [self.layers[0].outputs, self.layers[1].outputs],
        )
    }

    fn activations(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let mut a1 = vec![0.0; self.layers[0].outputs];
        self.layers[0].forward(x, &mut a1);
        a1.iter_mut().for_each(|v| *v = v.tanh());
        let mut a2 = vec![0.0; self.layers[1].outputs];
        self.layers[1].forward(&a1, &mut a2);
        a2.iter_mut().for_each(|v| *v = v.tanh());
        let mut z = [0.0];
        self.layers[2].forward(&a2, &mut z);
        (a1, a2, z[0])
    }

    /// Probability of a long label.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.activations(x).2)
    }

    fn loss_and_grad(&self, x: &FeatureMatrix, y01: &[f64]) -> (f64, MlpParams) {
        let mut grad = self.clone();
        for l in grad.layers.iter_mut() {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        let mut loss = 0.0;
        let [l1, l2, l3] = &self.layers;
        let mut d2 = vec![0.0; l2.outputs];
        let mut d1 = vec![0.0; l1.outputs];
        for (row, &t) in x.iter_rows().zip(y01) {
            let (a1, a2, z) = self.activations(row);
            loss += logit_loss(z, t);
            let dz = sigmoid(z) - t;
            let [g1, g2, g3] = &mut grad.layers;
            g3.bias[0] += dz;
            for (k, a) in a2.iter().enumerate() {
                g3.weights[k] += dz * a;
                d2[k] = dz * l3.weights[k] * (1.0 - a * a);
            }
            d1.fill(0.0);
            for (j, &dj) in d2.iter().enumerate() {
                g2.bias[j] += dj;
                let off = j * l2.inputs;
                for (k, a) in a1.iter().enumerate() {
                    g2.weights[off + k] += dj * a;
                    d1[k] += dj * l2.weights[off + k];
                }
            }
            for (k, a) in a1.iter().enumerate() {
                let dk = d1[k] * (1.0 - a * a);
                g1.bias[k] += dk;
                let off = k * l1.inputs;
                for (gw, xi) in g1.weights[off..off + l1.inputs].iter_mut().zip(row) {
                    *gw += dk * xi;
                }
            }
        }
        let n = x.rows() as f64;
        for l in grad.layers.iter_mut() {
            l.weights.iter_mut().for_each(|g| *g /= n);
            l.bias.iter_mut().for_each(|g| *g /= n);
        }
        (loss / n, grad)
    }
}

/// Trains for `cfg.epochs` epochs, starting from `warm_start` when its shape
/// matches and from a fresh seeded initialization otherwise.
pub fn mlp_fit(
    x: &FeatureMatrix,
    y: &[Direction],
    cfg: &MlpConfig,
    warm_start: Option<&MlpParams>,
) -> Result<MlpParams, LearnError> {
    check_training_set(x, y.len())?;
    if cfg.hidden.contains(&0) {
        return Err(LearnError::Config("hidden layer widths must be positive".into()));
    }
    let mut params = match warm_start {
        Some(p) if p.shape() == (x.cols(), cfg.hidden) => p.clone(),
        _ => MlpParams::init(x.cols(), cfg.hidden, cfg.seed),
    };
    let y01: Vec<f64> = y.iter().map(|d| d.as_unit()).collect();
    for epoch in 0..cfg.epochs {
        let (loss, grad) = params.loss_and_grad(x, &y01);
        if !loss.is_finite() {
            return Err(LearnError::Diverged { epoch, loss });
        }
        for (l, g) in params.layers.iter_mut().zip(&grad.layers) {
            for (w, gw) in l.weights.iter_mut().zip(&g.weights) {
                *w -= cfg.learning_rate * gw;
            }
            for (b, gb) in l.bias.iter_mut().zip(&g.bias) {
                *b -= cfg.learning_rate * gb;
            }
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::{Long, Short};

    #[test]
    fn gradient_matches_finite_differences() {
        let x = FeatureMatrix::from_rows(&[
            vec![0.3, -1.2, 0.5],
            vec![-0.7, 0.4, 1.1],
            vec![1.5, 0.2, -0.3],
        ])
        .unwrap();
        let y01 = [1.0, 0.0, 1.0];
        let p = MlpParams::init(3, [4, 3], 11);
        let (_, grad) = p.loss_and_grad(&x, &y01);
        let eps = 1e-6;
        for li in 0..3 {
            for wi in 0..p.layers[li].weights.len() {
                let mut up = p.clone();
                up.layers[li].weights[wi] += eps;
                let mut dn = p.clone();
                dn.layers[li].weights[wi] -= eps;
                let numeric = (up.loss_and_grad(&x, &y01).0 - dn.loss_and_grad(&x, &y01).0)
                    / (2.0 * eps);
                let analytic = grad.layers[li].weights[wi];
                assert!((numeric - analytic).abs() < 1e-7, "{li}/{wi}: {numeric} vs {analytic}");
            }
        }
    }

    #[test]
    fn learns_a_linear_boundary() {
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|i| vec![(i as f64 / 40.0) - 1.0, ((i * 7) % 13) as f64 / 13.0])
            .collect();
        let y: Vec<Direction> = rows.iter().map(|r| if r[0] > 0.0 { Long } else { Short }).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let cfg = MlpConfig {
            epochs: 600,
            learning_rate: 0.5,
            ..MlpConfig::default()
        };
        let p = mlp_fit(&x, &y, &cfg, None).unwrap();
        let correct = x
            .iter_rows()
            .zip(&y)
            .filter(|(r, l)| Direction::from_positive(p.predict_proba(r) - 0.5) == **l)
            .count();
        assert!(correct >= 76, "{correct}/80");
    }

    #[test]
    fn warm_start_continues_from_given_weights() {
        let x = FeatureMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let y = [Long, Short];
        let cfg = MlpConfig {
            epochs: 0,
            ..MlpConfig::default()
        };
        let prior = MlpParams::init(1, cfg.hidden, 99);
        assert_eq!(mlp_fit(&x, &y, &cfg, Some(&prior)).unwrap(), prior);
        let other_shape = MlpParams::init(2, cfg.hidden, 99);
        assert_eq!(
            mlp_fit(&x, &y, &cfg, Some(&other_shape)).unwrap(),
            MlpParams::init(1, cfg.hidden, cfg.seed)
        );
    }
}
