//! Single-layer LSTM binary classifier trained by full-batch gradient descent
//! with backpropagation through time.
//!
//! Gate pre-activations for step `t` are `W_k x_t + U_k h_{t-1} + b_k` for
//! k in (input, forget, output, candidate). The final hidden state feeds a
//! dense head `w·h_T + b` squashed by the logistic function.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::{logit_loss, sigmoid, LearnError};
use crate::types::Direction;

const INIT_RANGE: f64 = 0.08;
const FORGET_BIAS: f64 = 1.0;
const GATES: usize = 4;
const GATE_FORGET: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub sequence_length: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            input_dim: 3,
            hidden_dim: 16,
            sequence_length: 20,
            epochs: 100,
            learning_rate: 0.5,
            seed: 0,
        }
    }
}

/// All weights in one flat vector so gradients share the layout.
///
/// Layout: `W_k` (H×D) for the four gates, then `U_k` (H×H), then `b_k` (H),
/// then the head weights (H) and head bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    input_dim: usize,
    hidden_dim: usize,
    theta: Vec<f64>,
}

impl LstmParams {
    pub fn param_count(input_dim: usize, hidden_dim: usize) -> usize {
        GATES * hidden_dim * (input_dim + hidden_dim + 1) + hidden_dim + 1
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            theta: vec![0.0; Self::param_count(input_dim, hidden_dim)],
        }
    }

    /// Uniform(−0.08, 0.08) weights, zero biases except the forget gate (1.0).
    pub fn init(input_dim: usize, hidden_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new(-INIT_RANGE, INIT_RANGE).expect("valid range");
        let mut p = Self::zeros(input_dim, hidden_dim);
        let bias = p.bias_offset();
        let head = p.head_offset();
        for (k, v) in p.theta.iter_mut().enumerate() {
            if k < bias || (head..head + hidden_dim).contains(&k) {
                *v = dist.sample(&mut rng);
            }
        }
        let fb = bias + GATE_FORGET * hidden_dim;
        p.theta[fb..fb + hidden_dim].fill(FORGET_BIAS);
        p
    }

    pub fn from_flat(input_dim: usize, hidden_dim: usize, theta: Vec<f64>) -> Result<Self, LearnError> {
        let expected = Self::param_count(input_dim, hidden_dim);
        if theta.len() != expected {
            return Err(LearnError::Dimension {
                what: "LSTM parameter count",
                expected,
                got: theta.len(),
            });
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            theta,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn flat(&self) -> &[f64] {
        &self.theta
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    /// Forget-gate biases.
    pub fn forget_bias(&self) -> &[f64] {
        let fb = self.bias_offset() + GATE_FORGET * self.hidden_dim;
        &self.theta[fb..fb + self.hidden_dim]
    }

    fn w_offset(&self, gate: usize) -> usize {
        gate * self.hidden_dim * self.input_dim
    }

    fn u_offset(&self, gate: usize) -> usize {
        GATES * self.hidden_dim * self.input_dim + gate * self.hidden_dim * self.hidden_dim
    }

    fn bias_offset(&self) -> usize {
        GATES * self.hidden_dim * (self.input_dim + self.hidden_dim)
    }

    fn head_offset(&self) -> usize {
        self.bias_offset() + GATES * self.hidden_dim
    }
}

/// Activations kept from the forward pass for one sequence.
struct Trace {
    /// Gate activations per step, `[t][gate][h]` flattened.
    gates: Vec<f64>,
    /// Cell states `c_0..=c_T` (c_0 = 0).
    cells: Vec<f64>,
    /// Hidden states `h_0..=h_T` (h_0 = 0).
    hidden: Vec<f64>,
    logit: f64,
}

fn forward_trace(seq: &[f64], steps: usize, p: &LstmParams) -> Trace {
    let (d, h) = (p.input_dim, p.hidden_dim);
    let th = &p.theta;
    let mut gates = vec![0.0; steps * GATES * h];
    let mut cells = vec![0.0; (steps + 1) * h];
    let mut hidden = vec![0.0; (steps + 1) * h];
    let bias = p.bias_offset();
    for t in 0..steps {
        let x = &seq[t * d..(t + 1) * d];
        let (h_prev, h_next) = hidden.split_at_mut((t + 1) * h);
        let h_prev = &h_prev[t * h..];
        let g = &mut gates[t * GATES * h..(t + 1) * GATES * h];
        for k in 0..GATES {
            let (wo, uo) = (p.w_offset(k), p.u_offset(k));
            for j in 0..h {
                let mut a = th[bias + k * h + j];
                let wrow = &th[wo + j * d..wo + (j + 1) * d];
                a += wrow.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
                let urow = &th[uo + j * h..uo + (j + 1) * h];
                a += urow.iter().zip(h_prev).map(|(u, hi)| u * hi).sum::<f64>();
                g[k * h + j] = if k == 3 { a.tanh() } else { sigmoid(a) };
            }
        }
        let (c_prev, c_next) = cells.split_at_mut((t + 1) * h);
        let c_prev = &c_prev[t * h..];
        for j in 0..h {
            let (i, f, o, cand) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
            let c = f * c_prev[j] + i * cand;
            c_next[j] = c;
            h_next[j] = o * c.tanh();
        }
    }
    let head = p.head_offset();
    let h_last = &hidden[steps * h..];
    let logit = th[head + h]
        + th[head..head + h]
            .iter()
            .zip(h_last)
            .map(|(w, hi)| w * hi)
            .sum::<f64>();
    Trace {
        gates,
        cells,
        hidden,
        logit,
    }
}

fn check_sequence(seq: &[f64], steps: usize, p: &LstmParams) -> Result<(), LearnError> {
    let expected = steps * p.input_dim;
    if seq.len() != expected || steps == 0 {
        return Err(LearnError::Dimension {
            what: "sequence length × input_dim",
            expected,
            got: seq.len(),
        });
    }
    Ok(())
}

/// Probability of a long label for one `steps × input_dim` sequence
/// (row-major, oldest step first).
pub fn lstm_forward(seq: &[f64], steps: usize, params: &LstmParams) -> Result<f64, LearnError> {
    check_sequence(seq, steps, params)?;
    Ok(sigmoid(forward_trace(seq, steps, params).logit))
}

/// Mean cross-entropy over the batch and its gradient in the flat layout.
pub fn lstm_loss_and_grad(
    seqs: &[Vec<f64>],
    labels: &[Direction],
    steps: usize,
    params: &LstmParams,
) -> Result<(f64, Vec<f64>), LearnError> {
    if seqs.is_empty() {
        return Err(LearnError::Empty);
    }
    if seqs.len() != labels.len() {
        return Err(LearnError::Dimension {
            what: "label count",
            expected: seqs.len(),
            got: labels.len(),
        });
    }
    for s in seqs {
        check_sequence(s, steps, params)?;
    }
    let (d, h) = (params.input_dim, params.hidden_dim);
    let th = &params.theta;
    let mut grad = vec![0.0; th.len()];
    let mut loss = 0.0;
    let (bias, head) = (params.bias_offset(), params.head_offset());
    let mut dh = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut da = vec![0.0; GATES * h];

    for (seq, label) in seqs.iter().zip(labels) {
        let y = label.as_unit();
        let tr = forward_trace(seq, steps, params);
        loss += logit_loss(tr.logit, y);
        let dz = sigmoid(tr.logit) - y;
        let h_last = &tr.hidden[steps * h..];
        for j in 0..h {
            grad[head + j] += dz * h_last[j];
            dh[j] = dz * th[head + j];
        }
        grad[head + h] += dz;
        dc_next.fill(0.0);

        for t in (0..steps).rev() {
            let g = &tr.gates[t * GATES * h..(t + 1) * GATES * h];
            let c_prev = &tr.cells[t * h..(t + 1) * h];
            let c = &tr.cells[(t + 1) * h..(t + 2) * h];
            for j in 0..h {
                let (i, f, o, cand) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let tc = c[j].tanh();
                let d_o = dh[j] * tc;
                let dc = dh[j] * o * (1.0 - tc * tc) + dc_next[j];
                da[j] = dc * cand * i * (1.0 - i);
                da[h + j] = dc * c_prev[j] * f * (1.0 - f);
                da[2 * h + j] = d_o * o * (1.0 - o);
                da[3 * h + j] = dc * i * (1.0 - cand * cand);
                dc_next[j] = dc * f;
            }
            let x = &seq[t * d..(t + 1) * d];
            let h_prev = &tr.hidden[t * h..(t + 1) * h];
            dh.fill(0.0);
            for k in 0..GATES {
                let (wo, uo) = (params.w_offset(k), params.u_offset(k));
                for j in 0..h {
                    let a = da[k * h + j];
                    if a == 0.0 {
                        continue;
                    }
                    grad[bias + k * h + j] += a;
                    for (gw, xi) in grad[wo + j * d..wo + (j + 1) * d].iter_mut().zip(x) {
                        *gw += a * xi;
                    }
                    let urow = uo + j * h;
                    for m in 0..h {
                        grad[urow + m] += a * h_prev[m];
                        dh[m] += th[urow + m] * a;
                    }
                }
            }
        }
    }
    let n = seqs.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Trains from the seeded initialization; see `lstm_fit_traced`.
pub fn lstm_fit(
    seqs: &[Vec<f64>],
    labels: &[Direction],
    cfg: &LstmConfig,
) -> Result<LstmParams, LearnError> {
    lstm_fit_traced(seqs, labels, cfg).map(|(p, _)| p)
}

/// Full-batch gradient descent for `cfg.epochs` epochs. Returns the final
/// parameters and the loss measured at the start of every epoch.
pub fn lstm_fit_traced(
    seqs: &[Vec<f64>],
    labels: &[Direction],
    cfg: &LstmConfig,
) -> Result<(LstmParams, Vec<f64>), LearnError> {
    if cfg.hidden_dim == 0 || cfg.input_dim == 0 || cfg.sequence_length == 0 {
        return Err(LearnError::Config(
            "input_dim, hidden_dim and sequence_length must be positive".into(),
        ));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(LearnError::Config("learning_rate must be positive".into()));
    }
    if seqs.is_empty() {
        return Err(LearnError::Empty);
    }
    for (row, s) in seqs.iter().enumerate() {
        if let Some(col) = s.iter().position(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite { row, col });
        }
    }
    let mut params = LstmParams::init(cfg.input_dim, cfg.hidden_dim, cfg.seed);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, grad) = lstm_loss_and_grad(seqs, labels, cfg.sequence_length, &params)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(LearnError::Diverged { epoch, loss });
        }
        trace.push(loss);
        for (w, g) in params.theta.iter_mut().zip(&grad) {
            *w -= cfg.learning_rate * g;
        }
        if params.theta.iter().any(|w| !w.is_finite()) {
            return Err(LearnError::Diverged { epoch, loss });
        }
    }
    Ok((params, trace))
}
