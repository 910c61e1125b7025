//! The hand-written learners on toy problems: a tree on XOR, a forest and
//! a boosted ensemble on two Gaussian clouds, and an LSTM whose gradient is
//! checked against finite differences before it is trained.
//!
//! cargo run --release --example learners_tour

use es_daytime::learners::{
    forest_fit, gbt_fit, lstm_fit_traced, lstm_loss_and_grad, tree_fit, BoostConfig,
    FeatureMatrix, FeatureSubset, ForestConfig, LstmConfig, LstmParams, TreeConfig,
};
use es_daytime::types::Direction::{self, Long, Short};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let xor = FeatureMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]])?;
    let y = [Short, Long, Long, Short];
    for depth in [1, 2] {
        let t = tree_fit(&xor, &y, None, &TreeConfig { max_depth: depth, ..TreeConfig::default() })?;
        let hits = xor.iter_rows().zip(&y).filter(|(r, l)| t.predict(r) == **l).count();
        println!("XOR tree, max depth {depth}: {hits}/4 correct, {} leaves", t.n_leaves());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..400 {
        let label = if i % 2 == 0 { Long } else { Short };
        let c = if label == Long { 1.0 } else { -1.0 };
        rows.push((0..4).map(|_| c + rng.random_range(-1.5..1.5)).collect());
        labels.push(label);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let acc = |pred: &dyn Fn(&[f64]) -> Direction| {
        x.iter_rows().zip(&labels).filter(|(r, l)| pred(r) == **l).count() as f64 / labels.len() as f64
    };
    let forest = forest_fit(&x, &labels, &ForestConfig {
        n_trees: 50,
        bootstrap: true,
        tree: TreeConfig { features_per_split: FeatureSubset::Sqrt, seed: 2, ..TreeConfig::default() },
    })?;
    println!("forest of {} trees: training accuracy {:.1}%", forest.trees().len(), 100.0 * acc(&|r| forest.predict(r).direction));
    let boost = gbt_fit(&x, &labels, &BoostConfig {
        n_rounds: 50,
        learning_rate: 0.1,
        tree: TreeConfig { max_depth: 3, ..TreeConfig::default() },
    })?;
    let trace = boost.loss_trace();
    println!(
        "boosting: log-loss {:.4} -> {:.4} over {} rounds, training accuracy {:.1}%",
        trace[0],
        trace[trace.len() - 1],
        trace.len() - 1,
        100.0 * acc(&|r| boost.predict(r).direction)
    );

    let (d, h, steps) = (3, 4, 5);
    let seqs: Vec<Vec<f64>> = (0..32).map(|_| (0..steps * d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    // Long whenever the last step's first input is positive.
    let y: Vec<Direction> = seqs.iter().map(|s| Direction::from_positive(s[(steps - 1) * d])).collect();
    let params = LstmParams::init(d, h, 9);
    let (_, grad) = lstm_loss_and_grad(&seqs, &y, steps, &params)?;
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for (k, g) in grad.iter().enumerate() {
        let mut up = params.clone();
        up.flat_mut()[k] += eps;
        let mut dn = params.clone();
        dn.flat_mut()[k] -= eps;
        let numeric = (lstm_loss_and_grad(&seqs, &y, steps, &up)?.0 - lstm_loss_and_grad(&seqs, &y, steps, &dn)?.0) / (2.0 * eps);
        worst = worst.max((numeric - *g).abs() / (numeric.abs() + g.abs()).max(1e-6));
    }
    println!("LSTM: {} parameters, max relative gradient error {worst:.2e}", grad.len());
    let cfg = LstmConfig { input_dim: d, hidden_dim: h, sequence_length: steps, epochs: 300, learning_rate: 1.0, seed: 9 };
    let (_, trace) = lstm_fit_traced(&seqs, &y, &cfg)?;
    println!("LSTM loss {:.4} -> {:.4} over {} epochs", trace[0], trace[trace.len() - 1], cfg.epochs);
    Ok(())
}
