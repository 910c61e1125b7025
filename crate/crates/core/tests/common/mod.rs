//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use es_daytime::backtest::{plan_windows, run_walkforward, RunOptions, SignalSeries, WalkForwardPlan};
use es_daytime::data::{bars_to_csv, rates_to_csv, Bar, Dataset, TradingDay};
use es_daytime::signals::{GbtSpec, LstmSpec, ModelASpec, ModelKind, ModelParams, RfSpec};
use es_daytime::learners::{lstm_loss_and_grad, FeatureMatrix, LstmParams};
use es_daytime::synth::{synth_market, SynthConfig};
use es_daytime::types::Direction::{self, Long, Short};
use rand_distr::{Distribution, Normal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small hyperparameters so harness checks run in seconds.
pub fn cheap_params() -> ModelParams {
    ModelParams {
        lstm: LstmSpec {
            hidden_dim: 4,
            sequence_length: 10,
            epochs: 5,
            learning_rate: 0.5,
        },
        gbt: GbtSpec {
            n_rounds: 10,
            max_depth: 2,
            ..GbtSpec::default()
        },
        rf: RfSpec {
            n_trees: 10,
            max_depth: 4,
            ..RfSpec::default()
        },
        model_a: ModelASpec {
            hidden: [4, 4],
            cold_epochs: 20,
            warm_epochs: 2,
            tree_lags: 10,
            tree_depth: 3,
            reward_window: 20,
            ..ModelASpec::default()
        },
    }
}

pub fn test_window(kind: ModelKind) -> usize {
    if kind.carries_state() {
        1
    } else {
        50
    }
}

pub fn backtest(
    params: &ModelParams,
    kind: ModelKind,
    ds: &Dataset,
    plan: &WalkForwardPlan,
    seed: u64,
    opts: &RunOptions,
) -> SignalSeries {
    run_walkforward(|| params.build(kind), kind.carries_state(), ds, plan, seed, opts)
        .unwrap_or_else(|e| panic!("{kind}: {e}"))
}

fn scale_bar(b: &mut Bar, f: f64) {
    b.open *= f;
    b.high *= f;
    b.low *= f;
    b.close *= f;
}

/// Randomly perturbs one field that lies beyond the information boundary
/// of day `t`: the high, low, close or volume of day `t`, its risk-free
/// value, or anything on a later day. Returns a description.
pub fn mutate_after_boundary(days: &mut [TradingDay], t: usize, rng: &mut ChaCha8Rng) -> String {
    let later = t + 1 < days.len() && rng.random_bool(0.5);
    let u = if later { rng.random_range(t + 1..days.len()) } else { t };
    let f = rng.random_range(0.5..2.0);
    let TradingDay {
        mut es,
        mut vix,
        mut rf_annual,
        mut prev_volume,
        ..
    } = days[u].clone();
    let field = rng.random_range(0..if later { 10 } else { 7 });
    let what = match field {
        0 => {
            es.close = (es.close * f).clamp(es.low, es.high);
            if rng.random_bool(0.5) {
                es.close = es.open * f;
                es.high = es.high.max(es.close);
                es.low = es.low.min(es.close);
            }
            "es close"
        }
        1 => {
            es.high *= 1.0 + f;
            "es high"
        }
        2 => {
            es.low = es.low.min(es.open.min(es.close)) * f.min(1.0);
            "es low"
        }
        3 => {
            es.volume = Some(rng.random_range(0..5_000_000));
            "es volume"
        }
        4 => {
            vix.close = vix.open * f;
            vix.high = vix.high.max(vix.close);
            vix.low = vix.low.min(vix.close);
            "vix close"
        }
        5 => {
            vix.high *= 1.0 + f;
            "vix high"
        }
        6 => {
            rf_annual = rng.random_range(-0.01..0.08);
            "rf"
        }
        7 => {
            scale_bar(&mut es, f);
            "es bar"
        }
        8 => {
            scale_bar(&mut vix, f);
            "vix bar"
        }
        _ => {
            prev_volume = rng.random_range(0..5_000_000);
            "prev volume"
        }
    };
    days[u] = TradingDay::new(es, vix, rf_annual, prev_volume);
    if field == 3 && u + 1 < days.len() {
        days[u + 1].prev_volume = days[u].volume();
    }
    format!("{what} of day {u} (boundary {t})")
}

/// Mutates post-boundary fields `mutations` times and checks that no
/// decision on or before the boundary day moves. Returns the number of
/// mutations checked or a description of the first violation.
pub fn lookahead_fuzz(
    params: &ModelParams,
    kind: ModelKind,
    ds: &Dataset,
    train_window: usize,
    mutations: usize,
    seed: u64,
) -> Result<usize, String> {
    let plan = plan_windows(ds.len(), train_window, test_window(kind)).map_err(|e| e.to_string())?;
    let opts = RunOptions::default();
    let base = backtest(params, kind, ds, &plan, seed, &opts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for m in 0..mutations {
        let t = rng.random_range(train_window..ds.len());
        let mut days = ds.days().to_vec();
        let what = mutate_after_boundary(&mut days, t, &mut rng);
        let mutated = Dataset::from_days(days).map_err(|e| e.to_string())?;
        // Windows starting after `t` cannot hold a decision at or before it.
        let mut prefix = plan.clone();
        prefix.windows.retain(|w| w.test.start <= t);
        let run = backtest(params, kind, &mutated, &prefix, seed, &opts);
        let upto = t - train_window + 1;
        let moved = (0..upto).find(|&i| run.rows()[i].decision != base.rows()[i].decision);
        if let Some(day) = moved {
            return Err(format!(
                "{kind}: mutation {m} ({what}) changed the decision on {}",
                base.rows()[day].date
            ));
        }
    }
    Ok(mutations)
}

/// Writes synthetic ES, VIX and rate CSVs into `dir`.
pub fn write_synth_inputs(dir: &Path, days: usize, seed: u64) -> [PathBuf; 3] {
    let m = synth_market(&SynthConfig {
        days,
        seed,
        ..SynthConfig::default()
    });
    let paths = [dir.join("es.csv"), dir.join("vix.csv"), dir.join("rates.csv")];
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(&paths[0], bars_to_csv(&m.es, true)).unwrap();
    std::fs::write(&paths[1], bars_to_csv(&m.vix, false)).unwrap();
    std::fs::write(&paths[2], rates_to_csv(&m.rates)).unwrap();
    paths
}

/// A run config in TOML pointing at `inputs`, with cheap model settings
/// unless `full` is set.
pub fn config_toml(name: &str, model: ModelKind, inputs: &[PathBuf; 3], out: &Path, full: bool) -> String {
    let mut s = format!(
        "name = \"{name}\"\nmodel = \"{model}\"\nmaster_seed = 42\nout_dir = \"{}\"\n\n[paths]\nes_csv = \"{}\"\nvix_csv = \"{}\"\nrates_csv = \"{}\"\n",
        out.display(),
        inputs[0].display(),
        inputs[1].display(),
        inputs[2].display()
    );
    if !full {
        s.push_str(
            "\n[lstm]\nhidden_dim = 4\nsequence_length = 10\nepochs = 5\n\
             \n[gbt]\nn_rounds = 10\nmax_depth = 2\n\
             \n[rf]\nn_trees = 10\nmax_depth = 4\n\
             \n[model_a]\nhidden = [4, 4]\ncold_epochs = 20\nwarm_epochs = 2\ntree_lags = 10\ntree_depth = 3\nreward_window = 20\n",
        );
    }
    s
}

/// Every file under `dir` with its bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
        }
    }
    out
}

pub const FD_EPS: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;
/// Keeps the relative error meaningful for near-zero gradient entries.
pub const FD_FLOOR: f64 = 1e-7;

pub fn max_relative_fd_error(seed: u64) -> f64 {
    let (d, h, steps, n) = (2, 4, 3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..LstmParams::param_count(d, h))
        .map(|_| rng.random_range(-0.5..0.5))
        .collect();
    let params = LstmParams::from_flat(d, h, theta).unwrap();
    let seqs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..steps * d).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    let labels: Vec<Direction> = (0..n).map(|_| if rng.random_bool(0.5) { Long } else { Short }).collect();
    let (_, grad) = lstm_loss_and_grad(&seqs, &labels, steps, &params).unwrap();
    let mut worst: f64 = 0.0;
    for (k, g) in grad.iter().enumerate() {
        let mut up = params.clone();
        up.flat_mut()[k] += FD_EPS;
        let mut dn = params.clone();
        dn.flat_mut()[k] -= FD_EPS;
        let lu = lstm_loss_and_grad(&seqs, &labels, steps, &up).unwrap().0;
        let ld = lstm_loss_and_grad(&seqs, &labels, steps, &dn).unwrap().0;
        let numeric = (lu - ld) / (2.0 * FD_EPS);
        let rel = (numeric - *g).abs() / (numeric.abs() + g.abs()).max(FD_FLOOR);
        worst = worst.max(rel);
    }
    worst
}

/// Two Gaussian clouds separated along the diagonal in 4 dimensions.
pub fn blobs(n: usize, seed: u64) -> (FeatureMatrix, Vec<Direction>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.6).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Long } else { Short };
        let center = if label == Long { 1.5 } else { -1.5 };
        rows.push((0..4).map(|_| center + noise.sample(&mut rng)).collect());
        y.push(label);
    }
    (FeatureMatrix::from_rows(&rows).unwrap(), y)
}

