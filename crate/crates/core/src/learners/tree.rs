//! Greedy CART trees.
//!
//! Classification trees split on weighted Gini impurity; the regression trees
//! used by boosting split on weighted squared error and take their leaf values
//! from a caller-supplied rule. Candidate thresholds are midpoints between
//! consecutive distinct values. Ties go to the lowest feature index, then the
//! lowest threshold.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_set, FeatureMatrix, LearnError};
use crate::types::Direction;

/// How many features a node may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    All,
    /// `max(1, round(√D))`.
    Sqrt,
    Count(usize),
}

impl FeatureSubset {
    fn resolve(self, n_features: usize) -> usize {
        match self {
            FeatureSubset::All => n_features,
            FeatureSubset::Sqrt => ((n_features as f64).sqrt().round() as usize).clamp(1, n_features),
            FeatureSubset::Count(k) => k.min(n_features),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Use `usize::MAX` for unlimited depth.
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub features_per_split: FeatureSubset,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: usize::MAX,
            min_samples_split: 2,
            features_per_split: FeatureSubset::All,
            seed: 0,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self, n_features: usize) -> Result<(), LearnError> {
        if self.max_depth < 1 {
            return Err(LearnError::Config("max_depth must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(LearnError::Config("min_samples_split must be >= 2".into()));
        }
        if let FeatureSubset::Count(k) = self.features_per_split {
            if k == 0 || k > n_features {
                return Err(LearnError::Config(format!(
                    "features_per_split {k} outside 1..={n_features}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// For classification `value` is the weighted fraction of long labels;
    /// for boosting it is the additive score.
    Leaf { value: f64, weight: f64 },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree stored as an arena; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    n_features: usize,
    depth: usize,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Depth of the deepest leaf; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    fn leaf(&self, row: &[f64]) -> &Node {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    /// Leaf value for `row`.
    pub fn value(&self, row: &[f64]) -> f64 {
        match self.leaf(row) {
            Node::Leaf { value, .. } => *value,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Long when the leaf's long fraction is strictly above one half.
    pub fn predict(&self, row: &[f64]) -> Direction {
        Direction::from_positive(self.value(row) - 0.5)
    }
}

#[derive(Clone, Copy)]
enum Criterion {
    Gini,
    SquaredError,
}

impl Criterion {
    /// Weighted impurity of a node given Σw, Σw·t and Σw·t².
    fn impurity(self, w: f64, s: f64, q: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            // w · (1 − p² − (1−p)²) with p = s/w.
            Criterion::Gini => (2.0 * s * (w - s) / w).max(0.0),
            Criterion::SquaredError => (q - s * s / w).max(0.0),
        }
    }
}

struct Grower<'a, L> {
    x: &'a FeatureMatrix,
    target: &'a [f64],
    weights: &'a [f64],
    cfg: TreeConfig,
    criterion: Criterion,
    leaf_rule: L,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    depth: usize,
    n_candidates: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl<L: FnMut(&[usize]) -> f64> Grower<'_, L> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: 0.0,
            weight: 0.0,
        });
        self.depth = self.depth.max(depth);

        let (w, s, q) = self.sums(&idx);
        let impurity = self.criterion.impurity(w, s, q);
        let splittable = depth < self.cfg.max_depth
            && idx.len() >= self.cfg.min_samples_split
            && impurity > 1e-12 * w.max(1.0);
        let split = if splittable { self.best_split(&idx, w) } else { None };

        match split {
            Some(best) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                    .iter()
                    .partition(|&&i| self.x.get(i, best.feature) <= best.threshold);
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[at] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
            }
            None => {
                self.nodes[at] = Node::Leaf {
                    value: (self.leaf_rule)(&idx),
                    weight: w,
                };
            }
        }
        at
    }

    fn sums(&self, idx: &[usize]) -> (f64, f64, f64) {
        idx.iter().fold((0.0, 0.0, 0.0), |(w, s, q), &i| {
            let (wi, ti) = (self.weights[i], self.target[i]);
            (w + wi, s + wi * ti, q + wi * ti * ti)
        })
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x.cols();
        if self.n_candidates >= d {
            return (0..d).collect();
        }
        let mut f = index::sample(&mut self.rng, d, self.n_candidates).into_vec();
        f.sort_unstable();
        f
    }

    fn best_split(&mut self, idx: &[usize], total_w: f64) -> Option<BestSplit> {
        let features = self.candidate_features();
        let tol = 1e-12 * total_w.max(1.0);
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for feature in features {
            order.sort_by(|&a, &b| {
                self.x
                    .get(a, feature)
                    .total_cmp(&self.x.get(b, feature))
                    .then(a.cmp(&b))
            });
            let (tw, ts, tq) = self.sums(&order);
            let (mut lw, mut ls, mut lq) = (0.0, 0.0, 0.0);
            for k in 0..order.len() - 1 {
                let i = order[k];
                let (wi, ti) = (self.weights[i], self.target[i]);
                lw += wi;
                ls += wi * ti;
                lq += wi * ti * ti;
                let (lo, hi) = (self.x.get(i, feature), self.x.get(order[k + 1], feature));
                if lo >= hi {
                    continue;
                }
                let score = self.criterion.impurity(lw, ls, lq)
                    + self.criterion.impurity(tw - lw, ts - ls, tq - lq);
                if best.as_ref().is_none_or(|b| score < b.score - tol) {
                    let mut threshold = 0.5 * (lo + hi);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

/// Shared driver for classification and regression trees.
fn grow_tree<L: FnMut(&[usize]) -> f64>(
    x: &FeatureMatrix,
    target: &[f64],
    weights: &[f64],
    cfg: &TreeConfig,
    criterion: Criterion,
    leaf_rule: L,
) -> Result<Tree, LearnError> {
    check_training_set(x, target.len())?;
    cfg.validate(x.cols())?;
    if weights.len() != x.rows() {
        return Err(LearnError::Dimension {
            what: "weight count",
            expected: x.rows(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(LearnError::Config("sample weights must be finite and >= 0".into()));
    }
    let idx: Vec<usize> = (0..x.rows()).filter(|&i| weights[i] > 0.0).collect();
    if idx.is_empty() {
        return Err(LearnError::Empty);
    }
    let mut grower = Grower {
        x,
        target,
        weights,
        cfg: *cfg,
        criterion,
        leaf_rule,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        nodes: Vec::new(),
        depth: 0,
        n_candidates: cfg.features_per_split.resolve(x.cols()),
    };
    grower.grow(idx, 0);
    Ok(Tree {
        nodes: grower.nodes,
        n_features: x.cols(),
        depth: grower.depth,
    })
}

/// Fits a Gini classification tree. `weights` defaults to all ones.
pub fn tree_fit(
    x: &FeatureMatrix,
    y: &[Direction],
    weights: Option<&[f64]>,
    cfg: &TreeConfig,
) -> Result<Tree, LearnError> {
    let target: Vec<f64> = y.iter().map(|d| d.as_unit()).collect();
    let ones;
    let weights = match weights {
        Some(w) => w,
        None => {
            ones = vec![1.0; y.len()];
            &ones
        }
    };
    let leaf = |idx: &[usize]| {
        let (w, s) = idx
            .iter()
            .fold((0.0, 0.0), |(w, s), &i| (w + weights[i], s + weights[i] * target[i]));
        if w > 0.0 {
            s / w
        } else {
            0.5
        }
    };
    grow_tree(x, &target, weights, cfg, Criterion::Gini, leaf)
}

/// Fits a squared-error regression tree on `target` with unit weights; each
/// leaf's value is `leaf_rule(rows in leaf)`.
pub(crate) fn regression_tree_fit(
    x: &FeatureMatrix,
    target: &[f64],
    cfg: &TreeConfig,
    leaf_rule: impl FnMut(&[usize]) -> f64,
) -> Result<Tree, LearnError> {
    let ones = vec![1.0; target.len()];
    grow_tree(x, target, &ones, cfg, Criterion::SquaredError, leaf_rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::{Long, Short};

    fn xor() -> (FeatureMatrix, Vec<Direction>) {
        let x = FeatureMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        (x, vec![Short, Long, Long, Short])
    }

    fn accuracy(t: &Tree, x: &FeatureMatrix, y: &[Direction]) -> f64 {
        x.iter_rows()
            .zip(y)
            .filter(|(r, l)| t.predict(r) == **l)
            .count() as f64
            / y.len() as f64
    }

    #[test]
    fn single_class_is_a_leaf() {
        let x = FeatureMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let t = tree_fit(&x, &[Long; 3], None, &TreeConfig::default()).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[10.0]), Long);
    }

    #[test]
    fn xor_needs_depth_two() {
        let (x, y) = xor();
        let stump = TreeConfig {
            max_depth: 1,
            ..TreeConfig::default()
        };
        let t1 = tree_fit(&x, &y, None, &stump).unwrap();
        assert!(accuracy(&t1, &x, &y) <= 0.75);
        let t2 = tree_fit(
            &x,
            &y,
            None,
            &TreeConfig {
                max_depth: 2,
                ..TreeConfig::default()
            },
        )
        .unwrap();
        assert_eq!(accuracy(&t2, &x, &y), 1.0);
        assert!(t2.depth() <= 2);
    }

    #[test]
    fn equal_gain_ties_pick_lowest_feature_then_threshold() {
        // Features 0 and 1 are identical, so every split ties across them.
        let x = FeatureMatrix::from_rows(&[
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
            vec![4.0, 4.0],
        ])
        .unwrap();
        let y = [Short, Long, Short, Long];
        let cfg = TreeConfig {
            max_depth: 1,
            ..TreeConfig::default()
        };
        let t = tree_fit(&x, &y, None, &cfg).unwrap();
        // Thresholds 1.5 and 3.5 tie (score 1.333…); 2.5 is worse.
        match t.nodes()[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 1.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn memorizes_unique_points() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i * 7 % 13) as f64, (i * 5 % 11) as f64, i as f64 * 0.1])
            .collect();
        let y: Vec<Direction> = (0..40)
            .map(|i| if (i * 31 + 7) % 5 < 2 { Long } else { Short })
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let t = tree_fit(&x, &y, None, &TreeConfig::default()).unwrap();
        assert_eq!(accuracy(&t, &x, &y), 1.0);
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let t = tree_fit(&x, &[Long, Short, Long], Some(&[1.0, 0.0, 1.0]), &TreeConfig::default())
            .unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&[1.0]), Long);
    }

    #[test]
    fn rejects_bad_input() {
        let x = FeatureMatrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(matches!(
            tree_fit(&x, &[Long], None, &TreeConfig::default()),
            Err(LearnError::NonFinite { row: 0, col: 0 })
        ));
        let empty = FeatureMatrix::new(0, 1, vec![]).unwrap();
        assert_eq!(
            tree_fit(&empty, &[], None, &TreeConfig::default()),
            Err(LearnError::Empty)
        );
        let x = FeatureMatrix::from_rows(&[vec![1.0]]).unwrap();
        let bad = TreeConfig {
            min_samples_split: 1,
            ..TreeConfig::default()
        };
        assert!(matches!(tree_fit(&x, &[Long], None, &bad), Err(LearnError::Config(_))));
    }

    #[test]
    fn feature_sampling_is_seeded() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| (0..6).map(|j| ((i * (j + 3)) % 17) as f64).collect())
            .collect();
        let y: Vec<Direction> = (0..60).map(|i| if i % 3 == 0 { Long } else { Short }).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let cfg = TreeConfig {
            features_per_split: FeatureSubset::Count(2),
            seed: 9,
            ..TreeConfig::default()
        };
        assert_eq!(
            tree_fit(&x, &y, None, &cfg).unwrap(),
            tree_fit(&x, &y, None, &cfg).unwrap()
        );
    }
}
