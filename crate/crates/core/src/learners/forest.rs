use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{tree_fit, Tree, TreeConfig};
use super::{check_training_set, FeatureMatrix, LearnError};
use crate::types::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Tree `i` is grown with seed `tree.seed ^ i`.
    pub tree: TreeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestVote {
    pub direction: Direction,
    /// Share of trees voting long.
    pub vote_fraction: f64,
}

/// Bagged Gini trees. Trees are fitted in parallel; each tree's seed is fixed
/// before dispatch so the result does not depend on scheduling.
pub fn forest_fit(
    x: &FeatureMatrix,
    y: &[Direction],
    cfg: &ForestConfig,
) -> Result<Forest, LearnError> {
    if cfg.n_trees == 0 {
        return Err(LearnError::Config("n_trees must be >= 1".into()));
    }
    check_training_set(x, y.len())?;
    cfg.tree.validate(x.cols())?;
    let n = x.rows();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.tree.seed ^ i as u64;
            let tree_cfg = TreeConfig { seed, ..cfg.tree };
            if cfg.bootstrap {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1);
                let mut counts = vec![0.0; n];
                for _ in 0..n {
                    counts[rng.random_range(0..n)] += 1.0;
                }
                tree_fit(x, y, Some(&counts), &tree_cfg)
            } else {
                tree_fit(x, y, None, &tree_cfg)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Forest { trees })
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Majority vote; an exact tie is a short call.
    pub fn predict(&self, row: &[f64]) -> ForestVote {
        let longs = self
            .trees
            .iter()
            .filter(|t| t.predict(row) == Direction::Long)
            .count();
        let vote_fraction = longs as f64 / self.trees.len() as f64;
        ForestVote {
            direction: Direction::from_positive(vote_fraction - 0.5),
            vote_fraction,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::FeatureSubset;
    use Direction::{Long, Short};

    #[test]
    fn single_unbagged_tree_reduces_to_tree_fit() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 7) as f64, (i % 5) as f64])
            .collect();
        let y: Vec<Direction> = (0..30).map(|i| if i % 4 == 1 { Long } else { Short }).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let tree_cfg = TreeConfig {
            max_depth: 3,
            seed: 17,
            ..TreeConfig::default()
        };
        let f = forest_fit(
            &x,
            &y,
            &ForestConfig {
                n_trees: 1,
                bootstrap: false,
                tree: tree_cfg,
            },
        )
        .unwrap();
        let t = tree_fit(&x, &y, None, &tree_cfg).unwrap();
        assert_eq!(f.trees()[0], t);
        for r in x.iter_rows() {
            assert_eq!(f.predict(r).direction, t.predict(r));
        }
    }

    #[test]
    fn tied_vote_is_short() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let long_tree = tree_fit(&x, &[Long, Long], None, &TreeConfig::default()).unwrap();
        let short_tree = tree_fit(&x, &[Short, Short], None, &TreeConfig::default()).unwrap();
        let f = Forest {
            trees: vec![long_tree, short_tree],
        };
        let v = f.predict(&[0.5]);
        assert_eq!(v.direction, Short);
        assert_eq!(v.vote_fraction, 0.5);
    }

    #[test]
    fn rejects_empty_forest() {
        let x = FeatureMatrix::from_rows(&[vec![0.0]]).unwrap();
        let cfg = ForestConfig {
            n_trees: 0,
            bootstrap: true,
            tree: TreeConfig {
                features_per_split: FeatureSubset::Sqrt,
                ..TreeConfig::default()
            },
        };
        assert!(forest_fit(&x, &[Long], &cfg).is_err());
    }
}
