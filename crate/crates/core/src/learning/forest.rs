//! Bagged ensemble of CART trees.
//!
//! Tree `t` draws its bootstrap sample and its per-split column subsets from
//! the stream keyed by `(seed, t)`, so the forest is identical no matter how
//! trees are scheduled across threads.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, MaxFeatures, TreeParams};
use crate::encoding::EncodedMatrix;
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Draw `n` rows with replacement per tree.
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 16, min_leaf: 1, bootstrap: true, max_features: MaxFeatures::Sqrt }
    }
}

impl ForestParams {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams { max_depth: self.max_depth, min_leaf: self.min_leaf, max_features: self.max_features }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    width: usize,
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub(crate) fn fit(x: &EncodedMatrix, y: &[u8], params: &ForestParams, seed: u64) -> RandomForest {
        let n = x.rows();
        let tree_params = params.tree_params();
        let trees = par::map_range(params.n_trees, |t| {
            let mut rng = rng::stream(seed, &[t as u64]);
            let mut samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::fit_rows(x, y, &mut samples, tree_params, &mut rng)
        });
        RandomForest { width: x.cols(), trees }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Mean of member-tree probabilities.
    pub fn predict_accept_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_accept_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn used_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.trees.iter().flat_map(|t| t.used_columns()).collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}
