//! Native classifiers, binary metrics and randomized-search cross-validation.

mod forest;
mod knn;
mod metrics;
mod tree;
mod tuning;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{ForestParams, RandomForest};
pub use knn::{KnnModel, KnnParams};
pub use metrics::{evaluate, Metrics};
pub use tree::{DecisionTree, MaxFeatures, Node, TreeParams};
pub use tuning::{
    cross_val_accuracy, kfold_indices, random_search, CvReport, FoldSetting, SearchSpace, Trial, TunerConfig,
};

use crate::encoding::EncodedMatrix;
use crate::error::{Error, Result};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tree,
    Forest,
    Knn,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tree" | "dt" => Ok(ModelKind::Tree),
            "forest" | "rf" => Ok(ModelKind::Forest),
            "knn" => Ok(ModelKind::Knn),
            other => Err(format!("unknown model `{other}` (expected rf, tree or knn)")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Knn => "knn",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Tree(TreeParams),
    Forest(ForestParams),
    Knn(KnnParams),
}

impl ModelParams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Tree => ModelParams::Tree(TreeParams::default()),
            ModelKind::Forest => ModelParams::Forest(ForestParams::default()),
            ModelKind::Knn => ModelParams::Knn(KnnParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Tree(_) => ModelKind::Tree,
            ModelParams::Forest(_) => ModelKind::Forest,
            ModelParams::Knn(_) => ModelKind::Knn,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let check_tree = |depth: usize, min_leaf: usize, mf: MaxFeatures| {
            if depth == 0 {
                return bad("max_depth must be at least 1".into());
            }
            if min_leaf == 0 {
                return bad("min_leaf must be at least 1".into());
            }
            if mf == MaxFeatures::Count(0) {
                return bad("max_features must be at least 1".into());
            }
            Ok(())
        };
        match *self {
            ModelParams::Tree(p) => check_tree(p.max_depth, p.min_leaf, p.max_features),
            ModelParams::Forest(p) => {
                if p.n_trees == 0 {
                    return bad("n_trees must be at least 1".into());
                }
                check_tree(p.max_depth, p.min_leaf, p.max_features)
            }
            ModelParams::Knn(p) => {
                if p.k == 0 || p.k > n {
                    return bad(format!("k = {} must lie in 1..={n}", p.k));
                }
                Ok(())
            }
        }
    }
}

/// A trained binary classifier. Class order is `(refuse, accept)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Tree(DecisionTree),
    Forest(RandomForest),
    Knn(KnnModel),
}

impl FittedModel {
    /// Trains on `x`/`y`. Deterministic per `seed`.
    pub fn fit(params: &ModelParams, x: &EncodedMatrix, y: &[u8], seed: u64) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Fit(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if y.len() < 2 {
            return Err(Error::Fit(format!("need at least 2 rows, got {}", y.len())));
        }
        let pos = y.iter().filter(|&&t| t == 1).count();
        if pos == 0 || pos == y.len() {
            return Err(Error::Fit("training labels contain a single class".into()));
        }
        params.validate(y.len())?;
        Ok(match params {
            ModelParams::Tree(p) => {
                let mut samples: Vec<usize> = (0..y.len()).collect();
                FittedModel::Tree(DecisionTree::fit_rows(x, y, &mut samples, *p, &mut rng::stream(seed, &[0])))
            }
            ModelParams::Forest(p) => FittedModel::Forest(RandomForest::fit(x, y, p, seed)),
            ModelParams::Knn(p) => FittedModel::Knn(KnnModel::fit(x, y, p)),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Tree(_) => ModelKind::Tree,
            FittedModel::Forest(_) => ModelKind::Forest,
            FittedModel::Knn(_) => ModelKind::Knn,
        }
    }

    /// Encoded width the model was trained on.
    pub fn width(&self) -> usize {
        match self {
            FittedModel::Tree(m) => m.width(),
            FittedModel::Forest(m) => m.width(),
            FittedModel::Knn(m) => m.width(),
        }
    }

    /// P(accept) for one encoded row. The caller guarantees the width.
    pub fn predict_accept_row(&self, row: &[f64]) -> f64 {
        match self {
            FittedModel::Tree(m) => m.predict_accept_row(row),
            FittedModel::Forest(m) => m.predict_accept_row(row),
            FittedModel::Knn(m) => m.predict_accept_row(row),
        }
    }

    pub fn predict_accept(&self, x: &EncodedMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.width() {
            return Err(Error::Shape { expected: self.width(), actual: x.cols() });
        }
        Ok(par::map_range(x.rows(), |i| self.predict_accept_row(x.row(i))))
    }

    /// `n x 2` probabilities, columns `(refuse, accept)`.
    pub fn predict_proba(&self, x: &EncodedMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self.predict_accept(x)?.into_iter().map(|p| [1.0 - p, p]).collect())
    }

    /// Hard labels at the 0.5 threshold on P(accept).
    pub fn predict_labels(&self, x: &EncodedMatrix) -> Result<Vec<u8>> {
        Ok(self.predict_accept(x)?.into_iter().map(label_of).collect())
    }
}

/// Decision rule shared by metrics and explainers: accept iff P(accept) >= 0.5.
#[inline]
pub fn label_of(p_accept: f64) -> u8 {
    u8::from(p_accept >= 0.5)
}
