//! Stratified k-fold splitting and randomized hyperparameter search.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{label_of, ForestParams, KnnParams, MaxFeatures, ModelKind, ModelParams, TreeParams};
use crate::dataset::Dataset;
use crate::encoding::{EncodedMatrix, EncoderMode, FittedEncoder};
use crate::error::{Error, Result};
use crate::learning::FittedModel;
use crate::{par, rng};

/// Stratified folds. Each class is shuffled and dealt round-robin, with the
/// second class continuing where the first left off so fold sizes differ by
/// at most one. Every fold is sorted ascending.
pub fn kfold_indices(n: usize, k: usize, y: &[u8], seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Fold(format!("need at least 2 folds, got {k}")));
    }
    if y.len() != n {
        return Err(Error::Fold(format!("{n} rows but {} labels", y.len())));
    }
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    let mut offset = 0;
    for class in 0..2u8 {
        let mut idx: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
        if idx.len() < k {
            return Err(Error::Fold(format!("class {class} has {} rows, fewer than {k} folds", idx.len())));
        }
        idx.shuffle(&mut rng::stream(seed, &[class as u64]));
        for (j, &i) in idx.iter().enumerate() {
            folds[(offset + j) % k].push(i);
        }
        offset = (offset + idx.len()) % k;
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Per-fold held-out accuracies and their mean.
pub fn cross_val_accuracy(
    params: &ModelParams,
    x: &EncodedMatrix,
    y: &[u8],
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    let mut in_fold = vec![0usize; y.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_fold[i] = f;
        }
    }
    let mut scores = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..y.len()).filter(|&i| in_fold[i] != f).collect();
        let x_train = x.select_rows(&train);
        let y_train: Vec<u8> = train.iter().map(|&i| y[i]).collect();
        let model = FittedModel::fit(params, &x_train, &y_train, rng::derive(seed, &[f as u64]))?;
        let correct = test.iter().filter(|&&i| label_of(model.predict_accept_row(x.row(i))) == y[i]).count();
        scores.push(correct as f64 / test.len() as f64);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok((scores, mean))
}

/// Inclusive integer ranges sampled uniformly by the tuner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_trees: (usize, usize),
    pub max_depth: (usize, usize),
    pub min_leaf: (usize, usize),
    pub k: (usize, usize),
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace { n_trees: (50, 500), max_depth: (2, 32), min_leaf: (1, 20), k: (1, 50) }
    }
}

impl SearchSpace {
    fn sample(&self, kind: ModelKind, rng: &mut impl Rng) -> ModelParams {
        let mut draw = |(lo, hi): (usize, usize)| rng.random_range(lo..=hi);
        match kind {
            ModelKind::Tree => ModelParams::Tree(TreeParams {
                max_depth: draw(self.max_depth),
                min_leaf: draw(self.min_leaf),
                max_features: MaxFeatures::All,
            }),
            ModelKind::Forest => {
                let n_trees = draw(self.n_trees);
                ModelParams::Forest(ForestParams {
                    n_trees,
                    max_depth: draw(self.max_depth),
                    min_leaf: draw(self.min_leaf),
                    ..ForestParams::default()
                })
            }
            ModelKind::Knn => ModelParams::Knn(KnnParams { k: draw(self.k) }),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in
            [("n_trees", self.n_trees), ("max_depth", self.max_depth), ("min_leaf", self.min_leaf), ("k", self.k)]
        {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("search range {name} = [{lo}, {hi}] is invalid")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunerConfig {
    pub rounds: usize,
    pub folds: usize,
    pub seed: u64,
    pub space: SearchSpace,
    /// Fold counts at which the winning configuration is re-scored.
    pub rescreen_folds: Vec<usize>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig { rounds: 30, folds: 5, seed: 0, space: SearchSpace::default(), rescreen_folds: Vec::new() }
    }
}

impl TunerConfig {
    /// Also re-score the winner with 10- and 15-fold CV.
    pub fn with_rescreen(mut self) -> Self {
        self.rescreen_folds = vec![10, 15];
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub params: ModelParams,
    pub fold_scores: Vec<f64>,
    /// Mean fold accuracy; `None` if the trial failed.
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSetting {
    pub folds: usize,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub kind: ModelKind,
    pub encoding: EncoderMode,
    pub config: TunerConfig,
    pub trials: Vec<Trial>,
    pub best_index: usize,
    pub best_score: f64,
    /// The search fold count first, then every rescreen setting.
    pub fold_settings: Vec<FoldSetting>,
    /// Mean accuracy over `fold_settings`.
    pub settings_mean: f64,
}

/// Samples `cfg.rounds` configurations, scores each by mean stratified
/// k-fold accuracy and returns the best one (lowest trial index on ties).
/// A trial whose fit fails is recorded as failed; the search fails only if
/// every trial does.
pub fn random_search(
    kind: ModelKind,
    d: &Dataset,
    mode: EncoderMode,
    cfg: &TunerConfig,
) -> Result<(ModelParams, CvReport)> {
    if cfg.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    cfg.space.validate()?;
    let (neg, pos) = d.class_counts();
    let min_class = neg.min(pos);
    for &k in std::iter::once(&cfg.folds).chain(&cfg.rescreen_folds) {
        if k < 2 || k > min_class {
            return Err(Error::Config(format!("fold count {k} must lie in 2..={min_class} (smallest class size)")));
        }
    }

    let x = FittedEncoder::fit(d.schema_arc().clone(), mode).transform(d)?;
    let y = d.target();
    let folds = kfold_indices(d.n_rows(), cfg.folds, y, rng::derive(cfg.seed, &[1]))?;

    let candidates: Vec<ModelParams> =
        (0..cfg.rounds).map(|i| cfg.space.sample(kind, &mut rng::stream(cfg.seed, &[0, i as u64]))).collect();
    let trials: Vec<Trial> = par::map_range(cfg.rounds, |i| {
        let params = candidates[i];
        match cross_val_accuracy(&params, &x, y, &folds, rng::derive(cfg.seed, &[2, i as u64])) {
            Ok((fold_scores, mean)) => Trial { index: i, params, fold_scores, score: Some(mean), error: None },
            Err(e) => Trial { index: i, params, fold_scores: Vec::new(), score: None, error: Some(e.to_string()) },
        }
    });

    let (best_index, best_score) = trials
        .iter()
        .filter_map(|t| t.score.map(|s| (t.index, s)))
        .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((i, s)),
        })
        .ok_or_else(|| Error::Fit(format!("all {} trials failed", trials.len())))?;
    let best = trials[best_index].params;

    let mut fold_settings = vec![FoldSetting { folds: cfg.folds, mean_accuracy: best_score }];
    for &k in &cfg.rescreen_folds {
        let folds = kfold_indices(d.n_rows(), k, y, rng::derive(cfg.seed, &[3, k as u64]))?;
        let (_, mean) = cross_val_accuracy(&best, &x, y, &folds, rng::derive(cfg.seed, &[4, k as u64]))?;
        fold_settings.push(FoldSetting { folds: k, mean_accuracy: mean });
    }
    let settings_mean = fold_settings.iter().map(|s| s.mean_accuracy).sum::<f64>() / fold_settings.len() as f64;

    let report =
        CvReport { kind, encoding: mode, config: cfg.clone(), trials, best_index, best_score, fold_settings, settings_mean };
    Ok((best, report))
}
