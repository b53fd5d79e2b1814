use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "tabxai", version, about = "Train, evaluate and explain tabular survey classifiers")]
pub struct Cli {
    /// Worker thread cap (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Write a JSON run report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Include wall-clock timing in the run report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic survey population with known ground truth.
    GenData(GenData),
    /// Fit a model and save it.
    Train(Train),
    /// Randomized hyperparameter search with stratified k-fold CV.
    Tune(Tune),
    /// Score a saved model on labelled data.
    Evaluate(Evaluate),
    /// Explain a saved model.
    #[command(subcommand)]
    Explain(Explain),
}

#[derive(Debug, Subcommand)]
pub enum Explain {
    /// Shapley attributions and a global feature ranking.
    Shap(Shap),
    /// Perturbation dependency graph.
    Pgm(Pgm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 125-feature survey with ten causal items.
    Survey,
    /// Mostly six-level nominal items.
    NominalHeavy,
}

#[derive(Debug, Args, Serialize)]
pub struct GenData {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Data CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Schema document to write.
    #[arg(long)]
    pub schema_out: PathBuf,
    /// Ground-truth JSON to write.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Preset::Survey)]
    pub preset: Preset,
    /// Plant ethnicity-specific mechanisms (Asian: C, African American: A, Hispanic: D).
    #[arg(long)]
    pub cohort_mechanisms: bool,
    /// Symmetric label-flip rate.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Monte-Carlo rows for the Bayes-rate estimate.
    #[arg(long, default_value_t = 100_000)]
    pub bayes_samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Data CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema document.
    #[arg(long)]
    pub schema: PathBuf,
    /// Encoding of categorical features: hybrid, onehot or label.
    #[arg(long, default_value = "hybrid")]
    pub encoding: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// rf, tree or knn.
    #[arg(long, default_value = "rf")]
    pub model: String,
    /// Load parameters from a JSON file (as written by `tune --best-out`);
    /// overrides the individual flags below.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// sqrt, all or a column count.
    #[arg(long)]
    pub max_features: Option<String>,
    /// Fit every tree on all rows instead of a bootstrap sample.
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct Train {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Tune {
    #[command(flatten)]
    pub data: DataArgs,
    /// rf, tree or knn.
    #[arg(long, default_value = "rf")]
    pub model: String,
    #[arg(long, default_value_t = 30)]
    pub rounds: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Also re-score the winner with 10- and 15-fold CV.
    #[arg(long)]
    pub rescreen: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CV report JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Best parameters JSON to write (usable with `train --params`).
    #[arg(long)]
    pub best_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Evaluate {
    /// Saved model.
    #[arg(long)]
    pub model: PathBuf,
    /// Labelled data CSV; the schema comes from the model.
    #[arg(long)]
    pub data: PathBuf,
    /// Restrict to rows with feature=level.
    #[arg(long)]
    pub cohort: Option<String>,
    /// Metrics JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapMethod {
    /// Exact when the feature count allows it, sampled otherwise.
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct Shap {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub cohort: Option<String>,
    #[arg(long, value_enum, default_value_t = ShapMethod::Auto)]
    pub method: ShapMethod,
    #[arg(long, default_value_t = 15)]
    pub max_width: usize,
    /// Permutations per instance in sampled mode.
    #[arg(long, default_value_t = 64)]
    pub permutations: usize,
    /// Background rows drawn without replacement.
    #[arg(long, default_value_t = 32)]
    pub background: usize,
    /// Explain the first this many rows.
    #[arg(long, default_value_t = 100)]
    pub rows: usize,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Attribution CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Ranking JSON to write.
    #[arg(long)]
    pub ranking_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeMode {
    Features,
    Groups,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Change {
    /// Predicted label flips.
    Label,
    /// P(accept) moves by more than --tau.
    Delta,
}

#[derive(Debug, Args, Serialize)]
pub struct Pgm {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub cohort: Option<String>,
    #[arg(long, value_enum, default_value_t = NodeMode::Features)]
    pub mode: NodeMode,
    #[arg(long, default_value_t = 0.3)]
    pub perturb_prob: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Change::Label)]
    pub change: Change,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = 50)]
    pub min_cohort: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Graph JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Graph DOT to write.
    #[arg(long)]
    pub dot_out: Option<PathBuf>,
}
