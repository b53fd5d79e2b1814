use std::path::Path;
use std::sync::Arc;

use serde_json::json;
use tabxai::learning::{self, MaxFeatures, TunerConfig};
use tabxai::pgm::{self, ChangeRule, PgmConfig, PgmMode};
use tabxai::shapley::{self, Background, ShapMode};
use tabxai::synthetic::{self, GeneratorSpec};
use tabxai::{BlackBox, Dataset, EncoderMode, FeatureSchema, ModelKind, ModelParams, Pipeline};

use crate::args::{self, Change, NodeMode, Preset, ShapMethod};
use crate::error::{CliError, CliResult};
use crate::report::{config_value, Outcome};

/// Multipliers used by `gen-data --cohort-mechanisms`.
const COHORT_BOOST: f64 = 2.0;
const COHORT_DAMP: f64 = 0.25;

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn parse_encoding(s: &str) -> CliResult<EncoderMode> {
    s.parse().map_err(CliError::Usage)
}

fn parse_kind(s: &str) -> CliResult<ModelKind> {
    s.parse().map_err(CliError::Usage)
}

fn parse_max_features(s: &str) -> CliResult<MaxFeatures> {
    match s {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        n => n
            .parse()
            .map(MaxFeatures::Count)
            .map_err(|_| CliError::usage(format!("--max-features `{s}` is not sqrt, all or a count"))),
    }
}

/// Splits `feature=level`.
pub fn parse_cohort(s: &str) -> CliResult<(String, String)> {
    match s.split_once('=') {
        Some((f, l)) if !f.is_empty() && !l.is_empty() => Ok((f.to_string(), l.to_string())),
        _ => Err(CliError::usage(format!("--cohort `{s}` must look like feature=level"))),
    }
}

fn load_data(data: &Path, schema: &Path) -> CliResult<Dataset> {
    let schema = Arc::new(FeatureSchema::from_path(schema)?);
    Ok(Dataset::load_csv(data, schema)?)
}

fn restrict(d: Dataset, cohort: Option<&str>) -> CliResult<Dataset> {
    match cohort {
        None => Ok(d),
        Some(c) => {
            let (f, l) = parse_cohort(c)?;
            Ok(d.filter_cohort(&f, &l)?)
        }
    }
}

pub fn gen_data(a: &args::GenData) -> CliResult<Outcome> {
    let mut spec = match a.preset {
        Preset::Survey => GeneratorSpec::default(),
        Preset::NominalHeavy => GeneratorSpec::nominal_heavy(),
    }
    .with_seed(a.seed);
    if a.cohort_mechanisms {
        if spec.ethnic_mix.is_none() {
            return Err(CliError::usage("--cohort-mechanisms needs a preset with an ethnicity feature"));
        }
        spec = spec.with_cohort_mechanisms(COHORT_BOOST, COHORT_DAMP)?;
    }
    spec.noise = a.noise;
    spec.bayes_samples = a.bayes_samples;

    let (data, truth) = synthetic::generate(&spec, a.n)?;
    let config = json!({
        "flags": config_value(a),
        "cohort_boost": if a.cohort_mechanisms { Some(COHORT_BOOST) } else { None },
        "cohort_damp": if a.cohort_mechanisms { Some(COHORT_DAMP) } else { None },
        "causal_features": truth.causal_features,
    });
    let mut out = Outcome::new(Some(a.seed), config);
    out.write(&a.out, &data.to_csv_string())?;
    out.write(&a.schema_out, &data.schema().to_text())?;
    if let Some(p) = &a.truth_out {
        out.write(p, &with_newline(truth.to_json()))?;
    }
    Ok(out)
}

/// Defaults for the model kind with any hyperparameter flags applied on top.
fn resolve_params(m: &args::ModelArgs, out: &mut Outcome) -> CliResult<ModelParams> {
    let kind = parse_kind(&m.model)?;
    let overrides = m.n_trees.is_some()
        || m.max_depth.is_some()
        || m.min_leaf.is_some()
        || m.max_features.is_some()
        || m.no_bootstrap
        || m.k.is_some();
    if let Some(path) = &m.params {
        if overrides {
            return Err(CliError::usage("--params cannot be combined with hyperparameter flags"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let params: ModelParams = serde_json::from_str(&text)
            .map_err(|e| tabxai::Error::Format(format!("{}: {e}", path.display())))?;
        if params.kind() != kind {
            out.warn(format!("--params holds a {} model; --model {} ignored", params.kind(), m.model));
        }
        return Ok(params);
    }

    let tree_only = |flag: &str| CliError::usage(format!("{flag} does not apply to a {kind} model"));
    let mut params = ModelParams::default_for(kind);
    match &mut params {
        ModelParams::Forest(p) => {
            if m.k.is_some() {
                return Err(tree_only("--k"));
            }
            apply_tree(m, &mut p.max_depth, &mut p.min_leaf, &mut p.max_features)?;
            if let Some(n) = m.n_trees {
                p.n_trees = n;
            }
            p.bootstrap = !m.no_bootstrap;
        }
        ModelParams::Tree(p) => {
            if m.k.is_some() || m.n_trees.is_some() || m.no_bootstrap {
                return Err(tree_only("--k, --n-trees and --no-bootstrap"));
            }
            apply_tree(m, &mut p.max_depth, &mut p.min_leaf, &mut p.max_features)?;
        }
        ModelParams::Knn(p) => {
            let tree_flags = m.n_trees.is_some()
                || m.max_depth.is_some()
                || m.min_leaf.is_some()
                || m.max_features.is_some()
                || m.no_bootstrap;
            if tree_flags {
                return Err(CliError::usage("only --k applies to a knn model"));
            }
            if let Some(k) = m.k {
                p.k = k;
            }
        }
    }
    Ok(params)
}

fn apply_tree(
    m: &args::ModelArgs,
    depth: &mut usize,
    min_leaf: &mut usize,
    max_features: &mut MaxFeatures,
) -> CliResult<()> {
    if let Some(v) = m.max_depth {
        *depth = v;
    }
    if let Some(v) = m.min_leaf {
        *min_leaf = v;
    }
    if let Some(v) = &m.max_features {
        *max_features = parse_max_features(v)?;
    }
    Ok(())
}

pub fn train(a: &args::Train) -> CliResult<Outcome> {
    let mode = parse_encoding(&a.data.encoding)?;
    let mut out = Outcome::new(Some(a.seed), serde_json::Value::Null);
    let params = resolve_params(&a.model, &mut out)?;
    let d = load_data(&a.data.data, &a.data.schema)?;
    let model = Pipeline::train(&d, mode, &params, a.seed)?;
    out.config = json!({
        "flags": config_value(a),
        "encoding": mode,
        "params": params,
        "rows": d.n_rows(),
        "encoded_width": model.encoder().width(),
    });
    out.write(&a.out, &model.to_json())?;
    Ok(out)
}

pub fn tune(a: &args::Tune) -> CliResult<Outcome> {
    let mode = parse_encoding(&a.data.encoding)?;
    let kind = parse_kind(&a.model)?;
    let mut cfg = TunerConfig { rounds: a.rounds, folds: a.folds, seed: a.seed, ..TunerConfig::default() };
    if a.rescreen {
        cfg = cfg.with_rescreen();
    }
    let d = load_data(&a.data.data, &a.data.schema)?;
    let (best, report) = learning::random_search(kind, &d, mode, &cfg)?;
    let config = json!({ "flags": config_value(a), "tuner": cfg, "rows": d.n_rows() });
    let mut out = Outcome::new(Some(a.seed), config);
    for t in report.trials.iter().filter(|t| t.error.is_some()) {
        out.warn(format!("trial {} failed: {}", t.index, t.error.as_deref().unwrap_or("")));
    }
    out.write(&a.out, &with_newline(serde_json::to_string_pretty(&report).expect("cv report serializes")))?;
    if let Some(p) = &a.best_out {
        out.write(p, &with_newline(serde_json::to_string_pretty(&best).expect("params serialize")))?;
    }
    Ok(out)
}

pub fn evaluate(a: &args::Evaluate) -> CliResult<Outcome> {
    let model = Pipeline::load(&a.model)?;
    let d = Dataset::load_csv(&a.data, model.schema().clone())?;
    let d = restrict(d, a.cohort.as_deref())?;
    let x = model.encode(&d)?;
    let metrics = learning::evaluate(model.model(), &x, d.target())?;
    let (neg, pos) = d.class_counts();
    let doc = json!({
        "model": model.model().kind(),
        "encoding": model.encoder().mode(),
        "cohort": a.cohort,
        "rows": d.n_rows(),
        "majority_rate": neg.max(pos) as f64 / d.n_rows() as f64,
        "metrics": metrics,
    });
    let mut out = Outcome::new(None, json!({ "flags": config_value(a) }));
    out.write(&a.out, &with_newline(serde_json::to_string_pretty(&doc).expect("metrics serialize")))?;
    Ok(out)
}

pub fn shap(a: &args::Shap) -> CliResult<Outcome> {
    if a.rows == 0 || a.top_k == 0 || a.background == 0 {
        return Err(CliError::usage("--rows, --top-k and --background must be at least 1"));
    }
    let model = Pipeline::load(&a.model)?;
    let d = Dataset::load_csv(&a.data, model.schema().clone())?;
    let d = restrict(d, a.cohort.as_deref())?;
    let width = model.n_features();
    let mode = match a.method {
        ShapMethod::Exact => ShapMode::Exact { max_width: a.max_width },
        ShapMethod::Sampled => ShapMode::Sampled { permutations: a.permutations },
        ShapMethod::Auto if width <= a.max_width => ShapMode::Exact { max_width: a.max_width },
        ShapMethod::Auto => ShapMode::Sampled { permutations: a.permutations },
    };
    let bg = Background::sample(&d, a.background, a.seed)?;
    let rows: Vec<usize> = (0..a.rows.min(d.n_rows())).collect();
    let explained = d.select(&rows);
    let summary = shapley::global_summary(&model, &explained, &bg, mode, a.top_k, a.seed)?;

    let config = json!({
        "flags": config_value(a),
        "mode": mode,
        "background_rows": bg.len(),
        "explained_rows": rows.len(),
        "features": width,
    });
    let mut out = Outcome::new(Some(a.seed), config);
    if bg.len() < a.background {
        out.warn(format!("background capped at {} rows", bg.len()));
    }
    if a.top_k > width {
        out.warn(format!("--top-k {} exceeds the {width} features", a.top_k));
    }
    out.write(&a.out, &summary.to_csv(&explained))?;
    if let Some(p) = &a.ranking_out {
        out.write(p, &with_newline(summary.ranking_json()))?;
    }
    Ok(out)
}

pub fn pgm(a: &args::Pgm) -> CliResult<Outcome> {
    let cfg = PgmConfig {
        perturb_prob: a.perturb_prob,
        samples: a.samples,
        runs: a.runs,
        alpha: a.alpha,
        mode: match a.mode {
            NodeMode::Features => PgmMode::Features,
            NodeMode::Groups => PgmMode::Groups,
        },
        change: match a.change {
            Change::Label => ChangeRule::LabelFlip,
            Change::Delta => ChangeRule::Delta { tau: a.tau },
        },
        min_cohort: a.min_cohort,
        seed: a.seed,
    };
    cfg.validate()?;
    let model = Pipeline::load(&a.model)?;
    let d = Dataset::load_csv(&a.data, model.schema().clone())?;
    let graph = match a.cohort.as_deref() {
        None => pgm::explain(&model, &d, &cfg)?,
        Some(c) => {
            let (f, l) = parse_cohort(c)?;
            pgm::cohort_explain(&model, &d, &f, &l, &cfg)?
        }
    };
    let mut out = Outcome::new(Some(a.seed), json!({ "flags": config_value(a), "pgm": cfg }));
    for w in &graph.warnings {
        out.warn(w.clone());
    }
    out.write(&a.out, &with_newline(graph.to_json()))?;
    if let Some(p) = &a.dot_out {
        out.write(p, &graph.to_dot())?;
    }
    Ok(out)
}
