//! Perturbation-based dependency explainer for tabular models.
//!
//! Each realization draws a record, perturbs every explanation node with
//! probability `v` by resampling its member features from their empirical
//! marginals, and notes whether the predicted label changed. A 2x2
//! chi-square test per node (perturbed vs changed) gives a p-value and a
//! bounded weight `|phi|`; both are averaged over independent runs. Nodes
//! are single features or composite groups, and the result is a star graph
//! pointing at the target.

mod graph;
mod stats;

pub use graph::{ExplanationGraph, GraphNode};
pub use stats::{chi2_sf, Contingency, DependencyStat};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learning::label_of;
use crate::model::BlackBox;
use crate::rng::{self, StreamRng};
use crate::schema::{FeatureSchema, Group};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PgmMode {
    Features,
    Groups,
}

/// How a prediction change is detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ChangeRule {
    /// The 0.5-thresholded label differs.
    LabelFlip,
    /// |P(accept) change| exceeds `tau`.
    Delta { tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgmConfig {
    pub perturb_prob: f64,
    pub samples: usize,
    pub runs: usize,
    pub alpha: f64,
    pub mode: PgmMode,
    pub change: ChangeRule,
    /// Smallest cohort `cohort_explain` accepts.
    pub min_cohort: usize,
    pub seed: u64,
}

impl Default for PgmConfig {
    fn default() -> Self {
        PgmConfig {
            perturb_prob: 0.3,
            samples: 2000,
            runs: 5,
            alpha: 0.05,
            mode: PgmMode::Features,
            change: ChangeRule::LabelFlip,
            min_cohort: 50,
            seed: 0,
        }
    }
}

impl PgmConfig {
    pub fn validate(&self) -> Result<()> {
        let v = self.perturb_prob;
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Config(format!("perturbation probability {v} must lie in (0, 1)")));
        }
        if self.samples < 100 {
            return Err(Error::Config(format!("need at least 100 samples, got {}", self.samples)));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if let ChangeRule::Delta { tau } = self.change {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::Config(format!("tau {tau} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Feature,
    Group,
}

/// An explanation node: a named set of original features perturbed together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmNode {
    pub name: String,
    pub kind: NodeKind,
    pub members: Vec<usize>,
    key: u64,
}

impl PgmNode {
    /// Members are stored sorted; the random key of a node depends only on
    /// its member set, so listing order and names do not affect the draws.
    pub fn new(name: impl Into<String>, kind: NodeKind, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        let path: Vec<u64> = members.iter().map(|&m| m as u64).collect();
        let key = rng::derive(members.len() as u64, &path);
        PgmNode { name: name.into(), kind, members, key }
    }
}

/// One node per feature, in schema order.
pub fn feature_nodes(schema: &FeatureSchema) -> Vec<PgmNode> {
    schema.features().iter().enumerate().map(|(i, f)| PgmNode::new(&f.name, NodeKind::Feature, vec![i])).collect()
}

/// One node per non-empty group, A to D.
pub fn group_nodes(schema: &FeatureSchema) -> Result<Vec<PgmNode>> {
    let nodes: Vec<PgmNode> = Group::ALL
        .iter()
        .map(|&g| (g, schema.group_members(g)))
        .filter(|(_, m)| !m.is_empty())
        .map(|(g, m)| PgmNode::new(g.as_str(), NodeKind::Group, m))
        .collect();
    if nodes.is_empty() {
        return Err(Error::Config("groups mode needs at least one group-tagged feature".into()));
    }
    Ok(nodes)
}

pub fn nodes_for(schema: &FeatureSchema, mode: PgmMode) -> Result<Vec<PgmNode>> {
    match mode {
        PgmMode::Features => Ok(feature_nodes(schema)),
        PgmMode::Groups => group_nodes(schema),
    }
}

/// Empirical per-feature distributions: the observed column values.
#[derive(Debug, Clone)]
pub struct Marginals {
    columns: Vec<Vec<f64>>,
    constant: Vec<bool>,
}

impl Marginals {
    pub fn fit(d: &Dataset) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Dataset("cannot fit marginals on an empty dataset".into()));
        }
        let columns: Vec<Vec<f64>> = (0..d.n_features()).map(|f| (0..d.n_rows()).map(|i| d.value(i, f)).collect()).collect();
        let constant = columns.iter().map(|c| c.iter().all(|&v| v == c[0])).collect();
        Ok(Marginals { columns, constant })
    }

    pub fn is_constant(&self, feature: usize) -> bool {
        self.constant[feature]
    }

    /// Indices of features whose perturbation is the identity.
    pub fn constant_features(&self) -> Vec<usize> {
        (0..self.constant.len()).filter(|&f| self.constant[f]).collect()
    }
}

/// Replaces every masked feature by an independent draw from its marginal,
/// visiting features in ascending order. Constant features are left as is
/// and consume no randomness.
pub fn perturb_record(record: &[f64], mask: &[bool], marginals: &Marginals, rng: &mut StreamRng) -> Vec<f64> {
    let mut out = record.to_vec();
    for (f, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        if marginals.constant[f] {
            continue;
        }
        let col = &marginals.columns[f];
        out[f] = col[rng.random_range(0..col.len())];
    }
    out
}

/// `samples` rows of node perturbation indicators `R` and the matching
/// prediction-change indicator `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationTable {
    pub nodes: Vec<String>,
    r: Vec<bool>,
    i: Vec<bool>,
}

impl RealizationTable {
    pub fn new(nodes: Vec<String>, r: Vec<bool>, i: Vec<bool>) -> Result<Self> {
        if r.len() != nodes.len() * i.len() {
            return Err(Error::Shape { expected: nodes.len() * i.len(), actual: r.len() });
        }
        Ok(RealizationTable { nodes, r, i })
    }

    pub fn samples(&self) -> usize {
        self.i.len()
    }

    pub fn perturbed(&self, sample: usize, node: usize) -> bool {
        self.r[sample * self.nodes.len() + node]
    }

    pub fn changed(&self, sample: usize) -> bool {
        self.i[sample]
    }

    pub fn contingency(&self, node: usize) -> Contingency {
        let mut t = Contingency::default();
        for s in 0..self.samples() {
            match (self.perturbed(s, node), self.i[s]) {
                (true, true) => t.a += 1,
                (true, false) => t.b += 1,
                (false, true) => t.c += 1,
                (false, false) => t.d += 1,
            }
        }
        t
    }
}

/// Chi-square, p-value and |phi| for every node of the table.
pub fn dependency_stats(t: &RealizationTable) -> Vec<DependencyStat> {
    (0..t.nodes.len()).map(|k| t.contingency(k).stat()).collect()
}

struct Context<'a, M: ?Sized> {
    model: &'a M,
    data: &'a Dataset,
    nodes: &'a [PgmNode],
    marginals: Marginals,
    original: Vec<f64>,
    cfg: PgmConfig,
}

impl<'a, M: BlackBox + ?Sized> Context<'a, M> {
    fn new(model: &'a M, data: &'a Dataset, nodes: &'a [PgmNode], cfg: &PgmConfig) -> Result<Self> {
        cfg.validate()?;
        if nodes.is_empty() {
            return Err(Error::Config("no explanation nodes".into()));
        }
        if data.is_empty() {
            return Err(Error::Dataset("cannot explain on an empty dataset".into()));
        }
        if model.n_features() != data.n_features() {
            return Err(Error::Shape { expected: model.n_features(), actual: data.n_features() });
        }
        for node in nodes {
            if node.members.is_empty() {
                return Err(Error::Config(format!("node `{}` has no member features", node.name)));
            }
            if let Some(&bad) = node.members.iter().find(|&&m| m >= data.n_features()) {
                return Err(Error::Index { index: bad, width: data.n_features() });
            }
        }
        let marginals = Marginals::fit(data)?;
        let mut original = vec![0.0; data.n_rows()];
        par::for_each_chunk(&mut original, 256, |c, out| {
            let start = c * 256;
            let rows = &data.values()[start * data.n_features()..(start + out.len()) * data.n_features()];
            model.predict_batch(rows, out);
        });
        Ok(Context { model, data, nodes, marginals, original, cfg: *cfg })
    }

    fn changed(&self, before: f64, after: f64) -> bool {
        match self.cfg.change {
            ChangeRule::LabelFlip => label_of(before) != label_of(after),
            ChangeRule::Delta { tau } => (after - before).abs() > tau,
        }
    }

    fn realizations(&self, run: usize) -> RealizationTable {
        let k = self.nodes.len();
        let p = self.data.n_features();
        let seed = self.cfg.seed;
        let rows = par::map_range(self.cfg.samples, |s| {
            let path = [run as u64, s as u64];
            let mut rng = rng::stream(seed, &path);
            let row = rng.random_range(0..self.data.n_rows());
            let mut mask = vec![false; p];
            let r: Vec<bool> = self
                .nodes
                .iter()
                .map(|node| {
                    let hit = rng::unit(seed, &[run as u64, s as u64, node.key]) < self.cfg.perturb_prob;
                    if hit {
                        node.members.iter().for_each(|&m| mask[m] = true);
                    }
                    hit
                })
                .collect();
            let record = perturb_record(self.data.row(row), &mask, &self.marginals, &mut rng);
            let changed = self.changed(self.original[row], self.model.predict_accept(&record));
            (r, changed)
        });
        let mut r = Vec::with_capacity(rows.len() * k);
        let mut i = Vec::with_capacity(rows.len());
        for (bits, changed) in rows {
            r.extend(bits);
            i.push(changed);
        }
        RealizationTable { nodes: self.nodes.iter().map(|n| n.name.clone()).collect(), r, i }
    }
}

/// Realizations for one run; deterministic in `(cfg.seed, run)`.
pub fn generate_realizations<M: BlackBox + ?Sized>(
    m: &M,
    d: &Dataset,
    nodes: &[PgmNode],
    cfg: &PgmConfig,
    run: usize,
) -> Result<RealizationTable> {
    Ok(Context::new(m, d, nodes, cfg)?.realizations(run))
}

/// Per-node statistics of a single run.
pub fn run_stats<M: BlackBox + ?Sized>(
    m: &M,
    d: &Dataset,
    nodes: &[PgmNode],
    cfg: &PgmConfig,
    run: usize,
) -> Result<Vec<DependencyStat>> {
    Ok(dependency_stats(&generate_realizations(m, d, nodes, cfg, run)?))
}

/// Explanation over an explicit node set.
pub fn explain_nodes<M: BlackBox + ?Sized>(
    m: &M,
    d: &Dataset,
    nodes: &[PgmNode],
    cfg: &PgmConfig,
) -> Result<ExplanationGraph> {
    let ctx = Context::new(m, d, nodes, cfg)?;
    let per_run: Vec<Vec<DependencyStat>> = par::map_range(cfg.runs, |run| dependency_stats(&ctx.realizations(run)));

    let runs = cfg.runs as f64;
    let graph_nodes = nodes
        .iter()
        .enumerate()
        .map(|(k, node)| {
            let run_weights: Vec<f64> = per_run.iter().map(|s| s[k].phi).collect();
            let run_p_values: Vec<f64> = per_run.iter().map(|s| s[k].p_value).collect();
            let weight = run_weights.iter().sum::<f64>() / runs;
            let p_value = run_p_values.iter().sum::<f64>() / runs;
            GraphNode {
                name: node.name.clone(),
                kind: node.kind,
                weight,
                p_value,
                selected: p_value < cfg.alpha,
                members: node.members.iter().map(|&f| d.schema().feature(f).name.clone()).collect(),
                run_weights,
                run_p_values,
            }
        })
        .collect();

    let warnings = ctx
        .marginals
        .constant_features()
        .into_iter()
        .map(|f| format!("feature `{}` is constant; its perturbation is the identity", d.schema().feature(f).name))
        .collect();
    Ok(ExplanationGraph {
        target: d.schema().target_name().to_string(),
        nodes: graph_nodes,
        config: *cfg,
        rows: d.n_rows(),
        cohort: None,
        warnings,
    })
}

/// Explanation with the nodes implied by `cfg.mode`.
pub fn explain<M: BlackBox + ?Sized>(m: &M, d: &Dataset, cfg: &PgmConfig) -> Result<ExplanationGraph> {
    let nodes = nodes_for(d.schema(), cfg.mode)?;
    explain_nodes(m, d, &nodes, cfg)
}

/// Explanation restricted to rows where `feature == level`, with marginals
/// refit on that cohort.
pub fn cohort_explain<M: BlackBox + ?Sized>(
    m: &M,
    d: &Dataset,
    feature: &str,
    level: &str,
    cfg: &PgmConfig,
) -> Result<ExplanationGraph> {
    let cohort = d.filter_cohort(feature, level)?;
    if cohort.n_rows() < cfg.min_cohort.max(1) {
        return Err(Error::Cohort(format!(
            "cohort {feature}={level} has {} rows; at least {} required",
            cohort.n_rows(),
            cfg.min_cohort.max(1)
        )));
    }
    let mut g = explain(m, &cohort, cfg)?;
    g.cohort = Some((feature.to_string(), level.to_string()));
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnModel;
    use crate::schema::{FeatureSchema, FeatureSpec};
    use std::sync::Arc;

    fn data(n: usize) -> Dataset {
        let schema = FeatureSchema::new(
            vec![
                FeatureSpec::ordinal("a", Some(Group::A), ["1", "2", "3"]),
                FeatureSpec::ordinal("b", Some(Group::C), ["1", "2", "3"]),
                FeatureSpec::nominal("k", None, ["x", "y"]),
            ],
            FeatureSpec::nominal("t", None, ["no", "yes"]),
            "yes",
        )
        .unwrap();
        let mut values = Vec::new();
        let mut target = Vec::new();
        for i in 0..n {
            values.extend([(i % 3) as f64, (i / 3 % 3) as f64, 0.0]);
            target.push(u8::from(i % 3 == 2));
        }
        Dataset::new(Arc::new(schema), values, target).unwrap()
    }

    fn cfg() -> PgmConfig {
        PgmConfig { samples: 400, runs: 3, seed: 5, ..PgmConfig::default() }
    }

    #[test]
    fn empty_mask_is_identity() {
        let d = data(9);
        let marg = Marginals::fit(&d).unwrap();
        let rec = d.row(4).to_vec();
        assert_eq!(perturb_record(&rec, &[false; 3], &marg, &mut rng::stream(0, &[])), rec);
    }

    #[test]
    fn perturbed_cells_are_observed_values() {
        let d = data(30);
        let marg = Marginals::fit(&d).unwrap();
        let mut rng = rng::stream(1, &[]);
        for _ in 0..100 {
            let out = perturb_record(d.row(0), &[true; 3], &marg, &mut rng);
            for (f, v) in out.iter().enumerate() {
                assert!((0..d.n_rows()).any(|i| d.value(i, f) == *v));
            }
        }
        assert_eq!(marg.constant_features(), vec![2]);
    }

    #[test]
    fn signal_node_is_found() {
        let d = data(90);
        let m = FnModel::new(3, |x: &[f64]| if x[0] >= 2.0 { 0.9 } else { 0.1 });
        let g = explain(&m, &d, &cfg()).unwrap();
        assert!(g.nodes[0].selected && g.nodes[0].weight > 0.3);
        // The constant feature never changes a record, so only chance remains.
        assert!(g.nodes[2].weight < 0.15 && !g.nodes[2].selected);
        assert_eq!(g.warnings.len(), 1);
    }

    #[test]
    fn groups_mode_omits_empty_groups() {
        let d = data(9);
        let nodes = group_nodes(d.schema()).unwrap();
        let names: Vec<&str> = nodes.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["A", "C"]);
    }

    #[test]
    fn config_validation() {
        for bad in [
            PgmConfig { perturb_prob: 0.0, ..cfg() },
            PgmConfig { perturb_prob: 1.0, ..cfg() },
            PgmConfig { samples: 99, ..cfg() },
            PgmConfig { runs: 0, ..cfg() },
            PgmConfig { change: ChangeRule::Delta { tau: 0.0 }, ..cfg() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn small_cohort_is_rejected() {
        let d = data(9);
        let m = FnModel::new(3, |_: &[f64]| 0.5);
        let err = cohort_explain(&m, &d, "a", "1", &cfg()).unwrap_err();
        assert!(matches!(&err, Error::Cohort(msg) if msg.contains("3 rows")), "{err}");
    }
}
