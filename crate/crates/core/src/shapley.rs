//! Interventional Shapley attribution over original features.
//!
//! The value of a coalition `S` is the mean model output over a background
//! set, where each background record takes the explained instance's values on
//! `S` and keeps its own values elsewhere. Whole features are masked, so a
//! one-hot block is always switched as a unit.
//!
//! Exact mode enumerates all `2^d` coalitions. Sampled mode averages marginal
//! contributions along random feature orderings, each paired with its
//! reverse.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::BlackBox;
use crate::{par, rng};

pub const DEFAULT_BACKGROUND: usize = 32;
pub const DEFAULT_MAX_WIDTH: usize = 15;

/// Raw background records, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    rows: Vec<f64>,
    width: usize,
}

impl Background {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() {
            return Err(Error::Config("background set is empty".into()));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Config("background rows differ in width".into()));
        }
        Ok(Background { rows: rows.concat(), width })
    }

    /// `size` rows drawn without replacement (all rows if the dataset is
    /// smaller), kept in dataset order.
    pub fn sample(d: &Dataset, size: usize, seed: u64) -> Result<Self> {
        if d.is_empty() || size == 0 {
            return Err(Error::Config("background set is empty".into()));
        }
        let mut idx: Vec<usize> = if size < d.n_rows() {
            rand::seq::index::sample(&mut rng::stream(seed, &[]), d.n_rows(), size).into_vec()
        } else {
            (0..d.n_rows()).collect()
        };
        idx.sort_unstable();
        let mut rows = Vec::with_capacity(idx.len() * d.n_features());
        for &i in &idx {
            rows.extend_from_slice(d.row(i));
        }
        Ok(Background { rows, width: d.n_features() })
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.width.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionVector {
    pub instance: usize,
    /// One value per original feature; positive pushes toward accept.
    pub phi: Vec<f64>,
    /// Mean background P(accept), i.e. the value of the empty coalition.
    pub base_value: f64,
    /// P(accept) on the instance itself.
    pub prediction: f64,
    /// Per-feature standard error (sampled mode only).
    pub stderr: Option<Vec<f64>>,
}

fn check_inputs<M: BlackBox + ?Sized>(m: &M, instance: &[f64], bg: &Background) -> Result<()> {
    if bg.is_empty() {
        return Err(Error::Config("background set is empty".into()));
    }
    let d = m.n_features();
    if instance.len() != d {
        return Err(Error::Shape { expected: d, actual: instance.len() });
    }
    if bg.width() != d {
        return Err(Error::Shape { expected: d, actual: bg.width() });
    }
    Ok(())
}

/// Mean prediction over `records` (row-major, background-sized). Offsets
/// from the first output are averaged so equal outputs give that output
/// bit for bit.
fn mean_prediction<M: BlackBox + ?Sized>(m: &M, records: &[f64], out: &mut [f64]) -> f64 {
    m.predict_batch(records, out);
    let first = out[0];
    first + out.iter().map(|x| x - first).sum::<f64>() / out.len() as f64
}

fn coalition_value<M: BlackBox + ?Sized>(m: &M, instance: &[f64], in_coalition: &[bool], bg: &Background) -> f64 {
    let mut records = bg.rows.clone();
    for rec in records.chunks_mut(bg.width) {
        for (f, &inside) in in_coalition.iter().enumerate() {
            if inside {
                rec[f] = instance[f];
            }
        }
    }
    let mut out = vec![0.0; bg.len()];
    mean_prediction(m, &records, &mut out)
}

/// `v(S)`: expected P(accept) with features in `subset` fixed to the instance.
pub fn value_function<M: BlackBox + ?Sized>(
    m: &M,
    instance: &[f64],
    subset: &[usize],
    bg: &Background,
) -> Result<f64> {
    check_inputs(m, instance, bg)?;
    let mut mask = vec![false; instance.len()];
    for &f in subset {
        *mask.get_mut(f).ok_or(Error::Index { index: f, width: instance.len() })? = true;
    }
    Ok(coalition_value(m, instance, &mask, bg))
}

/// Exact Shapley values by enumerating every coalition.
pub fn exact_shapley<M: BlackBox + ?Sized>(
    m: &M,
    instance: &[f64],
    bg: &Background,
    max_width: usize,
) -> Result<AttributionVector> {
    check_inputs(m, instance, bg)?;
    let d = instance.len();
    if d > max_width || d >= 31 {
        return Err(Error::Config(format!(
            "{d} features exceed the exact-mode limit of {max_width}; use sampled mode"
        )));
    }
    let n_sets = 1usize << d;
    let values: Vec<f64> = par::map_range(n_sets, |s| {
        let mask: Vec<bool> = (0..d).map(|f| s >> f & 1 == 1).collect();
        coalition_value(m, instance, &mask, bg)
    });

    // weight[s] = s! (d - s - 1)! / d! = 1 / (d * C(d - 1, s))
    let weights: Vec<f64> = (0..d)
        .map(|s| {
            let binom = (0..s).fold(1.0f64, |acc, j| acc * (d - 1 - j) as f64 / (j + 1) as f64);
            1.0 / (d as f64 * binom.round())
        })
        .collect();
    let phi: Vec<f64> = (0..d)
        .map(|i| {
            let bit = 1usize << i;
            (0..n_sets)
                .filter(|s| s & bit == 0)
                .map(|s| weights[s.count_ones() as usize] * (values[s | bit] - values[s]))
                .sum()
        })
        .collect();

    Ok(AttributionVector { instance: 0, phi, base_value: values[0], prediction: values[n_sets - 1], stderr: None })
}

/// Marginal contributions along one ordering, starting from the background.
fn walk<M: BlackBox + ?Sized>(
    m: &M,
    instance: &[f64],
    bg: &Background,
    order: &[usize],
    contrib: &mut [f64],
) -> (f64, f64) {
    let mut records = bg.rows.clone();
    let mut out = vec![0.0; bg.len()];
    let base = mean_prediction(m, &records, &mut out);
    let mut prev = base;
    for &f in order {
        for rec in records.chunks_mut(bg.width) {
            rec[f] = instance[f];
        }
        let v = mean_prediction(m, &records, &mut out);
        contrib[f] = v - prev;
        prev = v;
    }
    (base, prev)
}

/// Mean marginal contribution over the given orderings. With every ordering
/// of the features listed exactly once this is the exact Shapley value.
pub fn permutation_shapley<M: BlackBox + ?Sized>(
    m: &M,
    instance: &[f64],
    bg: &Background,
    orders: &[Vec<usize>],
) -> Result<AttributionVector> {
    check_inputs(m, instance, bg)?;
    let d = instance.len();
    if orders.is_empty() {
        return Err(Error::Config("no orderings given".into()));
    }
    for o in orders {
        let mut sorted = o.clone();
        sorted.sort_unstable();
        if sorted != (0..d).collect::<Vec<_>>() {
            return Err(Error::Config(format!("{o:?} is not a permutation of 0..{d}")));
        }
    }
    let walks = par::map_slice(orders, |o| {
        let mut c = vec![0.0; d];
        let ends = walk(m, instance, bg, o, &mut c);
        (c, ends)
    });
    let mut phi = vec![0.0; d];
    for (c, _) in &walks {
        for (p, x) in phi.iter_mut().zip(c) {
            *p += x;
        }
    }
    phi.iter_mut().for_each(|p| *p /= orders.len() as f64);
    let (base_value, prediction) = walks[0].1;
    Ok(AttributionVector { instance: 0, phi, base_value, prediction, stderr: None })
}

/// Antithetic permutation sampling: `permutations` random orderings, each
/// also walked in reverse. The estimate is the mean over pairs and the
/// standard error is the spread of pair means over `sqrt(permutations)`.
pub fn sampled_shapley<M: BlackBox + ?Sized>(
    m: &M,
    instance: &[f64],
    bg: &Background,
    permutations: usize,
    seed: u64,
) -> Result<AttributionVector> {
    check_inputs(m, instance, bg)?;
    if permutations < 2 {
        return Err(Error::Config(format!("need at least 2 permutations, got {permutations}")));
    }
    let d = instance.len();
    let pairs = par::map_range(permutations, |p| {
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(&mut rng::stream(seed, &[p as u64]));
        let mut fwd = vec![0.0; d];
        let mut rev = vec![0.0; d];
        let ends = walk(m, instance, bg, &order, &mut fwd);
        order.reverse();
        walk(m, instance, bg, &order, &mut rev);
        let pair: Vec<f64> = fwd.iter().zip(&rev).map(|(a, b)| 0.5 * (a + b)).collect();
        (pair, ends)
    });

    let n = permutations as f64;
    let mut phi = vec![0.0; d];
    for (pair, _) in &pairs {
        for (p, x) in phi.iter_mut().zip(pair) {
            *p += x;
        }
    }
    phi.iter_mut().for_each(|p| *p /= n);
    let mut var = vec![0.0; d];
    for (pair, _) in &pairs {
        for ((v, x), mean) in var.iter_mut().zip(pair).zip(&phi) {
            *v += (x - mean) * (x - mean);
        }
    }
    let stderr = var.iter().map(|v| (v / (n - 1.0)).sqrt() / n.sqrt()).collect();
    let (base_value, prediction) = pairs[0].1;
    Ok(AttributionVector { instance: 0, phi, base_value, prediction, stderr: Some(stderr) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShapMode {
    Exact { max_width: usize },
    Sampled { permutations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub feature: String,
    pub importance: f64,
}

/// Features ordered by mean |phi|, descending, ties by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRanking {
    pub entries: Vec<RankEntry>,
}

impl GlobalRanking {
    pub fn from_attributions(names: &[&str], attributions: &[AttributionVector]) -> Self {
        let n = attributions.len().max(1) as f64;
        let mut entries: Vec<RankEntry> = names
            .iter()
            .enumerate()
            .map(|(f, name)| RankEntry {
                feature: name.to_string(),
                importance: attributions.iter().map(|a| a.phi[f].abs()).sum::<f64>() / n,
            })
            .collect();
        entries.sort_by(|a, b| b.importance.total_cmp(&a.importance).then_with(|| a.feature.cmp(&b.feature)));
        GlobalRanking { entries }
    }

    pub fn top(&self, k: usize) -> &[RankEntry] {
        &self.entries[..k.min(self.entries.len())]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSummary {
    pub attributions: Vec<AttributionVector>,
    pub ranking: GlobalRanking,
    pub top_k: usize,
}

/// Attributes every row of `d` and ranks features by mean |phi|.
pub fn global_summary<M: BlackBox + ?Sized>(
    m: &M,
    d: &Dataset,
    bg: &Background,
    mode: ShapMode,
    top_k: usize,
    seed: u64,
) -> Result<GlobalSummary> {
    if d.is_empty() {
        return Err(Error::Dataset("cannot summarize an empty dataset".into()));
    }
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    let attributions = rows
        .iter()
        .map(|&i| {
            let instance = d.row(i);
            let mut a = match mode {
                ShapMode::Exact { max_width } => exact_shapley(m, instance, bg, max_width),
                ShapMode::Sampled { permutations } => {
                    sampled_shapley(m, instance, bg, permutations, rng::derive(seed, &[i as u64]))
                }
            }?;
            a.instance = i;
            Ok(a)
        })
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<&str> = d.schema().features().iter().map(|f| f.name.as_str()).collect();
    let ranking = GlobalRanking::from_attributions(&names, &attributions);
    Ok(GlobalSummary { attributions, ranking, top_k })
}

impl GlobalSummary {
    /// `instance,feature,phi,feature_value,base_value` rows for the top-k
    /// features of every instance, in ranking order.
    pub fn to_csv(&self, d: &Dataset) -> String {
        let schema = d.schema();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["instance", "feature", "phi", "feature_value", "base_value"]).expect("in-memory csv");
        for a in &self.attributions {
            for entry in self.ranking.top(self.top_k) {
                let f = schema.feature_index(&entry.feature).expect("ranked feature exists");
                w.write_record([
                    a.instance.to_string(),
                    entry.feature.clone(),
                    a.phi[f].to_string(),
                    schema.feature(f).format_value(d.value(a.instance, f)),
                    a.base_value.to_string(),
                ])
                .expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }

    /// Ordered array of `{feature, importance}` for the top-k features.
    pub fn ranking_json(&self) -> String {
        serde_json::to_string_pretty(self.ranking.top(self.top_k)).expect("ranking serializes")
    }
}
