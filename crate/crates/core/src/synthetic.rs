//! Synthetic survey populations with a known generative law.
//!
//! Features are drawn independently (ethnicity from a fixed mix, every other
//! categorical uniformly over its levels, numerics uniformly over an integer
//! range). The label follows a logistic law on per-feature scores:
//!
//! * ordinal: level index minus the mean index,
//! * nominal: +0.5 for even level indices, -0.5 for odd, centered,
//! * numeric: standardized value.
//!
//! `p = eps + (1 - 2 eps) * sigmoid(intercept + sum_f w_f * score_f)`, where
//! `eps` is a symmetric label-flip rate and `w_f` may be rescaled per group
//! for rows of a given ethnicity.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::schema::{FeatureKind, FeatureSchema, FeatureSpec, Group};
use crate::{par, rng};

const LIKERT: [&str; 5] = ["1", "2", "3", "4", "5"];
pub const ETHNICITY: &str = "Ethnicity";
const BAYES_STREAM: u64 = 0xBA7E5;

fn likert(name: &str, group: Group) -> FeatureSpec {
    FeatureSpec::ordinal(name, Some(group), LIKERT)
}

fn pad(features: &mut Vec<FeatureSpec>, group: Group, stem: &str, total: usize) {
    let have = features.iter().filter(|f| f.group == Some(group)).count();
    for i in have..total {
        features.push(likert(&format!("{stem} {:02}", i + 1), group));
    }
}

/// The 125-feature survey layout: named items first, then generated Likert
/// items so each group reaches its size (A 30, B 20, C 40, D 35).
pub fn default_schema() -> FeatureSchema {
    use Group::*;
    let mut f = vec![
        likert("Ethnic identity", A),
        likert("Religiosity", A),
        likert("Group affiliation", A),
        likert("Socioeconomic status", A),
        FeatureSpec::nominal("Political affiliation", Some(A), ["Democrat", "Republican", "Independent", "Other"]),
        likert("Cultural traditions", A),
        likert("Community ties", A),
        likert("Trust in government", A),
        FeatureSpec::nominal("Language at home", Some(A), ["English", "Spanish", "Chinese", "Other"]),
        FeatureSpec::nominal(ETHNICITY, Some(B), ["Hispanic", "African American", "Asian", "Other"]),
        FeatureSpec::nominal("Gender", Some(B), ["male", "female"]),
        FeatureSpec::numeric("Age", Some(B)),
        FeatureSpec::ordinal(
            "Education",
            Some(B),
            ["less than high school", "high school", "some college", "bachelor", "graduate"],
        ),
        FeatureSpec::ordinal("Income", Some(B), ["<25k", "25-50k", "50-75k", "75-100k", ">100k"]),
        FeatureSpec::nominal("Marital status", Some(B), ["single", "married", "divorced", "widowed"]),
        FeatureSpec::nominal("Employment status", Some(B), ["employed", "unemployed", "student", "retired"]),
        FeatureSpec::nominal("Region", Some(B), ["Northeast", "Midwest", "South", "West"]),
        FeatureSpec::ordinal("Household size", Some(B), LIKERT),
        FeatureSpec::nominal("Health insurance", Some(B), ["yes", "no"]),
        likert("Vaccine needs for healthy people", C),
        likert("Vaccine Trust", C),
        likert("Vaccine approval", C),
        likert("Vaccine side effects", C),
        likert("FDA trust", C),
        likert("CDC trust", C),
        likert("Fertility concerns", C),
        likert("Long-term effects", C),
        likert("Fear of COVID", C),
        likert("Conspiracy theory", D),
        likert("Social media posts", D),
        likert("Rumors", D),
        likert("Misinformation", D),
        likert("News consumption", D),
        likert("COVID information seeking", D),
    ];
    pad(&mut f, A, "Culture item", 30);
    pad(&mut f, B, "Demographic item", 20);
    pad(&mut f, C, "Vaccine item", 40);
    pad(&mut f, D, "Information item", 35);
    FeatureSchema::new(f, FeatureSpec::nominal("Vaccine decision", None, ["refuse", "accept"]), "accept")
        .expect("default schema is valid")
}

/// Survey variant dominated by unordered items: 24 six-level nominal
/// features and 8 Likert items, spread over the four groups.
pub fn nominal_heavy_schema() -> FeatureSchema {
    let levels = ["L1", "L2", "L3", "L4", "L5", "L6"];
    let mut f: Vec<FeatureSpec> = (0..24)
        .map(|i| FeatureSpec::nominal(format!("Nominal item {:02}", i + 1), Some(Group::ALL[i % 4]), levels))
        .collect();
    f.extend((0..8).map(|i| likert(&format!("Likert item {:02}", i + 1), Group::ALL[i % 4])));
    FeatureSchema::new(f, FeatureSpec::nominal("Vaccine decision", None, ["refuse", "accept"]), "accept")
        .expect("nominal-heavy schema is valid")
}

/// Default planted signal: ten causal items across groups A, C and D.
pub const DEFAULT_COEFFICIENTS: [(&str, f64); 10] = [
    ("Vaccine needs for healthy people", 0.5),
    ("Vaccine Trust", 0.5),
    ("Vaccine approval", -0.5),
    ("Vaccine side effects", -0.5),
    ("FDA trust", 0.5),
    ("Conspiracy theory", -0.5),
    ("Rumors", -0.5),
    ("Ethnic identity", 0.5),
    ("Religiosity", -0.5),
    ("Political affiliation", 1.4),
];

/// Ethnicity levels and their population fractions. Unlisted levels share
/// the remainder equally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EthnicMix {
    pub feature: String,
    pub fractions: Vec<(String, f64)>,
}

impl Default for EthnicMix {
    fn default() -> Self {
        EthnicMix {
            feature: ETHNICITY.into(),
            fractions: vec![("Hispanic".into(), 0.181), ("African American".into(), 0.134), ("Asian".into(), 0.059)],
        }
    }
}

/// Per-group coefficient multipliers applied to rows of one ethnicity.
/// Untagged features keep their base coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortOverride {
    pub level: String,
    /// Multipliers for groups A, B, C, D.
    pub multipliers: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub schema: Arc<FeatureSchema>,
    pub ethnic_mix: Option<EthnicMix>,
    /// Per input feature, in schema order.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub cohort_overrides: Vec<CohortOverride>,
    /// Symmetric label-flip rate in [0, 0.5).
    pub noise: f64,
    /// Inclusive integer range per numeric feature; unlisted ones use (0, 100).
    pub numeric_ranges: BTreeMap<String, (i64, i64)>,
    pub bayes_samples: usize,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        let mut spec = GeneratorSpec::zero(Arc::new(default_schema()), 0);
        spec.ethnic_mix = Some(EthnicMix::default());
        spec.numeric_ranges.insert("Age".into(), (18, 85));
        for (name, w) in DEFAULT_COEFFICIENTS {
            spec = spec.with_coefficient(name, w).expect("default causal features exist");
        }
        spec
    }
}

#[derive(Debug, Clone, Copy)]
enum Law {
    Uniform(usize),
    Weights(usize),
    Int(i64, i64),
}

impl GeneratorSpec {
    /// No signal, no ethnic mix, every feature uniform.
    pub fn zero(schema: Arc<FeatureSchema>, seed: u64) -> Self {
        let p = schema.n_features();
        GeneratorSpec {
            schema,
            ethnic_mix: None,
            coefficients: vec![0.0; p],
            intercept: 0.0,
            cohort_overrides: Vec::new(),
            noise: 0.0,
            numeric_ranges: BTreeMap::new(),
            bayes_samples: 100_000,
            seed,
        }
    }

    /// Six causal nominal items on [`nominal_heavy_schema`].
    pub fn nominal_heavy() -> Self {
        let mut spec = GeneratorSpec::zero(Arc::new(nominal_heavy_schema()), 0);
        for i in 0..6 {
            spec.coefficients[i * 4] = if i % 2 == 0 { 2.0 } else { -2.0 };
        }
        spec
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_coefficient(mut self, name: &str, w: f64) -> Result<Self> {
        let f = self
            .schema
            .feature_index(name)
            .ok_or_else(|| Error::Config(format!("unknown feature `{name}` in coefficients")))?;
        self.coefficients[f] = w;
        Ok(self)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.schema.feature_index(name).map(|f| self.coefficients[f])
    }

    /// Asian rows driven by group C, African American rows by group A and
    /// Hispanic rows by group D; other groups are damped to `damp` for
    /// those rows. Causal items are added so each planted group has signal.
    pub fn with_cohort_mechanisms(mut self, boost: f64, damp: f64) -> Result<Self> {
        for (name, w) in [
            ("Group affiliation", 0.5),
            ("Socioeconomic status", 0.5),
            ("Social media posts", -0.5),
            ("Misinformation", -0.5),
        ] {
            if self.coefficient(name) == Some(0.0) {
                self = self.with_coefficient(name, w)?;
            }
        }
        let planted = [("Asian", Group::C), ("African American", Group::A), ("Hispanic", Group::D)];
        for (level, g) in planted {
            let mut multipliers = [damp; 4];
            multipliers[g as usize] = boost;
            self.cohort_overrides.retain(|o| o.level != level);
            self.cohort_overrides.push(CohortOverride { level: level.into(), multipliers });
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.schema.n_features();
        if self.coefficients.len() != p {
            return Err(Error::Config(format!("{} coefficients for {p} features", self.coefficients.len())));
        }
        if self.coefficients.iter().chain([&self.intercept]).any(|w| !w.is_finite()) {
            return Err(Error::Config("coefficients must be finite".into()));
        }
        if !(0.0..0.5).contains(&self.noise) {
            return Err(Error::Config(format!("noise {} must lie in [0, 0.5)", self.noise)));
        }
        for (name, &(lo, hi)) in &self.numeric_ranges {
            match self.schema.feature_index(name) {
                Some(f) if self.schema.feature(f).kind == FeatureKind::Numeric && lo <= hi => {}
                _ => return Err(Error::Config(format!("invalid numeric range for `{name}`"))),
            }
        }
        if let Some(mix) = &self.ethnic_mix {
            let spec = self
                .schema
                .feature_index(&mix.feature)
                .map(|f| self.schema.feature(f))
                .filter(|s| s.kind == FeatureKind::Nominal)
                .ok_or_else(|| Error::Config(format!("ethnicity feature `{}` is not a nominal feature", mix.feature)))?;
            let mut total = 0.0;
            for (level, frac) in &mix.fractions {
                if spec.level_index(level).is_none() {
                    return Err(Error::Config(format!("unknown ethnicity level `{level}`")));
                }
                if frac.is_nan() || *frac < 0.0 {
                    return Err(Error::Config(format!("fraction for `{level}` is negative")));
                }
                total += frac;
            }
            if total > 1.0 + 1e-12 {
                return Err(Error::Config(format!("ethnic fractions sum to {total} > 1")));
            }
            if total < 1.0 - 1e-12 && mix.fractions.len() >= spec.levels.len() {
                return Err(Error::Config("ethnic fractions leave a remainder but no level to hold it".into()));
            }
        }
        for o in &self.cohort_overrides {
            let ok = self.ethnic_mix.as_ref().is_some_and(|mix| {
                let f = self.schema.feature_index(&mix.feature).expect("validated above");
                self.schema.feature(f).level_index(&o.level).is_some()
            });
            if !ok {
                return Err(Error::Config(format!("cohort override for unknown ethnicity level `{}`", o.level)));
            }
            if o.multipliers.iter().any(|m| !m.is_finite()) {
                return Err(Error::Config("cohort multipliers must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Estimated Bayes rate with its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesRate {
    pub rate: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub causal_features: Vec<String>,
    pub coefficients: BTreeMap<String, f64>,
    pub intercept: f64,
    pub noise: f64,
    pub bayes_rate: BayesRate,
    /// Groups ordered by planted strength, per ethnicity level; `*` holds
    /// the base mechanism.
    pub cohort_rankings: BTreeMap<String, Vec<String>>,
}

impl GroundTruth {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }
}

/// Precomputed sampling laws and score moments.
struct GenLaw {
    laws: Vec<Law>,
    mix_probs: Vec<f64>,
    score_mean: Vec<f64>,
    score_sd: Vec<f64>,
    ethnicity: Option<usize>,
    /// Effective coefficients per ethnicity level (index = level) or a single
    /// base row when no ethnicity is configured.
    weights: Vec<Vec<f64>>,
}

fn raw_score(spec: &FeatureSpec, value: f64) -> f64 {
    match spec.kind {
        FeatureKind::Ordinal => value,
        FeatureKind::Nominal => {
            if (value as usize).is_multiple_of(2) {
                0.5
            } else {
                -0.5
            }
        }
        FeatureKind::Numeric => value,
    }
}

impl GenLaw {
    fn new(spec: &GeneratorSpec) -> Self {
        let schema = &spec.schema;
        let ethnicity = spec.ethnic_mix.as_ref().and_then(|m| schema.feature_index(&m.feature));
        let mut mix_probs = Vec::new();
        if let (Some(f), Some(mix)) = (ethnicity, &spec.ethnic_mix) {
            let levels = &schema.feature(f).levels;
            let listed: f64 = mix.fractions.iter().map(|(_, p)| p).sum();
            let unlisted = levels.iter().filter(|l| !mix.fractions.iter().any(|(n, _)| n == *l)).count();
            mix_probs = levels
                .iter()
                .map(|l| match mix.fractions.iter().find(|(n, _)| n == l) {
                    Some((_, p)) => *p,
                    None => (1.0 - listed).max(0.0) / unlisted as f64,
                })
                .collect();
        }
        let laws: Vec<Law> = schema
            .features()
            .iter()
            .enumerate()
            .map(|(f, s)| match s.kind {
                _ if Some(f) == ethnicity => Law::Weights(s.levels.len()),
                FeatureKind::Numeric => {
                    let (lo, hi) = spec.numeric_ranges.get(&s.name).copied().unwrap_or((0, 100));
                    Law::Int(lo, hi)
                }
                _ => Law::Uniform(s.levels.len()),
            })
            .collect();

        let mut score_mean = Vec::with_capacity(laws.len());
        let mut score_sd = Vec::with_capacity(laws.len());
        for (f, law) in laws.iter().enumerate() {
            let support: Vec<(f64, f64)> = match *law {
                Law::Uniform(k) => (0..k).map(|i| (i as f64, 1.0 / k as f64)).collect(),
                Law::Weights(k) => (0..k).map(|i| (i as f64, mix_probs[i])).collect(),
                Law::Int(lo, hi) => {
                    let n = (hi - lo + 1) as f64;
                    (lo..=hi).map(|v| (v as f64, 1.0 / n)).collect()
                }
            };
            let s = schema.feature(f);
            let mean: f64 = support.iter().map(|&(v, p)| p * raw_score(s, v)).sum();
            let var: f64 = support.iter().map(|&(v, p)| p * (raw_score(s, v) - mean).powi(2)).sum();
            score_mean.push(mean);
            score_sd.push(var.sqrt());
        }

        let base: Vec<f64> = spec.coefficients.clone();
        let weights = match ethnicity {
            None => vec![base],
            Some(e) => schema
                .feature(e)
                .levels
                .iter()
                .map(|level| match spec.cohort_overrides.iter().find(|o| &o.level == level) {
                    None => base.clone(),
                    Some(o) => base
                        .iter()
                        .enumerate()
                        .map(|(f, w)| match schema.feature(f).group {
                            Some(g) => w * o.multipliers[g as usize],
                            None => *w,
                        })
                        .collect(),
                })
                .collect(),
        };
        GenLaw { laws, mix_probs, score_mean, score_sd, ethnicity, weights }
    }

    /// Standardized for numerics, centered otherwise.
    fn score(&self, schema: &FeatureSchema, f: usize, value: f64) -> f64 {
        let centered = raw_score(schema.feature(f), value) - self.score_mean[f];
        if schema.feature(f).kind == FeatureKind::Numeric {
            if self.score_sd[f] > 0.0 {
                centered / self.score_sd[f]
            } else {
                0.0
            }
        } else {
            centered
        }
    }

    fn sample_row(&self, rng: &mut impl Rng, out: &mut [f64]) {
        for (cell, law) in out.iter_mut().zip(&self.laws) {
            *cell = match *law {
                Law::Uniform(k) => rng.random_range(0..k) as f64,
                Law::Int(lo, hi) => rng.random_range(lo..=hi) as f64,
                Law::Weights(k) => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = k - 1;
                    for (i, p) in self.mix_probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    pick as f64
                }
            };
        }
    }

    fn probability(&self, spec: &GeneratorSpec, row: &[f64]) -> f64 {
        let w = match self.ethnicity {
            Some(e) => &self.weights[row[e] as usize],
            None => &self.weights[0],
        };
        let eta = spec.intercept
            + row
                .iter()
                .enumerate()
                .filter(|(f, _)| w[*f] != 0.0)
                .map(|(f, &v)| w[f] * self.score(&spec.schema, f, v))
                .sum::<f64>();
        spec.noise + (1.0 - 2.0 * spec.noise) / (1.0 + (-eta).exp())
    }
}

/// P(accept) of a raw record under the generative law.
pub fn accept_probability(spec: &GeneratorSpec, record: &[f64]) -> Result<f64> {
    spec.validate()?;
    if record.len() != spec.schema.n_features() {
        return Err(Error::Shape { expected: spec.schema.n_features(), actual: record.len() });
    }
    Ok(GenLaw::new(spec).probability(spec, record))
}

/// E[max(p, 1 - p)] over `spec.bayes_samples` fresh rows.
pub fn bayes_rate(spec: &GeneratorSpec) -> Result<BayesRate> {
    spec.validate()?;
    let m = spec.bayes_samples.max(2);
    let law = GenLaw::new(spec);
    let p = spec.schema.n_features();
    let seed = rng::derive(spec.seed, &[BAYES_STREAM]);
    let best: Vec<f64> = par::map_range(m, |i| {
        let mut row = vec![0.0; p];
        law.sample_row(&mut rng::stream(seed, &[i as u64]), &mut row);
        let q = law.probability(spec, &row);
        q.max(1.0 - q)
    });
    let n = m as f64;
    let rate = best.iter().sum::<f64>() / n;
    let var = best.iter().map(|b| (b - rate).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BayesRate { rate, stderr: (var / n).sqrt(), samples: m })
}

fn group_ranking(spec: &GeneratorSpec, law: &GenLaw, weights: &[f64]) -> Vec<String> {
    let mut strength = [0.0f64; 4];
    for (f, w) in weights.iter().enumerate() {
        if let Some(g) = spec.schema.feature(f).group {
            strength[g as usize] += w.abs() * law.score_sd[f];
        }
    }
    let mut groups = Group::ALL.to_vec();
    groups.sort_by(|a, b| strength[*b as usize].total_cmp(&strength[*a as usize]).then(a.cmp(b)));
    groups.iter().map(|g| g.as_str().to_string()).collect()
}

/// Draws `n` rows. Row `i` depends only on `(spec.seed, i)`.
pub fn generate(spec: &GeneratorSpec, n: usize) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let law = GenLaw::new(spec);
    let p = spec.schema.n_features();
    let rows = par::map_range(n, |i| {
        let mut rng = rng::stream(spec.seed, &[i as u64]);
        let mut row = vec![0.0; p];
        law.sample_row(&mut rng, &mut row);
        let q = law.probability(spec, &row);
        let label = u8::from(rng.random::<f64>() < q);
        (row, label)
    });
    let mut values = Vec::with_capacity(n * p);
    let mut target = Vec::with_capacity(n);
    for (row, label) in rows {
        values.extend(row);
        target.push(label);
    }
    let data = Dataset::new(spec.schema.clone(), values, target)?;

    let names = |f: usize| spec.schema.feature(f).name.clone();
    let causal: Vec<usize> = (0..p).filter(|&f| law.weights.iter().any(|w| w[f] != 0.0)).collect();
    let mut cohort_rankings = BTreeMap::new();
    cohort_rankings.insert("*".to_string(), group_ranking(spec, &law, &spec.coefficients));
    if let Some(e) = law.ethnicity {
        for (level, w) in spec.schema.feature(e).levels.iter().zip(&law.weights) {
            cohort_rankings.insert(level.clone(), group_ranking(spec, &law, w));
        }
    }
    let truth = GroundTruth {
        causal_features: causal.iter().map(|&f| names(f)).collect(),
        coefficients: causal.iter().map(|&f| (names(f), spec.coefficients[f])).collect(),
        intercept: spec.intercept,
        noise: spec.noise,
        bayes_rate: bayes_rate(spec)?,
        cohort_rankings,
    };
    Ok((data, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_shape() {
        let s = default_schema();
        assert_eq!(s.n_features(), 125);
        let sizes: Vec<usize> = Group::ALL.iter().map(|&g| s.group_members(g).len()).collect();
        assert_eq!(sizes, [30, 20, 40, 35]);
        for name in ["Vaccine needs for healthy people", "Vaccine Trust", "Conspiracy theory", "FDA trust"] {
            assert!(s.feature_index(name).is_some(), "{name}");
        }
        assert_eq!(s.positive_level(), "accept");
    }

    #[test]
    fn default_spec_has_ten_causal_features() {
        let spec = GeneratorSpec { bayes_samples: 1000, ..GeneratorSpec::default() };
        let (d, truth) = generate(&spec, 50).unwrap();
        assert_eq!(truth.causal_features.len(), 10);
        assert_eq!(d.n_rows(), 50);
        assert_eq!(truth.cohort_rankings["*"][0], "C");
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GeneratorSpec { bayes_samples: 100, ..GeneratorSpec::default() }.with_seed(3);
        let (a, _) = generate(&spec, 40).unwrap();
        let (b, _) = generate(&spec, 40).unwrap();
        let (c, _) = generate(&spec.clone().with_seed(4), 40).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values(), c.values());
        assert_eq!(a.schema(), c.schema());
    }

    #[test]
    fn prefix_stable_in_n() {
        let spec = GeneratorSpec { bayes_samples: 100, ..GeneratorSpec::default() };
        let (small, _) = generate(&spec, 10).unwrap();
        let (big, _) = generate(&spec, 30).unwrap();
        assert_eq!(small.values(), &big.values()[..small.values().len()]);
    }

    #[test]
    fn cohort_rankings_follow_overrides() {
        let spec = GeneratorSpec { bayes_samples: 100, ..GeneratorSpec::default() }
            .with_cohort_mechanisms(2.0, 0.25)
            .unwrap();
        let (_, truth) = generate(&spec, 10).unwrap();
        assert_eq!(truth.cohort_rankings["Asian"][0], "C");
        assert_eq!(truth.cohort_rankings["African American"][0], "A");
        assert_eq!(truth.cohort_rankings["Hispanic"][0], "D");
    }

    #[test]
    fn invalid_specs() {
        let base = GeneratorSpec::default();
        assert!(base.clone().with_coefficient("nope", 1.0).is_err());
        assert!(GeneratorSpec { noise: 0.5, ..base.clone() }.validate().is_err());
        let mut bad = base.clone();
        bad.ethnic_mix.as_mut().unwrap().fractions[0].1 = 0.9;
        assert!(bad.validate().is_err());
        assert!(generate(&base, 0).is_err());
    }
}
