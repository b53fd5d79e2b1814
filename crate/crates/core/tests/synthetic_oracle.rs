use std::sync::Arc;

use tabxai::synthetic::{self, GeneratorSpec};
use tabxai::{Dataset, FeatureKind, FeatureSchema, FeatureSpec};

/// P(accept) recomputed from first principles: uniform levels, parity
/// contrast for nominals, standardized uniform integers for numerics.
/// Only valid for specs without ethnicity-dependent weights.
fn oracle_probability(spec: &GeneratorSpec, row: &[f64]) -> f64 {
    assert!(spec.cohort_overrides.is_empty());
    let mut eta = spec.intercept;
    for (f, &w) in spec.coefficients.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let feat = spec.schema.feature(f);
        let k = feat.levels.len() as f64;
        let score = match feat.kind {
            FeatureKind::Ordinal => row[f] - (k - 1.0) / 2.0,
            FeatureKind::Nominal => {
                let even = (feat.levels.len() + 1) / 2;
                let mean = 0.5 * (even as f64 - (k - even as f64)) / k;
                let raw = if row[f] as usize % 2 == 0 { 0.5 } else { -0.5 };
                raw - mean
            }
            FeatureKind::Numeric => {
                let (lo, hi) = spec.numeric_ranges.get(&feat.name).copied().unwrap_or((0, 100));
                let width = (hi - lo + 1) as f64;
                let sd = ((width * width - 1.0) / 12.0).sqrt();
                (row[f] - (lo + hi) as f64 / 2.0) / sd
            }
        };
        eta += w * score;
    }
    spec.noise + (1.0 - 2.0 * spec.noise) / (1.0 + (-eta).exp())
}

fn fresh_rows(spec: &GeneratorSpec, n: usize) -> Dataset {
    let other = GeneratorSpec { bayes_samples: 10, ..spec.clone() }.with_seed(spec.seed ^ 0x5EED);
    synthetic::generate(&other, n).unwrap().0
}

#[test]
fn bayes_rate_matches_a_direct_monte_carlo_oracle() {
    for noise in [0.0, 0.1] {
        let spec = GeneratorSpec { noise, ..GeneratorSpec::default() }.with_seed(3);
        let (_, truth) = synthetic::generate(&spec, 10).unwrap();
        let rows = fresh_rows(&spec, 100_000);
        let oracle = (0..rows.n_rows())
            .map(|i| {
                let p = oracle_probability(&spec, rows.row(i));
                p.max(1.0 - p)
            })
            .sum::<f64>()
            / rows.n_rows() as f64;
        assert!((truth.bayes_rate.rate - oracle).abs() <= 0.01, "noise {noise}: {} vs {oracle}", truth.bayes_rate.rate);
        assert!((0.5..=1.0).contains(&truth.bayes_rate.rate));
    }
}

#[test]
fn labels_follow_the_oracle_probability() {
    let spec = GeneratorSpec { bayes_samples: 100, ..GeneratorSpec::default() }.with_seed(9);
    let (d, _) = synthetic::generate(&spec, 20_000).unwrap();
    let mut expected = 0.0;
    let mut var = 0.0;
    for i in 0..d.n_rows() {
        let p = oracle_probability(&spec, d.row(i));
        assert!((p - synthetic::accept_probability(&spec, d.row(i)).unwrap()).abs() < 1e-12);
        expected += p;
        var += p * (1.0 - p);
    }
    let observed = d.target().iter().map(|&y| y as f64).sum::<f64>();
    assert!((observed - expected).abs() <= 3.0 * var.sqrt(), "{observed} vs {expected}");
}

#[test]
fn zero_coefficients_give_fair_coin_labels() {
    let spec = GeneratorSpec { bayes_samples: 5000, ..GeneratorSpec::zero(synthetic::default_schema().into(), 4) };
    let (d, truth) = synthetic::generate(&spec, 10_000).unwrap();
    let rate = d.target().iter().map(|&y| y as f64).sum::<f64>() / 10_000.0;
    assert!((rate - 0.5).abs() <= 3.0 * (0.25f64 / 10_000.0).sqrt(), "{rate}");
    assert!(truth.causal_features.is_empty());
    assert_eq!(truth.bayes_rate.rate, 0.5);
}

#[test]
fn ethnic_mix_matches_census_fractions() {
    let spec = GeneratorSpec { bayes_samples: 100, ..GeneratorSpec::default() }.with_seed(2);
    let (d, _) = synthetic::generate(&spec, 10_000).unwrap();
    for (level, target) in [("Hispanic", 0.181), ("African American", 0.134), ("Asian", 0.059)] {
        let share = d.filter_cohort("Ethnicity", level).unwrap().n_rows() as f64 / 10_000.0;
        assert!((share - target).abs() <= 0.02, "{level}: {share}");
    }
}

#[test]
fn single_binary_feature_gives_sigmoid_two() {
    let schema = FeatureSchema::new(
        vec![FeatureSpec::nominal("x", None, ["a", "b"])],
        FeatureSpec::nominal("decision", None, ["refuse", "accept"]),
        "accept",
    )
    .unwrap();
    // Scores are +-0.5, so a weight of 4 puts the logit at +-2.
    let spec = GeneratorSpec { bayes_samples: 50_000, ..GeneratorSpec::zero(Arc::new(schema), 1) }
        .with_coefficient("x", 4.0)
        .unwrap();
    let rate = synthetic::bayes_rate(&spec).unwrap();
    let sigmoid_two = 1.0 / (1.0 + (-2.0f64).exp());
    assert!((sigmoid_two - 0.8808).abs() < 1e-4);
    assert!((rate.rate - sigmoid_two).abs() <= 3.0 * rate.stderr + 1e-12, "{rate:?}");
}

#[test]
fn bayes_rate_grows_with_a_coefficient() {
    for seed in 0..10 {
        let base = GeneratorSpec { bayes_samples: 20_000, ..GeneratorSpec::default() }.with_seed(seed);
        let w = base.coefficient("Vaccine Trust").unwrap();
        let stronger = base.clone().with_coefficient("Vaccine Trust", 2.0 * w).unwrap();
        let (a, b) = (synthetic::bayes_rate(&base).unwrap(), synthetic::bayes_rate(&stronger).unwrap());
        assert!(b.rate >= a.rate, "seed {seed}: {} -> {}", a.rate, b.rate);
    }
}

#[test]
fn output_is_valid_input() {
    let spec = GeneratorSpec { bayes_samples: 100, ..GeneratorSpec::default() }.with_seed(5);
    let (d, truth) = synthetic::generate(&spec, 200).unwrap();
    let back = Dataset::read_csv(d.to_csv_string().as_bytes(), d.schema_arc().clone()).unwrap();
    assert_eq!(back, d);
    let schema = FeatureSchema::parse(&d.schema().to_text()).unwrap();
    assert_eq!(&schema, d.schema());

    let json: serde_json::Value = serde_json::from_str(&truth.to_json()).unwrap();
    for key in ["causal_features", "coefficients", "bayes_rate", "cohort_rankings"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let causal: Vec<&str> = json["causal_features"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(causal.iter().all(|c| d.schema().feature_index(c).is_some()));
}
