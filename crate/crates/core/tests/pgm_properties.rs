mod common;

use tabxai::model::FnModel;
use tabxai::pgm::{self, ChangeRule, NodeKind, PgmConfig, PgmMode, PgmNode};
use tabxai::synthetic::{self, EthnicMix, GeneratorSpec};
use tabxai::{par, Dataset, Pipeline};

use common::*;

fn cfg(samples: usize, runs: usize, seed: u64) -> PgmConfig {
    PgmConfig { samples, runs, seed, ..PgmConfig::default() }
}

#[test]
fn vanishing_perturbation_changes_nothing() {
    let d = narrow_data(6, 300, 1);
    let model = train(&d, &small_forest(20), 0);
    let c = PgmConfig { perturb_prob: 1e-9, ..cfg(1000, 3, 4) };
    let nodes = pgm::feature_nodes(d.schema());
    let t = pgm::generate_realizations(&model, &d, &nodes, &c, 0).unwrap();
    for s in 0..t.samples() {
        assert!(!t.changed(s));
        assert!((0..nodes.len()).all(|k| !t.perturbed(s, k)));
    }
    let g = pgm::explain(&model, &d, &c).unwrap();
    assert!(g.nodes.iter().all(|n| n.weight == 0.0 && n.p_value == 1.0 && !n.selected));
}

#[test]
fn constant_model_never_changes() {
    let d = narrow_data(6, 300, 2);
    let m = FnModel::new(6, |_: &[f64]| 0.7);
    for seed in 0..5 {
        let c = PgmConfig { perturb_prob: 0.5, ..cfg(500, 2, seed) };
        let t = pgm::generate_realizations(&m, &d, &pgm::feature_nodes(d.schema()), &c, 0).unwrap();
        assert!((0..t.samples()).all(|s| !t.changed(s)));
        let g = pgm::explain(&m, &d, &c).unwrap();
        assert!(g.nodes.iter().all(|n| n.p_value == 1.0 && n.weight == 0.0 && !n.selected));
    }
}

#[test]
fn perturbation_rates_are_binomial() {
    let d = survey(200, 3);
    let m = FnModel::new(125, |r: &[f64]| r[0] / 4.0);
    let c = cfg(2000, 1, 6);
    let v = c.perturb_prob;
    let bound = 3.0 * (v * (1.0 - v) / c.samples as f64).sqrt();
    for mode in [PgmMode::Features, PgmMode::Groups] {
        let nodes = pgm::nodes_for(d.schema(), mode).unwrap();
        let t = pgm::generate_realizations(&m, &d, &nodes, &c, 0).unwrap();
        for k in 0..nodes.len() {
            let rate = (0..t.samples()).filter(|&s| t.perturbed(s, k)).count() as f64 / t.samples() as f64;
            assert!((rate - v).abs() <= bound, "{} rate {rate}", nodes[k].name);
        }
    }
}

#[test]
fn runs_average_single_run_statistics() {
    let d = narrow_data(6, 400, 4);
    let model = train(&d, &small_forest(20), 1);
    let c = cfg(600, 5, 9);
    let nodes = pgm::feature_nodes(d.schema());
    let g = pgm::explain(&model, &d, &c).unwrap();
    let per_run: Vec<_> = (0..5).map(|r| pgm::run_stats(&model, &d, &nodes, &c, r).unwrap()).collect();
    for (k, node) in g.nodes.iter().enumerate() {
        let w = per_run.iter().map(|s| s[k].phi).sum::<f64>() / 5.0;
        let p = per_run.iter().map(|s| s[k].p_value).sum::<f64>() / 5.0;
        assert!((node.weight - w).abs() < 1e-12);
        assert!((node.p_value - p).abs() < 1e-12);
        assert_eq!(node.selected, node.p_value < c.alpha);
        assert!((0.0..=1.0).contains(&node.weight));
    }
    // A single-run explanation is run 0.
    let one = pgm::explain(&model, &d, &PgmConfig { runs: 1, ..c }).unwrap();
    assert_eq!(one.nodes[2].run_weights[0], g.nodes[2].run_weights[0]);
}

#[test]
fn reordering_and_renaming_nodes_permutes_the_output() {
    let d = narrow_data(6, 400, 5);
    let model = train(&d, &small_forest(20), 2);
    let c = cfg(800, 2, 3);
    let nodes = vec![
        PgmNode::new("first pair", NodeKind::Group, vec![0, 1]),
        PgmNode::new("middle", NodeKind::Group, vec![2, 3]),
        PgmNode::new("last", NodeKind::Feature, vec![5]),
    ];
    let renamed: Vec<PgmNode> = nodes
        .iter()
        .rev()
        .enumerate()
        .map(|(i, n)| PgmNode::new(format!("node {i}"), n.kind, n.members.iter().rev().copied().collect()))
        .collect();
    let a = pgm::explain_nodes(&model, &d, &nodes, &c).unwrap();
    let b = pgm::explain_nodes(&model, &d, &renamed, &c).unwrap();
    for (x, y) in a.nodes.iter().zip(b.nodes.iter().rev()) {
        assert_eq!(x.run_weights, y.run_weights);
        assert_eq!(x.run_p_values, y.run_p_values);
        assert_eq!(x.members, y.members);
    }
}

#[test]
fn one_member_group_equals_feature_node() {
    let d = narrow_data(5, 300, 6);
    let model = train(&d, &small_forest(10), 2);
    let c = cfg(500, 1, 1);
    let mut nodes = pgm::feature_nodes(d.schema());
    let a = pgm::generate_realizations(&model, &d, &nodes, &c, 0).unwrap();
    nodes[3] = PgmNode::new("solo group", NodeKind::Group, vec![3]);
    let b = pgm::generate_realizations(&model, &d, &nodes, &c, 0).unwrap();
    for s in 0..a.samples() {
        assert_eq!(a.changed(s), b.changed(s));
        for k in 0..nodes.len() {
            assert_eq!(a.perturbed(s, k), b.perturbed(s, k));
        }
    }
}

#[test]
fn cohort_covering_everything_equals_full_explanation() {
    let mut spec = GeneratorSpec { bayes_samples: 500, ..GeneratorSpec::default() }.with_seed(8);
    spec.ethnic_mix = Some(EthnicMix { fractions: vec![("Hispanic".into(), 1.0)], ..EthnicMix::default() });
    let (d, _) = synthetic::generate(&spec, 300).unwrap();
    let model = train(&d, &small_forest(15), 0);
    let c = PgmConfig { mode: PgmMode::Groups, ..cfg(500, 2, 4) };
    let full = pgm::explain(&model, &d, &c).unwrap();
    let mut cohort = pgm::cohort_explain(&model, &d, "Ethnicity", "Hispanic", &c).unwrap();
    assert_eq!(cohort.cohort, Some(("Ethnicity".into(), "Hispanic".into())));
    cohort.cohort = None;
    assert_eq!(cohort, full);

    let tiny = d.select(&[0, 1, 2]);
    let err = pgm::cohort_explain(&model, &tiny, "Ethnicity", "Hispanic", &c).unwrap_err();
    assert!(err.to_string().contains("3 rows"), "{err}");
}

#[test]
fn groups_mode_has_four_nodes_on_the_survey() {
    let d = survey(200, 1);
    let m = FnModel::new(125, |r: &[f64]| r[60] / 4.0);
    let g = pgm::explain(&m, &d, &PgmConfig { mode: PgmMode::Groups, ..cfg(300, 1, 0) }).unwrap();
    let names: Vec<&str> = g.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, ["A", "B", "C", "D"]);
    let dot = g.to_dot();
    assert_eq!(dot.matches(" -> ").count(), 4);
    assert_eq!(dot.matches("shape=").count(), 5);
}

fn vaccine_driven_spec(seed: u64) -> GeneratorSpec {
    let mut spec = GeneratorSpec { bayes_samples: 500, ..GeneratorSpec::zero(synthetic::default_schema().into(), seed) };
    for (name, w) in [("Vaccine Trust", 0.8), ("FDA trust", 0.8), ("CDC trust", 0.8), ("Vaccine side effects", -0.8)] {
        spec = spec.with_coefficient(name, w).unwrap();
    }
    spec
}

/// Group C alone drives the label. Explaining the generative law itself,
/// C must be the heaviest node and the only one selected.
#[test]
fn planted_vaccine_group_is_recovered_from_the_law() {
    let seeds = 5;
    let mut hits = 0;
    for seed in 0..seeds {
        let spec = vaccine_driven_spec(seed);
        let (d, _) = synthetic::generate(&spec, 3000).unwrap();
        let law = FnModel::new(125, |r: &[f64]| synthetic::accept_probability(&spec, r).unwrap());
        let g = pgm::explain(&law, &d, &PgmConfig { mode: PgmMode::Groups, ..cfg(2000, 5, seed) }).unwrap();
        if g.ranked()[0].name == "C" && g.selected() == ["C"] {
            hits += 1;
        }
    }
    assert!(hits * 10 >= seeds * 9, "{hits}/{seeds}");
}

/// A fitted forest also reacts to noise features, so other groups may show
/// small but significant weights; C must still dominate.
#[test]
fn planted_vaccine_group_dominates_a_forest() {
    for seed in 0..3 {
        let (d, _) = synthetic::generate(&vaccine_driven_spec(seed), 3000).unwrap();
        let model = train(&d, &small_forest(60), seed);
        let g = pgm::explain(&model, &d, &PgmConfig { mode: PgmMode::Groups, ..cfg(2000, 5, seed) }).unwrap();
        let ranked = g.ranked();
        assert_eq!(ranked[0].name, "C");
        assert!(ranked[0].selected);
        assert!(ranked[0].weight > 3.0 * ranked[1].weight, "{} vs {}", ranked[0].weight, ranked[1].weight);
    }
}

/// Doubling a planted coefficient does not lower that feature's mean weight.
#[test]
fn stronger_signal_does_not_weaken_the_edge() {
    let target = 2;
    let mean_weight = |scale: f64| {
        (0..10u64)
            .map(|seed| {
                let mut spec = narrow_spec(8, seed);
                spec.coefficients[target] *= scale;
                let (d, _) = synthetic::generate(&spec, 1000).unwrap();
                let model = train(&d, &small_forest(30), seed);
                pgm::explain(&model, &d, &cfg(1000, 2, seed)).unwrap().nodes[target].weight
            })
            .sum::<f64>()
            / 10.0
    };
    let (base, doubled) = (mean_weight(1.0), mean_weight(2.0));
    assert!(doubled >= base, "{base} -> {doubled}");
}

#[test]
fn delta_rule_and_thread_cap() {
    let d = narrow_data(6, 300, 7);
    let model: Pipeline = train(&d, &small_forest(20), 3);
    let c = PgmConfig { change: ChangeRule::Delta { tau: 0.1 }, ..cfg(500, 3, 2) };
    let one = par::with_threads(1, || pgm::explain(&model, &d, &c).unwrap());
    let many = par::with_threads(4, || pgm::explain(&model, &d, &c).unwrap());
    assert_eq!(one.to_json(), many.to_json());
    assert_eq!(one.to_dot(), many.to_dot());
    assert!(one.nodes.iter().all(|n| (0.0..=1.0).contains(&n.weight)));
}

#[test]
fn json_weights_round_trip() {
    let d: Dataset = narrow_data(6, 300, 9);
    let model = train(&d, &small_forest(20), 3);
    let g = pgm::explain(&model, &d, &cfg(400, 2, 0)).unwrap();
    let back = pgm::ExplanationGraph::from_json(&g.to_json()).unwrap();
    for (a, b) in g.nodes.iter().zip(&back.nodes) {
        assert!((a.weight - b.weight).abs() <= 1e-12);
        assert!((a.p_value - b.p_value).abs() <= 1e-12);
    }
    assert_eq!(back, g);
}

