#![allow(dead_code)]

use std::sync::Arc;

use tabxai::learning::{ForestParams, MaxFeatures};
use tabxai::synthetic::{self, GeneratorSpec};
use tabxai::{Dataset, EncoderMode, FeatureSchema, ModelParams, Pipeline};

/// The first `d` features of the default survey schema.
pub fn narrow_schema(d: usize) -> Arc<FeatureSchema> {
    let full = synthetic::default_schema();
    Arc::new(FeatureSchema::new(full.features()[..d].to_vec(), full.target().clone(), full.positive_level()).unwrap())
}

/// Narrow population where every feature carries some signal.
pub fn narrow_spec(d: usize, seed: u64) -> GeneratorSpec {
    let mut spec = GeneratorSpec { bayes_samples: 2000, ..GeneratorSpec::zero(narrow_schema(d), seed) };
    for (f, w) in spec.coefficients.iter_mut().enumerate() {
        *w = if f % 2 == 0 { 0.8 } else { -0.6 };
    }
    spec
}

pub fn narrow_data(d: usize, n: usize, seed: u64) -> Dataset {
    synthetic::generate(&narrow_spec(d, seed), n).unwrap().0
}

pub fn survey(n: usize, seed: u64) -> Dataset {
    let spec = GeneratorSpec { bayes_samples: 1000, ..GeneratorSpec::default() }.with_seed(seed);
    synthetic::generate(&spec, n).unwrap().0
}

pub fn small_forest(n_trees: usize) -> ModelParams {
    ModelParams::Forest(ForestParams { n_trees, max_depth: 8, min_leaf: 2, bootstrap: true, max_features: MaxFeatures::Sqrt })
}

pub fn train(d: &Dataset, params: &ModelParams, seed: u64) -> Pipeline {
    Pipeline::train(d, EncoderMode::Hybrid, params, seed).unwrap()
}

/// Copy of `d` with feature `f` pinned to level 0.
pub fn pin_feature(d: &Dataset, f: usize) -> Dataset {
    let p = d.n_features();
    let mut values = d.values().to_vec();
    for row in values.chunks_mut(p) {
        row[f] = 0.0;
    }
    Dataset::new(d.schema_arc().clone(), values, d.target().to_vec()).unwrap()
}

/// All permutations of `0..d`, lexicographic.
pub fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}
