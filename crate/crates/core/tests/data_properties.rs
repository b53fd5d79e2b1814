use std::sync::Arc;

use proptest::prelude::*;
use tabxai::{Dataset, EncoderMode, FeatureKind, FeatureSchema, FeatureSpec, FittedEncoder, Group};

fn arb_feature(i: usize) -> impl Strategy<Value = FeatureSpec> {
    let group = prop_oneof![Just(None), Just(Some(Group::A)), Just(Some(Group::B)), Just(Some(Group::C)), Just(Some(Group::D))];
    (0..3u8, 2..6usize, group).prop_map(move |(kind, k, group)| {
        let name = format!("item {i}");
        let levels: Vec<String> = (0..k).map(|l| format!("lvl{l}")).collect();
        match kind {
            0 => FeatureSpec::numeric(name, group),
            1 => FeatureSpec::ordinal(name, group, levels),
            _ => FeatureSpec::nominal(name, group, levels),
        }
    })
}

fn arb_schema() -> impl Strategy<Value = Arc<FeatureSchema>> {
    (1..7usize)
        .prop_flat_map(|p| (0..p).map(arb_feature).collect::<Vec<_>>())
        .prop_map(|features| {
            let target = FeatureSpec::nominal("decision", None, ["refuse", "accept"]);
            Arc::new(FeatureSchema::new(features, target, "accept").unwrap())
        })
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (arb_schema(), 0..40usize, any::<u64>()).prop_map(|(schema, n, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::new();
        for _ in 0..n {
            for f in schema.features() {
                values.push(match f.kind {
                    FeatureKind::Numeric => (rng.random_range(-500..500) as f64) / 4.0,
                    _ => rng.random_range(0..f.levels.len()) as f64,
                });
            }
        }
        let target = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        Dataset::new(schema, values, target).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schema_text_round_trips(schema in arb_schema()) {
        let text = schema.to_text();
        let back = FeatureSchema::parse(&text).unwrap();
        prop_assert_eq!(&back, schema.as_ref());
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn csv_round_trips(d in arb_dataset()) {
        let back = Dataset::read_csv(d.to_csv_string().as_bytes(), d.schema_arc().clone()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn cohorts_partition_rows(d in arb_dataset()) {
        for (f, spec) in d.schema().features().iter().enumerate().filter(|(_, s)| s.kind.is_categorical()) {
            let mut total = 0;
            for (l, level) in spec.levels.iter().enumerate() {
                let c = d.filter_cohort(&spec.name, level).unwrap();
                prop_assert!((0..c.n_rows()).all(|i| c.value(i, f) == l as f64));
                total += c.n_rows();
            }
            prop_assert_eq!(total, d.n_rows());
        }
    }

    #[test]
    fn stratified_split_is_a_partition(d in arb_dataset(), frac in 0.1f64..0.9, seed in any::<u64>()) {
        let (neg, pos) = d.class_counts();
        match d.split_indices(frac, seed) {
            Err(_) => prop_assert!(neg < 2 || pos < 2),
            Ok((train, test)) => {
                let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..d.n_rows()).collect::<Vec<_>>());
                for class in [0u8, 1] {
                    let count = d.target().iter().filter(|&&y| y == class).count() as f64;
                    let in_test = test.iter().filter(|&&i| d.target()[i] == class).count() as f64;
                    prop_assert!((in_test - frac * count).abs() <= 1.0, "class {} {} of {}", class, in_test, count);
                }
            }
        }
    }

    #[test]
    fn encoded_matrix_invariants(d in arb_dataset()) {
        let schema = d.schema();
        let numeric = schema.features().iter().filter(|f| f.kind == FeatureKind::Numeric).count();
        let ordinal = schema.features().iter().filter(|f| f.kind == FeatureKind::Ordinal).count();
        let nominal_cols: usize = schema.features().iter().filter(|f| f.kind == FeatureKind::Nominal).map(|f| f.levels.len()).sum();
        let e = FittedEncoder::fit(d.schema_arc().clone(), EncoderMode::Hybrid);
        prop_assert_eq!(e.width(), numeric + ordinal + nominal_cols);
        let x = e.transform(&d).unwrap();
        prop_assert_eq!(x.rows(), d.n_rows());
        prop_assert!(x.values().iter().all(|v| v.is_finite()));
        // Every column decodes and the decoded names cover the schema.
        let mut names: Vec<&str> = (0..e.width()).map(|c| e.decode_column(c).unwrap().0).collect();
        names.dedup();
        let expected: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
        prop_assert_eq!(names, expected);
        prop_assert!(e.decode_column(e.width()).is_err());
    }
}
