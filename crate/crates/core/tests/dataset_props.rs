use std::collections::BTreeSet;

use fedlearn_edu::dataset::synthetic::{
    student_dropout_table, student_performance_table, STUDENT_DROPOUT_ROWS, STUDENT_PERFORMANCE_ROWS,
};
use fedlearn_edu::dataset::{
    binarize_grade_target, encode, encode_rows, fit_encoding_stats, partition_clients, plan_clients,
    stratified_split_indices, target_labels, ColumnKind, ColumnStats, FeatureSchema,
};
use fedlearn_edu::Error;
use proptest::prelude::*;

fn labels_strategy() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2usize..=4).prop_flat_map(|k| (proptest::collection::vec(0..k, 1..300), Just(k)))
}

fn class_count(labels: &[usize], rows: &[usize], c: usize) -> usize {
    rows.iter().filter(|&&r| labels[r] == c).count()
}

proptest! {
    #[test]
    fn client_partition_is_exhaustive_balanced_and_stratified(
        (labels, k) in labels_strategy(),
        clients in 1usize..=6,
        seed in any::<u64>(),
    ) {
        prop_assume!(labels.len() >= clients);
        let sets = partition_clients(&labels, k, clients, seed).unwrap();
        prop_assert_eq!(sets.len(), clients);

        let mut all: Vec<usize> = sets.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());

        let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);

        for c in 0..k {
            let global = labels.iter().filter(|&&l| l == c).count() as f64 / clients as f64;
            for s in &sets {
                prop_assert!((class_count(&labels, s, c) as f64 - global).abs() <= 1.0);
            }
        }
        prop_assert_eq!(&sets, &partition_clients(&labels, k, clients, seed).unwrap());
    }

    #[test]
    fn stratified_split_follows_the_quota_rule(
        (labels, k) in labels_strategy(),
        f in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        prop_assume!((0..k).all(|c| labels.contains(&c)));
        match stratified_split_indices(&labels, k, f, seed) {
            Ok((train, test)) => {
                let n = labels.len();
                prop_assert_eq!(test.len(), (f * n as f64).round() as usize);
                let joined: BTreeSet<usize> = train.iter().chain(&test).copied().collect();
                prop_assert_eq!(joined.len(), n);
                for c in 0..k {
                    let size = labels.iter().filter(|&&l| l == c).count();
                    let t = class_count(&labels, &test, c);
                    let floor = (f * size as f64).floor() as usize;
                    prop_assert!(t == floor || t == floor + 1, "class {} size {} test {}", c, size, t);
                    prop_assert!(class_count(&labels, &train, c) >= 1);
                }
            }
            Err(Error::StratificationImpossible { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn client_plans_cover_every_row_once(
        (labels, k) in labels_strategy(),
        clients in 1usize..=4,
        seed in any::<u64>(),
    ) {
        prop_assume!(labels.len() >= 10 * clients);
        if let Ok(plan) = plan_clients(&labels, k, clients, 0.2, seed) {
            let mut all: Vec<usize> = plan.iter().flat_map(|c| c.train_rows.iter().chain(&c.test_rows)).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for c in &plan {
                let train: BTreeSet<_> = c.train_rows.iter().collect();
                prop_assert!(c.test_rows.iter().all(|r| !train.contains(r)));
            }
        }
    }
}

#[test]
fn documented_partition_and_split_examples() {
    let labels: Vec<usize> = (0..STUDENT_DROPOUT_ROWS).map(|i| i % 3).collect();
    let mut sizes: Vec<usize> = partition_clients(&labels, 3, 3, 1).unwrap().iter().map(Vec::len).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1474, 1475, 1475]);
    assert_eq!(partition_clients(&labels[..10], 3, 1, 1).unwrap(), vec![(0..10).collect::<Vec<_>>()]);
    let (_, test) = stratified_split_indices(&[0, 0, 0, 0, 0, 0, 1, 1, 1, 1], 2, 0.2, 3).unwrap();
    assert_eq!(test.len(), 2);
    assert_eq!(test.iter().filter(|&&i| i < 6).count(), 1);
    assert!(matches!(stratified_split_indices(&[0, 1], 2, 1.0, 0), Err(Error::InvalidFraction(_))));
}

/// Width from the schema plus a direct scan of distinct cell values.
fn scanned_width(raw: &fedlearn_edu::dataset::RawTable, schema: &FeatureSchema) -> usize {
    let mut width = 0;
    for (j, col) in schema.columns.iter().enumerate() {
        match col.kind {
            ColumnKind::Continuous => width += 1,
            ColumnKind::Categorical => {
                let distinct: BTreeSet<&str> = raw.rows.iter().map(|r| r[j].as_str()).collect();
                width += distinct.len();
            }
            ColumnKind::Target => {}
        }
    }
    width
}

#[test]
fn student_performance_width_matches_vocabulary_scan() {
    let schema = FeatureSchema::student_performance();
    let raw = binarize_grade_target(&student_performance_table(STUDENT_PERFORMANCE_ROWS, 3), "G3", 10).unwrap();
    let all: Vec<usize> = (0..raw.n_rows()).collect();
    let stats = fit_encoding_stats(&raw, &schema, &all).unwrap();
    assert_eq!(stats.width(), scanned_width(&raw, &schema));
    assert_eq!(stats.width(), 58);
    assert_eq!(schema.count(ColumnKind::Categorical), 17);
    assert_eq!(schema.count(ColumnKind::Continuous), 15);
}

#[test]
fn binarized_class_counts_match_a_grade_scan() {
    let schema = FeatureSchema::student_performance();
    let raw = student_performance_table(STUDENT_PERFORMANCE_ROWS, 4);
    let g3 = raw.column("G3").unwrap();
    let pass = raw.rows.iter().filter(|r| r[g3].parse::<i64>().unwrap() >= 10).count();
    let labels = target_labels(&binarize_grade_target(&raw, "G3", 10).unwrap(), &schema).unwrap();
    assert_eq!(labels.iter().filter(|&&l| l == 1).count(), pass);
    assert_eq!(labels.iter().filter(|&&l| l == 0).count(), raw.n_rows() - pass);
}

#[test]
fn student_dropout_encoding_round_trips() {
    let schema = FeatureSchema::student_dropout();
    let raw = student_dropout_table(STUDENT_DROPOUT_ROWS, 5);
    let all: Vec<usize> = (0..raw.n_rows()).collect();
    let stats = fit_encoding_stats(&raw, &schema, &all).unwrap();
    let data = encode(&raw, &schema, &stats).unwrap();
    assert_eq!(data.n_features(), 36);
    let target = schema.target_index();
    for (i, row) in raw.rows.iter().enumerate() {
        assert_eq!(schema.target_classes[data.labels[i]], row[target]);
    }
    let mut feature = 0;
    for (j, col) in schema.columns.iter().enumerate() {
        if col.kind == ColumnKind::Target {
            continue;
        }
        let ColumnStats::Continuous { mean, stddev, .. } = &stats.columns[feature] else {
            panic!("every predictor is continuous");
        };
        for (i, row) in raw.rows.iter().enumerate() {
            let original: f64 = row[j].parse().unwrap();
            let decoded = if *stddev == 0.0 { *mean } else { data.features[[i, feature]] * stddev + mean };
            assert!((decoded - original).abs() < 1e-9 * original.abs().max(1.0));
        }
        feature += 1;
    }
}

#[test]
fn test_rows_never_influence_encoding() {
    let schema = FeatureSchema::student_dropout();
    let raw = student_dropout_table(600, 6);
    let train: Vec<usize> = (0..480).collect();
    let test: Vec<usize> = (480..600).collect();
    let stats = fit_encoding_stats(&raw, &schema, &train).unwrap();
    let mut perturbed = raw.clone();
    for &r in &test {
        for cell in perturbed.rows[r].iter_mut().take(10) {
            *cell = "999".into();
        }
    }
    assert_eq!(fit_encoding_stats(&perturbed, &schema, &train).unwrap(), stats);
    assert_eq!(
        encode_rows(&perturbed, &schema, &stats, &train).unwrap(),
        encode_rows(&raw, &schema, &stats, &train).unwrap()
    );
}
