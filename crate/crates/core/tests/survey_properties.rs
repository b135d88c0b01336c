//! Binarization, sparse-target dropping and dataset invariants.

use lexisupport_core::survey::{binarize_value, ImputePolicy, SurveyError, DEFAULT_MAX_MISSING_RATE};
use lexisupport_core::synth::{generate, PlantSpec};
use lexisupport_core::{Dataset, FeatureCatalog, FeatureId, Likert, SurveyRecord};
use proptest::prelude::*;

fn full_record(id: usize, value: impl Fn(FeatureId) -> u8) -> SurveyRecord {
    let mut r = SurveyRecord::new(format!("s{id}"));
    for f in FeatureId::difficulties().chain(FeatureId::targets()) {
        r = r.with(f, value(f));
    }
    r
}

#[test]
fn binarization_boundary_table() {
    let mut cases = 0;
    for t in 0..=5u8 {
        for v in 0..=5u8 {
            let expected = if v > t { 1 } else { 0 };
            assert_eq!(binarize_value(v, t), expected, "v={v} t={t}");
            // same rule through a view, for targets and binarized inputs
            let ds = Dataset::new(FeatureCatalog::standard(), vec![full_record(0, |_| v)]).unwrap();
            let view = ds.binarize(t, true, ImputePolicy::DropRow).unwrap();
            assert!(view.x().as_slice().iter().all(|&x| x == f64::from(expected)));
            assert_eq!(view.labels(FeatureId::tool(7)).unwrap(), &[Some(expected)]);
            cases += 1;
        }
    }
    assert_eq!(cases, 36);
    assert_eq!(binarize_value(3, 1), 1);
    assert_eq!(binarize_value(4, 4), 0);
}

proptest! {
    #[test]
    fn raising_the_threshold_never_adds_positives(v in 0u8..=5, t in 0u8..5) {
        prop_assert!(binarize_value(v, t + 1) <= binarize_value(v, t));
        prop_assert_eq!(binarize_value(v, t) == 1, v >= t + 1);
        prop_assert_eq!(binarize_value(v, 5), 0);
    }

    #[test]
    fn dataset_round_trips(values in prop::collection::vec(prop::collection::vec(prop::option::weighted(0.9, 0u8..=5), 39), 1..8)) {
        let records: Vec<SurveyRecord> = values
            .iter()
            .enumerate()
            .map(|(i, targets)| {
                let mut r = full_record(i, |_| (i % 6) as u8);
                for (f, v) in FeatureId::targets().zip(targets) {
                    r.set(f, v.and_then(Likert::new));
                }
                r
            })
            .collect();
        let ds = Dataset::new(FeatureCatalog::standard(), records).unwrap();
        let json = serde_json::to_string(&ds).unwrap();
        let back: Dataset = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(back.fingerprint(), ds.fingerprint());
    }
}

/// Ten records; T4 missing in six of them.
fn ten_rows() -> Dataset {
    let records = (0..10)
        .map(|i| {
            let mut r = full_record(i, |f| ((f.number() + i) % 6) as u8);
            if i < 6 {
                r.set(FeatureId::tool(4), None);
            }
            r
        })
        .collect();
    Dataset::new(FeatureCatalog::standard(), records).unwrap()
}

#[test]
fn sparse_target_is_dropped_by_rate() {
    let ds = ten_rows();
    assert_eq!(ds.missing_rate(FeatureId::tool(4)), 0.6);
    assert_eq!(ds.active_targets().len(), 39);
    let dropped = ds.clone().drop_sparse_targets(0.5).unwrap();
    assert_eq!(dropped.active_targets().len(), 38);
    assert!(!dropped.is_active(FeatureId::tool(4)));
    assert_eq!(dropped.dropped_targets().get(&FeatureId::tool(4)), Some(&0.6));
    let ids = |d: &Dataset| d.records().iter().map(|r| r.student_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&dropped), ids(&ds));
    assert_eq!(ds.clone().drop_sparse_targets(0.7).unwrap().active_targets().len(), 39);
    assert_eq!(ds.clone().drop_sparse_targets(0.999).unwrap(), ds);
    assert!(matches!(ds.clone().drop_sparse_targets(1.0), Err(SurveyError::InvalidMissingRate(_))));
}

#[test]
fn dropping_every_target_is_an_error() {
    let records = (0..4)
        .map(|i| {
            let mut r = full_record(i, |_| 2);
            for f in FeatureId::targets() {
                r.set(f, None);
            }
            r
        })
        .collect();
    let ds = Dataset::new(FeatureCatalog::standard(), records).unwrap();
    assert!(matches!(ds.drop_sparse_targets(0.5), Err(SurveyError::AllTargetsDropped(_))));
}

#[test]
fn planted_t4_path_leaves_38_targets() {
    let (ds, _) = generate(&PlantSpec { seed: 2, ..PlantSpec::default() }).unwrap();
    assert_eq!(ds.active_targets().len(), 39);
    assert!((ds.missing_rate(FeatureId::tool(4)) - 0.6).abs() < 0.01);
    let ds = ds.drop_sparse_targets(DEFAULT_MAX_MISSING_RATE).unwrap();
    assert_eq!(ds.active_targets().len(), 38);
    assert_eq!(ds.dropped_targets().keys().copied().collect::<Vec<_>>(), [FeatureId::tool(4)]);
}

#[test]
fn class_balance_values() {
    let records = (0..4).map(|i| full_record(i, |f| if f == FeatureId::tool(1) { [5, 5, 0, 0][i] } else { 0 })).collect();
    let ds = Dataset::new(FeatureCatalog::standard(), records).unwrap();
    let view = ds.binarize(1, false, ImputePolicy::DropRow).unwrap();
    assert_eq!(view.class_balance(FeatureId::tool(1)).unwrap(), 0.5);
    assert_eq!(view.class_balance(FeatureId::tool(2)).unwrap(), 0.0);
    assert!(matches!(view.class_balance(FeatureId::difficulty(1)), Err(SurveyError::InactiveTarget(_))));

    let (ds, _) = generate(&PlantSpec { seed: 3, ..PlantSpec::default() }).unwrap();
    let view = ds.binarize(4, false, ImputePolicy::DropRow).unwrap();
    for t in ds.active_targets() {
        assert!(view.class_balance(t).unwrap() < 0.5, "{t}");
    }
}

#[test]
fn missing_difficulties_drop_or_impute() {
    let mut records: Vec<SurveyRecord> = (0..5).map(|i| full_record(i, |_| i as u8)).collect();
    records[1].set(FeatureId::difficulty(3), None);
    let ds = Dataset::new(FeatureCatalog::standard(), records).unwrap();
    let dropped = ds.binarize(1, false, ImputePolicy::DropRow).unwrap();
    assert_eq!(dropped.source_rows(), &[0, 2, 3, 4]);
    let filled = ds.binarize(1, false, ImputePolicy::Median).unwrap();
    assert_eq!(filled.source_rows().len(), 5);
    // median of 0, 2, 3, 4
    assert_eq!(filled.x().get(1, 2), 2.5);
}
