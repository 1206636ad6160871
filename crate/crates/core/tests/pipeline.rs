//! Cross-module integration: generator -> CSV -> windows -> models.

use gustosonic_core::featurize::{featurize_dataset, FeatureSchema, WindowSpec};
use gustosonic_core::learn::{
    compute_metrics, cross_validate, randomized_search, train_baselines, train_forest,
    ForestParams, SearchSpace, TreeParams,
};
use gustosonic_core::sensor_data::{parse_csv, validate, write_csv};
use gustosonic_core::synthgen::{generate_dataset, GeneratorSpec};
use gustosonic_core::ActivityLabel;

/// Small but diverse corpus used across these tests: 3 participants,
/// 1 minute per activity, all five classes, 225 windows.
fn small_corpus() -> Vec<(gustosonic_core::featurize::FeatureVector, ActivityLabel)> {
    let spec = GeneratorSpec {
        participants: 3,
        minutes_per_activity: 1.0,
        ..GeneratorSpec::default()
    }
    .with_idle();
    let ds = generate_dataset(&spec).unwrap();
    featurize_dataset(&ds, &WindowSpec::default()).unwrap()
}

#[test]
fn default_generation_roundtrips_through_csv_at_full_scale() {
    let ds = generate_dataset(&GeneratorSpec::default()).unwrap();
    assert_eq!(ds.record_count(), 216_000);

    let text = write_csv(&ds);
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.record_count(), 216_000);

    let report = validate(&parsed);
    assert!(report.is_clean(), "{report:?}");
    // equal record counts across the four generated mouth activities
    let counts: Vec<usize> = report.class_counts.values().copied().collect();
    assert_eq!(counts.len(), 4);
    assert!(counts.iter().all(|&c| c == 54_000), "{counts:?}");
}

#[test]
fn forest_cross_validation_clears_fitness_bar() {
    let data = small_corpus();
    let report = cross_validate(&data, &ForestParams::default_for(44), 10, 42).unwrap();
    assert!(report.mean_f1 >= 0.9, "mean_f1 = {:.4}", report.mean_f1);
}

#[test]
fn trained_forest_fits_its_training_set() {
    let data = small_corpus();
    let model = train_forest(&data, &ForestParams::default_for(44), &FeatureSchema::standard())
        .unwrap();
    let pairs: Vec<_> = data
        .iter()
        .map(|(x, y)| (*y, model.predict(x).unwrap().0))
        .collect();
    let report = compute_metrics(&pairs).unwrap();
    assert!(report.macro_avg.f1 >= 0.99, "{:.4}", report.macro_avg.f1);
}

#[test]
fn baseline_comparison_table_is_sane() {
    let data = small_corpus();
    let table = train_baselines(&data, 10, 42).unwrap();
    assert_eq!(table.len(), 4);
    assert_eq!(table[0].model, "random_forest");
    for pair in table.windows(2) {
        assert!(pair[0].mean_f1 >= pair[1].mean_f1, "{table:?}");
    }
    for row in &table {
        assert!(row.mean_f1 >= 0.8, "{}: {:.4}", row.model, row.mean_f1);
    }
}

#[test]
fn search_beats_weak_floor_config() {
    let data = small_corpus();
    let seed = 17;
    let space = SearchSpace {
        n_trees: vec![1, 10, 25, 50, 100],
        max_depth: vec![Some(1), Some(4), Some(8), Some(12), Some(16), Some(20), None],
        min_samples_split: vec![2],
        max_features: vec![7],
        n_iters: 8,
    };
    let result = randomized_search(&data, &space, 10, seed).unwrap();
    assert_eq!(result.trials.len(), 8);

    let weak = ForestParams {
        n_trees: 1,
        tree: TreeParams {
            max_depth: Some(1),
            min_samples_split: 2,
            max_features: 7,
        },
        bootstrap: true,
        seed,
    };
    let weak_score = cross_validate(&data, &weak, 10, seed).unwrap().mean_f1;
    assert!(
        result.best_mean_f1 >= weak_score,
        "best {:.4} vs weak {:.4}",
        result.best_mean_f1,
        weak_score
    );
}
