mod common;

use common::*;
use fearlab_core::dataset::{chrono_split, windowize, FeatureName, LabeledDataset};
use fearlab_core::gbm::{GbmConfig, GbmModel};
use fearlab_core::importance::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick() -> GbmConfig {
    GbmConfig {
        n_stages: 40,
        max_depth: 3,
        ..GbmConfig::default()
    }
}

fn planted_split(seed: u64) -> (LabeledDataset, LabeledDataset) {
    let ds = windowize(&planted_directions(1500, seed), "vxbt", 6, 1).unwrap();
    chrono_split(&ds, 0.8).unwrap()
}

/// Appends a constant column to every row.
fn with_constant(ds: &LabeledDataset) -> LabeledDataset {
    let w = ds.width();
    let mut names = ds.feature_names.clone();
    names.push(FeatureName { series: "flat".into(), lag: 0 });
    let x: Vec<f64> = (0..ds.len()).flat_map(|i| ds.row(i).iter().copied().chain([0.5])).collect();
    assert_eq!(x.len(), ds.len() * (w + 1));
    LabeledDataset::new(names, x, ds.y.clone(), ds.timestamps.clone()).unwrap()
}

#[test]
fn planted_feature_tops_the_report() {
    let (train, test) = planted_split(21);
    let model = GbmModel::fit(&train, &quick()).unwrap();
    let report = permutation_importance(&model, &test, 5, 3).unwrap();
    assert_eq!(report.rank_of("trends", 3), Some(0));
    assert_eq!(report.entries.len(), test.width());
    let top = &report.entries[0];
    assert!(top.mean_drop > 0.4, "{top:?}");
}

#[test]
fn constant_and_unused_columns_drop_exactly_zero() {
    let (train, test) = planted_split(5);
    let (train, test) = (with_constant(&train), with_constant(&test));
    let model = GbmModel::fit(&train, &quick()).unwrap();
    let report = permutation_importance(&model, &test, 4, 0).unwrap();
    let flat = report.entries.iter().find(|e| e.feature.series == "flat").unwrap();
    assert_eq!(flat.mean_drop, 0.0);
    assert_eq!(flat.std_drop, 0.0);
    let used = model.used_features();
    for e in &report.entries {
        if !used[e.column] {
            assert_eq!(e.mean_drop, 0.0);
        }
    }
}

#[test]
fn identity_permutation_reproduces_baseline() {
    let (train, test) = planted_split(8);
    let model = GbmModel::fit(&train, &quick()).unwrap();
    let report = permutation_importance_with(&model, &test, 3, PermutationSource::Identity).unwrap();
    assert_eq!(report.baseline_accuracy, model.accuracy(&test).unwrap());
    assert!(report.entries.iter().all(|e| e.mean_drop == 0.0));
    // Equal drops keep column order.
    let cols: Vec<usize> = report.entries.iter().map(|e| e.column).collect();
    assert_eq!(cols, (0..test.width()).collect::<Vec<_>>());
}

#[test]
fn same_seed_same_report() {
    let (train, test) = planted_split(2);
    let model = GbmModel::fit(&train, &quick()).unwrap();
    let a = permutation_importance(&model, &test, 3, 17).unwrap();
    let b = permutation_importance(&model, &test, 3, 17).unwrap();
    assert_eq!(a, b);
}

#[test]
fn duplicated_columns_mask_each_other() {
    // y copies a ternary signal present twice; a third column is noise.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let labels = random_labels(&mut rng, 900);
    let noise = random_labels(&mut rng, 900);
    let x: Vec<f64> = labels
        .iter()
        .zip(&noise)
        .flat_map(|(l, n)| [l.as_f64(), l.as_f64(), n.as_f64()])
        .collect();
    let names = ["a", "b", "noise"]
        .iter()
        .map(|s| FeatureName { series: s.to_string(), lag: 0 })
        .collect();
    let ds = LabeledDataset::new(names, x, labels, (0..900).collect()).unwrap();
    let (train, test) = chrono_split(&ds, 0.5).unwrap();
    let model = GbmModel::fit(&train, &quick()).unwrap();

    let repeats = 30;
    let report = permutation_importance(&model, &test, repeats, 1).unwrap();
    let baseline = model.accuracy(&test).unwrap();
    let mut joint = 0.0;
    let mut perm: Vec<usize> = (0..test.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..repeats {
        perm.shuffle(&mut rng);
        let hits = (0..test.len())
            .filter(|&i| {
                let mut row = test.row(i).to_vec();
                row[0] = test.row(perm[i])[0];
                row[1] = test.row(perm[i])[1];
                model.predict_row(&row) == test.y[i]
            })
            .count();
        joint += baseline - hits as f64 / test.len() as f64;
    }
    joint /= repeats as f64;
    assert!(joint > 0.5);
    for name in ["a", "b"] {
        let e = report.entries.iter().find(|e| e.feature.series == name).unwrap();
        assert!(e.mean_drop <= joint + 0.03, "{name}: {} vs joint {joint}", e.mean_drop);
    }
}

#[test]
fn non_financial_filter_keeps_order() {
    let (train, test) = planted_split(21);
    let model = GbmModel::fit(&train, &quick()).unwrap();
    let report = permutation_importance(&model, &test, 2, 3).unwrap();
    let alt = report.filtered(|f| matches!(f.series.as_str(), "volume" | "sentiment" | "trends"));
    assert_eq!(alt.entries.len(), 3 * 6);
    assert_eq!(alt.rank_of("trends", 3), Some(0));
    for w in alt.entries.windows(2) {
        assert!(w[0].mean_drop >= w[1].mean_drop);
    }
}
