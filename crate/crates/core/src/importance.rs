//! Permutation importance: the accuracy lost when one feature column is
//! shuffled and everything else is left intact.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureName, LabeledDataset};
use crate::error::{Error, Result};
use crate::gbm::GbmModel;

/// Where column permutations come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationSource {
    /// Independent ChaCha stream per feature, keyed by the seed.
    Seeded(u64),
    /// Leaves columns in place; every drop is then exactly zero.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: FeatureName,
    /// Column position in the dataset.
    pub column: usize,
    pub mean_drop: f64,
    pub std_drop: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub baseline_accuracy: f64,
    /// One entry per feature, sorted by `mean_drop` descending. Equal drops
    /// keep column order.
    pub entries: Vec<ImportanceEntry>,
}

impl ImportanceReport {
    pub fn top(&self, k: usize) -> &[ImportanceEntry] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// The same report restricted to features accepted by `keep`.
    pub fn filtered(&self, keep: impl Fn(&FeatureName) -> bool) -> ImportanceReport {
        ImportanceReport {
            baseline_accuracy: self.baseline_accuracy,
            entries: self.entries.iter().filter(|e| keep(&e.feature)).cloned().collect(),
        }
    }

    pub fn rank_of(&self, series: &str, lag: usize) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.feature.series == series && e.feature.lag == lag)
    }
}

fn accuracy_with_column(model: &GbmModel, test: &LabeledDataset, column: usize, values: &[f64]) -> f64 {
    let mut row = alloc::vec![0.0; test.width()];
    let mut hits = 0usize;
    for i in 0..test.len() {
        row.copy_from_slice(test.row(i));
        row[column] = values[i];
        if model.predict_row(&row) == test.y[i] {
            hits += 1;
        }
    }
    hits as f64 / test.len() as f64
}

pub fn permutation_importance(
    model: &GbmModel,
    test: &LabeledDataset,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    permutation_importance_with(model, test, repeats, PermutationSource::Seeded(seed))
}

pub fn permutation_importance_with(
    model: &GbmModel,
    test: &LabeledDataset,
    repeats: usize,
    source: PermutationSource,
) -> Result<ImportanceReport> {
    if repeats < 1 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    let baseline = model.accuracy(test)?;
    let used = model.used_features();
    let columns: Vec<usize> = (0..test.width()).collect();

    let drops: Vec<(f64, f64)> = crate::par::map(&columns, |&j| {
        // A column no split reads cannot change any prediction.
        if !used[j] {
            return (0.0, 0.0);
        }
        let mut values = test.column(j);
        let mut rng = match source {
            PermutationSource::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(j as u64);
                Some(rng)
            }
            PermutationSource::Identity => None,
        };
        let samples: Vec<f64> = (0..repeats)
            .map(|_| {
                if let Some(rng) = rng.as_mut() {
                    values.shuffle(rng);
                }
                baseline - accuracy_with_column(model, test, j, &values)
            })
            .collect();
        crate::gbm::mean_std(&samples)
    });

    let mut entries: Vec<ImportanceEntry> = drops
        .into_iter()
        .enumerate()
        .map(|(j, (mean_drop, std_drop))| ImportanceEntry {
            feature: test.feature_names[j].clone(),
            column: j,
            mean_drop,
            std_drop,
            repeats,
        })
        .collect();
    entries.sort_by(|a, b| b.mean_drop.total_cmp(&a.mean_drop));
    Ok(ImportanceReport {
        baseline_accuracy: baseline,
        entries,
    })
}
