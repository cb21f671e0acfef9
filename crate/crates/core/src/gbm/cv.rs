use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{GbmConfig, GbmModel};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::series::Direction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Folds whose training part held a single class and were scored with a
    /// majority-class stand-in.
    pub degenerate_folds: Vec<usize>,
}

/// Contiguous fold boundaries; the first `n % folds` folds are one larger.
pub(crate) fn fold_bounds(n: usize, folds: usize) -> Vec<core::ops::Range<usize>> {
    let base = n / folds;
    let extra = n % folds;
    let mut start = 0;
    (0..folds)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

fn majority(ds: &LabeledDataset) -> Direction {
    let counts = ds.class_counts();
    // Ties resolved toward 0, then -1, then +1.
    let mut best = Direction::Flat;
    for cand in [Direction::Down, Direction::Up] {
        if counts[cand.index()] > counts[best.index()] {
            best = cand;
        }
    }
    best
}

/// K-fold cross-validation over contiguous, unshuffled folds. Each fold is
/// held out once while the model trains on the remaining folds.
pub fn cross_validate(ds: &LabeledDataset, config: &GbmConfig, folds: usize) -> Result<CvResult> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if ds.len() < folds {
        return Err(Error::invalid("fewer samples than folds"));
    }
    config.validate()?;
    let bounds = fold_bounds(ds.len(), folds);
    let outcomes: Vec<Result<(f64, bool)>> = crate::par::map(&bounds, |hole| {
        let train = ds.without(hole.clone());
        let test = ds.slice(hole.clone());
        let single_class = train.class_counts().iter().filter(|c| **c > 0).count() < 2;
        let model = if single_class {
            GbmModel::constant(majority(&train), ds.width(), *config)
        } else {
            GbmModel::fit(&train, config)?
        };
        Ok((model.accuracy(&test)?, single_class))
    });

    let mut fold_accuracies = Vec::with_capacity(folds);
    let mut degenerate_folds = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        let (acc, degenerate) = o?;
        fold_accuracies.push(acc);
        if degenerate {
            degenerate_folds.push(k);
        }
    }
    let (mean, std) = mean_std(&fold_accuracies);
    Ok(CvResult {
        fold_accuracies,
        mean,
        std,
        degenerate_folds,
    })
}

/// Mean and population standard deviation.
pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}
