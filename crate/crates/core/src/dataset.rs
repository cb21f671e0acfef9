//! Lagged direction windows as a supervised dataset, and the chronological
//! train/test split.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Direction, DirectionSeries};
use crate::time::Timestamp;

/// Column identity: the direction of `series`, `lag` steps before the sample.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureName {
    pub series: String,
    pub lag: usize,
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_direction,t-{}", self.series, self.lag)
    }
}

impl FeatureName {
    /// Inverse of the `Display` form.
    pub fn parse(text: &str) -> Option<FeatureName> {
        let (series, lag) = text.rsplit_once("_direction,t-")?;
        Some(FeatureName {
            series: series.into(),
            lag: lag.parse().ok()?,
        })
    }
}

/// Row-major ternary feature matrix with one target per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub feature_names: Vec<FeatureName>,
    pub x: Vec<f64>,
    pub y: Vec<Direction>,
    pub timestamps: Vec<Timestamp>,
}

impl LabeledDataset {
    pub fn new(
        feature_names: Vec<FeatureName>,
        x: Vec<f64>,
        y: Vec<Direction>,
        timestamps: Vec<Timestamp>,
    ) -> Result<Self> {
        let width = feature_names.len();
        if x.len() != width * y.len() {
            return Err(Error::invalid("feature matrix size does not match rows x width"));
        }
        if timestamps.len() != y.len() {
            return Err(Error::invalid("one timestamp per sample required"));
        }
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sample timestamps must be strictly increasing"));
        }
        Ok(LabeledDataset {
            feature_names,
            x,
            y,
            timestamps,
        })
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.x[i * w..(i + 1) * w]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.x[i * self.width() + j]).collect()
    }

    pub fn feature_index(&self, series: &str, lag: usize) -> Option<usize> {
        self.feature_names
            .iter()
            .position(|f| f.series == series && f.lag == lag)
    }

    /// Rows `range` as a new dataset.
    pub fn slice(&self, range: core::ops::Range<usize>) -> LabeledDataset {
        let w = self.width();
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            x: self.x[range.start * w..range.end * w].to_vec(),
            y: self.y[range.clone()].to_vec(),
            timestamps: self.timestamps[range].to_vec(),
        }
    }

    /// Rows outside `hole`, in order.
    pub(crate) fn without(&self, hole: core::ops::Range<usize>) -> LabeledDataset {
        let w = self.width();
        let mut x = Vec::with_capacity(self.x.len());
        x.extend_from_slice(&self.x[..hole.start * w]);
        x.extend_from_slice(&self.x[hole.end * w..]);
        let mut y = self.y[..hole.start].to_vec();
        y.extend_from_slice(&self.y[hole.end..]);
        let mut timestamps = self.timestamps[..hole.start].to_vec();
        timestamps.extend_from_slice(&self.timestamps[hole.end..]);
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            x,
            y,
            timestamps,
        }
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for d in &self.y {
            c[d.index()] += 1;
        }
        c
    }
}

fn check_aligned(directions: &[(String, DirectionSeries)]) -> Result<usize> {
    let (first_name, first) = directions
        .first()
        .ok_or_else(|| Error::invalid("at least one direction series required"))?;
    for (name, s) in &directions[1..] {
        if s.start != first.start || s.interval != first.interval || s.len() != first.len() {
            return Err(Error::Misaligned(alloc::format!(
                "`{name}` does not share start/interval/length with `{first_name}`"
            )));
        }
    }
    Ok(first.len())
}

/// Builds one sample per instant `t`: the directions of every series at
/// `t, t-1, …, t-window+1` as features and the `target` direction at
/// `t + horizon` as the label. Columns are grouped by series, then lag.
pub fn windowize(
    directions: &[(String, DirectionSeries)],
    target: &str,
    window: usize,
    horizon: usize,
) -> Result<LabeledDataset> {
    windowize_from(directions, target, window, horizon, 0)
}

/// As [`windowize`], but the first sample is no earlier than `first_t`. With
/// `first_t = max_window - 1` datasets for different windows share their
/// targets exactly.
pub fn windowize_from(
    directions: &[(String, DirectionSeries)],
    target: &str,
    window: usize,
    horizon: usize,
    first_t: usize,
) -> Result<LabeledDataset> {
    if window < 1 || horizon < 1 {
        return Err(Error::invalid("window and horizon must be at least 1"));
    }
    let len = check_aligned(directions)?;
    if window + horizon >= len {
        return Err(Error::WindowTooLong {
            window,
            horizon,
            len,
        });
    }
    let target_series = &directions
        .iter()
        .find(|(n, _)| n == target)
        .ok_or_else(|| Error::UnknownSeries(target.into()))?
        .1;

    let feature_names: Vec<FeatureName> = directions
        .iter()
        .flat_map(|(name, _)| {
            (0..window).map(move |lag| FeatureName {
                series: name.clone(),
                lag,
            })
        })
        .collect();

    let start = (window - 1).max(first_t);
    let end = len - horizon; // exclusive
    if start >= end {
        return Err(Error::EmptyDataset);
    }
    let rows = end - start;
    let mut x = Vec::with_capacity(rows * feature_names.len());
    let mut y = Vec::with_capacity(rows);
    let mut timestamps = Vec::with_capacity(rows);
    for t in start..end {
        for (_, s) in directions {
            for lag in 0..window {
                x.push(s.labels[t - lag].as_f64());
            }
        }
        y.push(target_series.labels[t + horizon]);
        timestamps.push(target_series.timestamp(t));
    }
    LabeledDataset::new(feature_names, x, y, timestamps)
}

/// First `floor(train_fraction × n)` samples train, the rest test.
pub fn chrono_split(ds: &LabeledDataset, train_fraction: f64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie in (0, 1)"));
    }
    let cut = libm::floor(train_fraction * ds.len() as f64) as usize;
    if cut == 0 || cut == ds.len() {
        return Err(Error::EmptySplit {
            train: cut,
            test: ds.len() - cut,
        });
    }
    Ok((ds.slice(0..cut), ds.slice(cut..ds.len())))
}
