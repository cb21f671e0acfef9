//! Min-max normalisation and ternary direction labels with a class-balancing
//! percentage threshold.

use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Direction, DirectionSeries, UniformSeries};

/// Floor on the denominator of a percentage change.
pub const PCT_EPSILON: f64 = 1e-9;

/// Affine map sending the fit-range minimum to 0 and maximum to 1. Values
/// outside the fit range may land outside [0, 1]. Gaps stay gaps.
pub fn minmax_normalize(series: &UniformSeries, fit_range: Range<usize>) -> Result<UniformSeries> {
    if fit_range.is_empty() || fit_range.end > series.len() {
        return Err(Error::invalid("fit range must be a non-empty range inside the series"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in series.values[fit_range].iter().flatten() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !(hi > lo) {
        return Err(Error::ConstantSeries);
    }
    let span = hi - lo;
    let values = series.values.iter().map(|v| v.map(|x| (x - lo) / span)).collect();
    UniformSeries::new(series.start, series.interval, values)
}

/// `(v_t − v_{t−1}) / max(|v_{t−1}|, ε)` for every consecutive pair.
pub fn pct_changes(values: &[f64]) -> Vec<f64> {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]) / libm::fabs(w[0]).max(PCT_EPSILON))
        .collect()
}

fn classify(change: f64, theta: f64) -> Direction {
    if change > theta {
        Direction::Up
    } else if change < -theta {
        Direction::Down
    } else {
        Direction::Flat
    }
}

/// Labels each move `+1` above `theta`, `-1` below `-theta`, `0` otherwise.
/// The series must be dense.
pub fn label_directions(series: &UniformSeries, theta: f64) -> Result<DirectionSeries> {
    if !(theta >= 0.0) {
        return Err(Error::invalid("threshold must be non-negative"));
    }
    let values = series.to_dense()?;
    let labels = pct_changes(&values).into_iter().map(|c| classify(c, theta)).collect();
    Ok(DirectionSeries {
        start: series.start + series.interval,
        interval: series.interval,
        labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub theta: f64,
    /// Counts in class order (-1, 0, +1).
    pub class_counts: [usize; 3],
    /// Largest class count minus smallest.
    pub imbalance: usize,
    /// Every move fell in one class (e.g. a constant series).
    pub degenerate: bool,
}

/// Picks the threshold that best equalises the three classes. Candidates are
/// the distinct absolute percentage changes; the smallest imbalance wins and
/// ties go to the smaller threshold.
pub fn fit_threshold(series: &UniformSeries) -> Result<ThresholdFit> {
    if series.len() < 3 {
        return Err(Error::invalid("threshold fit needs at least 3 observations"));
    }
    Ok(fit_threshold_values(&series.to_dense()?))
}

pub(crate) fn fit_threshold_values(values: &[f64]) -> ThresholdFit {
    let changes = pct_changes(values);
    let n = changes.len();
    let mut ups: Vec<f64> = changes.iter().copied().filter(|c| *c > 0.0).collect();
    let mut downs: Vec<f64> = changes.iter().filter(|c| **c < 0.0).map(|c| -c).collect();
    ups.sort_by(f64::total_cmp);
    downs.sort_by(f64::total_cmp);

    let mut candidates: Vec<f64> = changes.iter().map(|c| libm::fabs(*c)).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let counts_at = |theta: f64| {
        let up = ups.len() - ups.partition_point(|c| *c <= theta);
        let down = downs.len() - downs.partition_point(|c| *c <= theta);
        [down, n - up - down, up]
    };

    let mut best: Option<ThresholdFit> = None;
    for &theta in &candidates {
        let counts = counts_at(theta);
        let imbalance = counts.iter().max().unwrap() - counts.iter().min().unwrap();
        if best.map_or(true, |b| imbalance < b.imbalance) {
            best = Some(ThresholdFit {
                theta,
                class_counts: counts,
                imbalance,
                degenerate: false,
            });
        }
    }
    let mut fit = best.unwrap_or(ThresholdFit {
        theta: 0.0,
        class_counts: [0, n, 0],
        imbalance: n,
        degenerate: true,
    });
    fit.degenerate = fit.class_counts.iter().filter(|c| **c > 0).count() <= 1;
    fit
}

/// Labels produced from a level series together with the fitted threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    pub directions: DirectionSeries,
    pub fit: ThresholdFit,
    /// False when the fit range was constant and the raw levels were used.
    pub normalized: bool,
}

/// Min-max normalises a dense series with statistics from `fit_range`,
/// fits the threshold on the moves inside that range, and labels every move.
pub fn normalize_and_label(series: &UniformSeries, fit_range: Range<usize>) -> Result<Labeled> {
    if fit_range.len() < 3 || fit_range.end > series.len() {
        return Err(Error::invalid("fit range must hold at least 3 points inside the series"));
    }
    let (levels, normalized) = match minmax_normalize(series, fit_range.clone()) {
        Ok(n) => (n, true),
        Err(Error::ConstantSeries) => (series.clone(), false),
        Err(e) => return Err(e),
    };
    let values = levels.to_dense()?;
    let fit = fit_threshold_values(&values[fit_range]);
    Ok(Labeled {
        directions: label_directions(&levels, fit.theta)?,
        fit,
        normalized,
    })
}
