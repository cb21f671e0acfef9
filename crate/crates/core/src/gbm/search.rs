//! Hyperparameter search scored by mean cross-validated accuracy.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cross_validate, GbmConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Sampling ranges: log-uniform learning rate, inclusive integer ranges for
/// stages and depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub learning_rate: (f64, f64),
    pub n_stages: (usize, usize),
    pub max_depth: (usize, usize),
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            learning_rate: (0.01, 0.3),
            n_stages: (50, 500),
            max_depth: (2, 6),
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.learning_rate;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::invalid("learning_rate range must be positive and ordered"));
        }
        if self.n_stages.0 < 1 || self.n_stages.1 < self.n_stages.0 {
            return Err(Error::invalid("n_stages range must be ordered and start at 1 or more"));
        }
        if self.max_depth.0 < 1 || self.max_depth.1 < self.max_depth.0 {
            return Err(Error::invalid("max_depth range must be ordered and start at 1 or more"));
        }
        Ok(())
    }

    fn sample(&self, base: &GbmConfig, rng: &mut ChaCha8Rng) -> GbmConfig {
        let (lo, hi) = self.learning_rate;
        let learning_rate = if hi > lo {
            libm::exp(rng.gen_range(libm::log(lo)..=libm::log(hi)))
        } else {
            lo
        };
        GbmConfig {
            learning_rate,
            n_stages: rng.gen_range(self.n_stages.0..=self.n_stages.1),
            max_depth: rng.gen_range(self.max_depth.0..=self.max_depth.1),
            ..*base
        }
    }
}

/// Explicit value lists, evaluated as a Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub learning_rate: Vec<f64>,
    pub n_stages: Vec<usize>,
    pub max_depth: Vec<usize>,
}

impl ParamGrid {
    /// A narrowed grid around `best`: learning rate ×{1/2, 1, 2}, stages
    /// ×{3/4, 1, 5/4} and depth ±1, all clipped to `space`.
    pub fn around(best: &GbmConfig, space: &SearchSpace) -> ParamGrid {
        let (lr_lo, lr_hi) = space.learning_rate;
        let mut learning_rate: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|m| (best.learning_rate * m).clamp(lr_lo, lr_hi))
            .collect();
        learning_rate.sort_by(f64::total_cmp);
        learning_rate.dedup();
        let s = best.n_stages;
        let mut n_stages: Vec<usize> = [s * 3 / 4, s, s * 5 / 4]
            .iter()
            .map(|v| (*v).clamp(space.n_stages.0, space.n_stages.1))
            .collect();
        n_stages.sort_unstable();
        n_stages.dedup();
        let d = best.max_depth;
        let mut max_depth: Vec<usize> = [d.saturating_sub(1), d, d + 1]
            .iter()
            .map(|v| (*v).clamp(space.max_depth.0, space.max_depth.1))
            .collect();
        max_depth.sort_unstable();
        max_depth.dedup();
        ParamGrid {
            learning_rate,
            n_stages,
            max_depth,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.learning_rate.is_empty() || self.n_stages.is_empty() || self.max_depth.is_empty()
    }

    fn configs(&self, base: &GbmConfig) -> Vec<GbmConfig> {
        let mut out = Vec::new();
        for &learning_rate in &self.learning_rate {
            for &n_stages in &self.n_stages {
                for &max_depth in &self.max_depth {
                    out.push(GbmConfig {
                        learning_rate,
                        n_stages,
                        max_depth,
                        ..*base
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial: usize,
    pub config: GbmConfig,
    pub mean_cv_accuracy: f64,
    pub std_cv_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: GbmConfig,
    pub best_score: f64,
    pub trials: Vec<Trial>,
}

fn evaluate(ds: &LabeledDataset, configs: Vec<GbmConfig>, folds: usize) -> Result<Vec<Trial>> {
    let indexed: Vec<(usize, GbmConfig)> = configs.into_iter().enumerate().collect();
    crate::par::map(&indexed, |(trial, config)| {
        let cv = cross_validate(ds, config, folds)?;
        Ok(Trial {
            trial: *trial,
            config: *config,
            mean_cv_accuracy: cv.mean,
            std_cv_accuracy: cv.std,
        })
    })
    .into_iter()
    .collect()
}

/// Draws `trials` configurations from `space` (other fields from `base`)
/// and keeps the first one with the highest mean CV accuracy.
pub fn random_search(
    ds: &LabeledDataset,
    base: &GbmConfig,
    space: &SearchSpace,
    trials: usize,
    folds: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if trials < 1 {
        return Err(Error::invalid("random search needs at least one trial"));
    }
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<GbmConfig> = (0..trials).map(|_| space.sample(base, &mut rng)).collect();
    let trials = evaluate(ds, configs, folds)?;
    let mut best = &trials[0];
    for t in &trials[1..] {
        if t.mean_cv_accuracy > best.mean_cv_accuracy {
            best = t;
        }
    }
    Ok(SearchOutcome {
        best: best.config,
        best_score: best.mean_cv_accuracy,
        trials,
    })
}

/// Exhaustive evaluation. Equal scores prefer fewer stages, then shallower
/// trees, then a larger learning rate.
pub fn grid_search(ds: &LabeledDataset, base: &GbmConfig, grid: &ParamGrid, folds: usize) -> Result<SearchOutcome> {
    if grid.is_empty() {
        return Err(Error::invalid("grid must hold at least one value per hyperparameter"));
    }
    let trials = evaluate(ds, grid.configs(base), folds)?;
    let better = |a: &Trial, b: &Trial| {
        if a.mean_cv_accuracy != b.mean_cv_accuracy {
            return a.mean_cv_accuracy > b.mean_cv_accuracy;
        }
        if a.config.n_stages != b.config.n_stages {
            return a.config.n_stages < b.config.n_stages;
        }
        if a.config.max_depth != b.config.max_depth {
            return a.config.max_depth < b.config.max_depth;
        }
        a.config.learning_rate > b.config.learning_rate
    };
    let mut best = &trials[0];
    for t in &trials[1..] {
        if better(t, best) {
            best = t;
        }
    }
    Ok(SearchOutcome {
        best: best.config,
        best_score: best.mean_cv_accuracy,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_around_is_clipped() {
        let best = GbmConfig {
            learning_rate: 0.2,
            n_stages: 480,
            max_depth: 6,
            ..GbmConfig::default()
        };
        let g = ParamGrid::around(&best, &SearchSpace::default());
        assert_eq!(g.learning_rate, alloc::vec![0.1, 0.2, 0.3]);
        assert_eq!(g.n_stages, alloc::vec![360, 480, 500]);
        assert_eq!(g.max_depth, alloc::vec![5, 6]);
    }

    #[test]
    fn sampled_configs_stay_in_space() {
        let space = SearchSpace::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = space.sample(&GbmConfig::default(), &mut rng);
            assert!(c.learning_rate >= 0.01 - 1e-15 && c.learning_rate <= 0.3 + 1e-15);
            assert!((50..=500).contains(&c.n_stages));
            assert!((2..=6).contains(&c.max_depth));
        }
    }
}
