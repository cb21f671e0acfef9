//! Multiclass gradient boosting over the three direction classes.
//!
//! Scores start at the class log-priors. Each stage turns the current scores
//! into softmax probabilities, takes the negative gradient of the
//! cross-entropy (`onehot(y) - p`) as the residual, fits one regression tree
//! per class to it with Newton leaf values, and adds `learning_rate` times
//! the tree output to that class's score.

mod cv;
mod search;
pub mod tree;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::series::Direction;
use tree::{fit_tree, BinnedMatrix, Tree, TreeParams};

pub use cv::{cross_validate, CvResult};
pub(crate) use cv::mean_std;
pub use search::{grid_search, random_search, ParamGrid, SearchOutcome, SearchSpace, Trial};

pub const N_CLASSES: usize = 3;
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Probability assigned to a class never seen in training.
const PRIOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmConfig {
    pub learning_rate: f64,
    pub n_stages: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Row fraction drawn without replacement for each stage.
    pub subsample: f64,
    pub seed: u64,
    pub max_bins: usize,
}

impl Default for GbmConfig {
    fn default() -> Self {
        GbmConfig {
            learning_rate: 0.1,
            n_stages: 100,
            max_depth: 3,
            min_samples_leaf: 1,
            subsample: 1.0,
            seed: 0,
            max_bins: 255,
        }
    }
}

impl GbmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if self.n_stages < 1 {
            return Err(Error::invalid("n_stages must be at least 1"));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::invalid("subsample must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// A trained ensemble. `trees[stage * 3 + class]` with classes ordered
/// (-1, 0, +1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub format_version: u32,
    pub config: GbmConfig,
    pub n_features: usize,
    pub classes: [Direction; N_CLASSES],
    pub base_scores: [f64; N_CLASSES],
    pub trees: Vec<Tree>,
    /// Majority-class stand-in built when training data held one class.
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<Direction>,
    pub probabilities: Vec<[f64; N_CLASSES]>,
}

/// Mean training cross-entropy before the first stage and after each stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    pub losses: Vec<f64>,
}

pub fn softmax(scores: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; N_CLASSES];
    let mut z = 0.0;
    for k in 0..N_CLASSES {
        p[k] = libm::exp(scores[k] - m);
        z += p[k];
    }
    for v in &mut p {
        *v /= z;
    }
    p
}

/// `-log softmax(scores)[y]`.
pub fn cross_entropy(scores: &[f64; N_CLASSES], y: Direction) -> f64 {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + libm::log(scores.iter().map(|s| libm::exp(s - m)).sum::<f64>());
    lse - scores[y.index()]
}

/// `onehot(y) - softmax(scores)`, the residual each stage fits.
pub fn negative_gradient(scores: &[f64; N_CLASSES], y: Direction) -> [f64; N_CLASSES] {
    let mut g = softmax(scores);
    for v in &mut g {
        *v = -*v;
    }
    g[y.index()] += 1.0;
    g
}

/// Argmax with ties resolved toward 0, then -1, then +1.
fn pick_class(scores: &[f64; N_CLASSES]) -> Direction {
    let mut best = Direction::Flat;
    for cand in [Direction::Down, Direction::Up] {
        if scores[cand.index()] > scores[best.index()] {
            best = cand;
        }
    }
    best
}

fn log_priors(y: &[Direction]) -> [f64; N_CLASSES] {
    let mut counts = [0usize; N_CLASSES];
    for d in y {
        counts[d.index()] += 1;
    }
    let n = y.len() as f64;
    counts.map(|c| libm::log((c as f64 / n).max(PRIOR_FLOOR)))
}

fn check_features(ds: &LabeledDataset) -> Result<()> {
    if let Some(pos) = ds.x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / ds.width().max(1),
            col: pos % ds.width().max(1),
        });
    }
    Ok(())
}

impl GbmModel {
    /// Assembles a model from parts, checking tree count and split features.
    pub fn from_parts(
        config: GbmConfig,
        n_features: usize,
        base_scores: [f64; N_CLASSES],
        trees: Vec<Tree>,
    ) -> Result<GbmModel> {
        let model = GbmModel {
            format_version: MODEL_FORMAT_VERSION,
            config,
            n_features,
            classes: Direction::ALL,
            base_scores,
            trees,
            degenerate: false,
        };
        model.check()?;
        Ok(model)
    }

    /// Verifies the structural invariants, e.g. after deserialising.
    pub fn check(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(alloc::format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        if self.classes != Direction::ALL {
            return Err(Error::invalid("classes must be ordered (-1, 0, +1)"));
        }
        if !self.degenerate && self.trees.len() != self.config.n_stages * N_CLASSES {
            return Err(Error::invalid("tree count must equal n_stages x 3"));
        }
        if !self.trees.iter().all(|t| t.is_well_formed(self.n_features)) {
            return Err(Error::invalid("tree references a feature outside the model width"));
        }
        Ok(())
    }

    /// Class log-priors only, i.e. the state before the first stage.
    pub fn base_only(train: &LabeledDataset, config: GbmConfig) -> Result<GbmModel> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(GbmModel {
            format_version: MODEL_FORMAT_VERSION,
            config,
            n_features: train.width(),
            classes: Direction::ALL,
            base_scores: log_priors(&train.y),
            trees: Vec::new(),
            degenerate: true,
        })
    }

    /// Always predicts `class`.
    pub fn constant(class: Direction, n_features: usize, config: GbmConfig) -> GbmModel {
        let mut base_scores = [libm::log(PRIOR_FLOOR); N_CLASSES];
        base_scores[class.index()] = 0.0;
        GbmModel {
            format_version: MODEL_FORMAT_VERSION,
            config,
            n_features,
            classes: Direction::ALL,
            base_scores,
            trees: Vec::new(),
            degenerate: true,
        }
    }

    pub fn fit(train: &LabeledDataset, config: &GbmConfig) -> Result<GbmModel> {
        Self::fit_traced(train, config).map(|(m, _)| m)
    }

    pub fn fit_traced(train: &LabeledDataset, config: &GbmConfig) -> Result<(GbmModel, FitTrace)> {
        config.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if train.class_counts().iter().filter(|c| **c > 0).count() < 2 {
            return Err(Error::SingleClass);
        }
        check_features(train)?;

        let n = train.len();
        let width = train.width();
        let binned = BinnedMatrix::new(&train.x, n, width, config.max_bins);
        let base_scores = log_priors(&train.y);
        let mut scores = vec![base_scores; n];
        let params = TreeParams {
            max_depth: config.max_depth,
            min_samples_leaf: config.min_samples_leaf,
            leaf_scale: (N_CLASSES as f64 - 1.0) / N_CLASSES as f64,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let draw = libm::round(config.subsample * n as f64).clamp(1.0, n as f64) as usize;

        let mean_loss = |scores: &[[f64; N_CLASSES]]| {
            scores.iter().zip(&train.y).map(|(s, y)| cross_entropy(s, *y)).sum::<f64>() / n as f64
        };
        let mut trace = FitTrace {
            losses: vec![mean_loss(&scores)],
        };

        let mut trees = Vec::with_capacity(config.n_stages * N_CLASSES);
        let mut residuals = vec![vec![0.0; n]; N_CLASSES];
        for _ in 0..config.n_stages {
            for (i, (s, y)) in scores.iter().zip(&train.y).enumerate() {
                let g = negative_gradient(s, *y);
                for k in 0..N_CLASSES {
                    residuals[k][i] = g[k];
                }
            }
            let rows: Vec<u32> = if draw < n {
                let mut idx: Vec<u32> = sample(&mut rng, n, draw).into_iter().map(|i| i as u32).collect();
                idx.sort_unstable();
                idx
            } else {
                (0..n as u32).collect()
            };
            let stage: Vec<Tree> = crate::par::map(&[0usize, 1, 2], |&k| {
                fit_tree(&binned, &residuals[k], rows.clone(), &params)
            });
            for (i, s) in scores.iter_mut().enumerate() {
                let row = train.row(i);
                for (k, t) in stage.iter().enumerate() {
                    s[k] += config.learning_rate * t.predict(row);
                }
            }
            trees.extend(stage);
            trace.losses.push(mean_loss(&scores));
        }

        let model = GbmModel {
            format_version: MODEL_FORMAT_VERSION,
            config: *config,
            n_features: width,
            classes: Direction::ALL,
            base_scores,
            trees,
            degenerate: false,
        };
        Ok((model, trace))
    }

    pub fn scores(&self, row: &[f64]) -> [f64; N_CLASSES] {
        let mut s = self.base_scores;
        for stage in self.trees.chunks(N_CLASSES) {
            for (k, t) in stage.iter().enumerate() {
                s[k] += self.config.learning_rate * t.predict(row);
            }
        }
        s
    }

    pub fn predict_row(&self, row: &[f64]) -> Direction {
        pick_class(&self.scores(row))
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.n_features {
            return Err(Error::WidthMismatch {
                expected: self.n_features,
                found: width,
            });
        }
        Ok(())
    }

    /// Labels and class probabilities for a row-major matrix of `width` columns.
    pub fn predict(&self, x: &[f64], width: usize) -> Result<Prediction> {
        self.check_width(width)?;
        if width == 0 || x.len() % width != 0 {
            return Err(Error::invalid("matrix length is not a multiple of its width"));
        }
        let mut labels = Vec::with_capacity(x.len() / width);
        let mut probabilities = Vec::with_capacity(x.len() / width);
        for row in x.chunks(width) {
            let s = self.scores(row);
            labels.push(pick_class(&s));
            probabilities.push(softmax(&s));
        }
        Ok(Prediction {
            labels,
            probabilities,
        })
    }

    pub fn predict_dataset(&self, ds: &LabeledDataset) -> Result<Prediction> {
        self.predict(&ds.x, ds.width())
    }

    pub fn accuracy(&self, ds: &LabeledDataset) -> Result<f64> {
        self.check_width(ds.width())?;
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let hits = (0..ds.len()).filter(|&i| self.predict_row(ds.row(i)) == ds.y[i]).count();
        Ok(hits as f64 / ds.len() as f64)
    }

    /// Features referenced by at least one split.
    pub fn used_features(&self) -> Vec<bool> {
        let mut used = vec![false; self.n_features];
        for t in &self.trees {
            for f in t.split_features() {
                used[f] = true;
            }
        }
        used
    }
}

/// Rows are true class, columns predicted class, both in order (-1, 0, +1).
pub fn confusion_matrix(truth: &[Direction], predicted: &[Direction]) -> [[usize; N_CLASSES]; N_CLASSES] {
    let mut m = [[0; N_CLASSES]; N_CLASSES];
    for (t, p) in truth.iter().zip(predicted) {
        m[t.index()][p.index()] += 1;
    }
    m
}
