//! The headline train/evaluate run and the lookback-window sweep.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{chrono_split, windowize, windowize_from, LabeledDataset};
use crate::error::{Error, Result};
use crate::gbm::{
    confusion_matrix, cross_validate, grid_search, random_search, GbmConfig, GbmModel, ParamGrid, SearchOutcome,
    SearchSpace, N_CLASSES,
};
use crate::importance::{permutation_importance, ImportanceReport};
use crate::series::DirectionSeries;

/// How the model hyperparameters are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ModelSpec {
    Fixed(GbmConfig),
    /// Random search over `space`, optionally followed by a grid search on a
    /// grid narrowed around the random-search winner.
    Search {
        base: GbmConfig,
        space: SearchSpace,
        trials: usize,
        refine: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub target: String,
    pub window: usize,
    pub horizon: usize,
    pub train_fraction: f64,
    pub cv_folds: usize,
    pub importance_repeats: usize,
    pub seed: u64,
    pub model: ModelSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            target: String::from("vxbt"),
            window: 24,
            horizon: 1,
            train_fraction: 0.9,
            cv_folds: 5,
            importance_repeats: 10,
            seed: 0,
            model: ModelSpec::Fixed(GbmConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub config: GbmConfig,
    pub random: Option<SearchOutcome>,
    pub grid: Option<SearchOutcome>,
}

/// Resolves the model configuration on `train`. The pipeline seed replaces
/// every configured model seed.
pub fn tune(train: &LabeledDataset, spec: &ModelSpec, folds: usize, seed: u64) -> Result<Tuning> {
    match spec {
        ModelSpec::Fixed(cfg) => Ok(Tuning {
            config: GbmConfig { seed, ..*cfg },
            random: None,
            grid: None,
        }),
        ModelSpec::Search {
            base,
            space,
            trials,
            refine,
        } => {
            let base = GbmConfig { seed, ..*base };
            let random = random_search(train, &base, space, *trials, folds, seed)?;
            let mut config = random.best;
            let grid = if *refine {
                let g = grid_search(train, &base, &ParamGrid::around(&random.best, space), folds)?;
                if g.best_score >= random.best_score {
                    config = g.best;
                }
                Some(g)
            } else {
                None
            };
            Ok(Tuning {
                config,
                random: Some(random),
                grid,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadlineMetrics {
    pub accuracy: f64,
    /// Rows true class, columns predicted, order (-1, 0, +1).
    pub confusion: [[usize; N_CLASSES]; N_CLASSES],
    pub importance: ImportanceReport,
    pub model: GbmModel,
    pub tuning: Tuning,
    pub train_samples: usize,
    pub test_samples: usize,
}

/// Window → split → tune → fit → test accuracy, confusion matrix and
/// permutation importance on the test span.
pub fn run_headline(directions: &[(String, DirectionSeries)], cfg: &PipelineConfig) -> Result<HeadlineMetrics> {
    let ds = windowize(directions, &cfg.target, cfg.window, cfg.horizon).map_err(|e| e.at_stage("dataset"))?;
    let (train, test) = chrono_split(&ds, cfg.train_fraction).map_err(|e| e.at_stage("dataset"))?;
    let tuning = tune(&train, &cfg.model, cfg.cv_folds, cfg.seed).map_err(|e| e.at_stage("train"))?;
    let model = GbmModel::fit(&train, &tuning.config).map_err(|e| e.at_stage("train"))?;
    evaluate_model(model, tuning, &train, &test, cfg)
}

/// Scores an already-fitted model on `test`.
pub fn evaluate_model(
    model: GbmModel,
    tuning: Tuning,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &PipelineConfig,
) -> Result<HeadlineMetrics> {
    let predicted = model.predict_dataset(test).map_err(|e| e.at_stage("importance"))?;
    let confusion = confusion_matrix(&test.y, &predicted.labels);
    let hits: usize = (0..N_CLASSES).map(|k| confusion[k][k]).sum();
    let importance = permutation_importance(&model, test, cfg.importance_repeats, cfg.seed)
        .map_err(|e| e.at_stage("importance"))?;
    Ok(HeadlineMetrics {
        accuracy: hits as f64 / test.len() as f64,
        confusion,
        importance,
        model,
        tuning,
        train_samples: train.len(),
        test_samples: test.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub window: usize,
    /// `None` when the point failed.
    pub mean_cv_accuracy: Option<f64>,
    pub std: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Cross-validated accuracy on the training span for each window, with a
/// fixed model configuration. Every window is evaluated on the same target
/// instants, so folds coincide across windows. `clock` returns seconds and
/// only feeds `wall_time`.
pub fn window_sweep(
    directions: &[(String, DirectionSeries)],
    cfg: &PipelineConfig,
    model: &GbmConfig,
    windows: &[usize],
    clock: &mut dyn FnMut() -> f64,
) -> Result<SweepResult> {
    if windows.is_empty() {
        return Err(Error::invalid("sweep needs at least one window"));
    }
    if windows.windows(2).any(|w| w[0] >= w[1]) || windows[0] < 1 {
        return Err(Error::invalid("sweep windows must be positive and strictly increasing"));
    }
    // Align on the largest window that fits; longer ones fail on their own.
    let len = directions.first().map_or(0, |(_, s)| s.len());
    let first_t = windows
        .iter()
        .rev()
        .find(|&&w| w + cfg.horizon < len)
        .map_or(0, |w| w - 1);
    let model = GbmConfig { seed: cfg.seed, ..*model };
    let rows = windows
        .iter()
        .map(|&window| {
            let started = clock();
            let score = windowize_from(directions, &cfg.target, window, cfg.horizon, first_t)
                .and_then(|ds| chrono_split(&ds, cfg.train_fraction))
                .and_then(|(train, _)| cross_validate(&train, &model, cfg.cv_folds));
            let wall_time = clock() - started;
            SweepRow {
                window,
                mean_cv_accuracy: score.as_ref().ok().map(|c| c.mean),
                std: score.as_ref().ok().map(|c| c.std),
                wall_time,
            }
        })
        .collect();
    Ok(SweepResult { rows })
}
