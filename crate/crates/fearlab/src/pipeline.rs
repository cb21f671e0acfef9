//! Pipeline stages. Each stage reads its upstream artifacts from the output
//! directory, writes its own files under `<out>/<stage>/`, and finishes with a
//! `manifest.json` carrying the config hash, seed and file checksums.

use std::fs;
use std::path::{Path, PathBuf};

use fearlab_core::dataset::{chrono_split, windowize, LabeledDataset};
use fearlab_core::experiments::{tune, window_sweep, PipelineConfig, Tuning};
use fearlab_core::gbm::{confusion_matrix, GbmModel, SearchOutcome, N_CLASSES};
use fearlab_core::importance::{permutation_importance, ImportanceReport};
use fearlab_core::labeling::normalize_and_label;
use fearlab_core::signals::{aggregate_tweets, ewma, sample_last, upsample_linear, Lexicon};
use fearlab_core::volindex::{compute_vxbt_series, IndexReport};
use fearlab_core::{DirectionSeries, UniformSeries};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{LabelingMode, RunConfig, SERIES};
use crate::error::{FearlabError, Result};
use crate::formats::{self, DatasetManifest};
use crate::market_data::{self, QuoteFormat, Rejection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Ingest,
    Index,
    Signals,
    Label,
    Dataset,
    Train,
    Importance,
    Sweep,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Index,
        Stage::Signals,
        Stage::Label,
        Stage::Dataset,
        Stage::Train,
        Stage::Importance,
        Stage::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Index => "index",
            Stage::Signals => "signals",
            Stage::Label => "label",
            Stage::Dataset => "dataset",
            Stage::Train => "train",
            Stage::Importance => "importance",
            Stage::Sweep => "sweep",
        }
    }

    /// Bumped whenever the stage's output for a given input changes.
    pub fn version(self) -> u32 {
        1
    }

    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Index => &[Stage::Ingest],
            Stage::Signals => &[Stage::Ingest],
            Stage::Label => &[Stage::Index, Stage::Signals],
            Stage::Dataset => &[Stage::Label],
            Stage::Train => &[Stage::Dataset],
            Stage::Importance => &[Stage::Train],
            Stage::Sweep => &[Stage::Label, Stage::Train],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: String,
    pub version: u32,
    pub fearlab_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST: &str = "manifest.json";

/// Series CSV value column per feature series.
fn series_file(name: &str) -> String {
    format!("{name}.csv")
}

/// Opens a stage: checks upstream manifests and prepares the directory.
struct StageWriter<'a> {
    stage: Stage,
    dir: PathBuf,
    cfg: &'a RunConfig,
    written: Vec<String>,
}

impl<'a> StageWriter<'a> {
    fn file(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn finish(self) -> Result<StageManifest> {
        let mut artifacts = Vec::with_capacity(self.written.len());
        for name in &self.written {
            let path = self.dir.join(name);
            let bytes = fs::read(&path).map_err(|e| FearlabError::io(&path, e))?;
            artifacts.push(ArtifactEntry {
                path: name.clone(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        let manifest = StageManifest {
            stage: self.stage.name().into(),
            version: self.stage.version(),
            fearlab_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: self.cfg.hash(),
            seed: self.cfg.seed(),
            artifacts,
        };
        formats::write_json(&self.dir.join(MANIFEST), &manifest)?;
        Ok(manifest)
    }
}

/// One configured run over an output directory.
pub struct Pipeline {
    cfg: RunConfig,
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub quotes: RowReport,
    pub tweets: TweetReport,
    pub trends: TrendsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_prices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub rows: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetReport {
    pub rows: usize,
    pub accepted: usize,
    pub retweets_removed: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendsReport {
    pub knots: usize,
    /// Knot gaps longer than one hour, ISO-8601 `(from, to)`.
    pub gaps: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    /// `feed` for a supplied price file, `forward` for the chain-implied forward.
    pub source: String,
    pub points: usize,
    pub gaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalsReport {
    pub tweets: usize,
    pub empty_intervals: usize,
    pub trends_gaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub series: String,
    pub theta: f64,
    pub counts: [usize; 3],
    pub imbalance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub mode: LabelingMode,
    /// Points of each level series used to fit normalisation and threshold.
    pub fit_points: usize,
    pub thresholds: Vec<ThresholdEntry>,
    /// Gaps filled with the previous value before labelling, per series.
    pub filled_gaps: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: fearlab_core::gbm::GbmConfig,
    pub train_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_search_best: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_search_best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Rows true class, columns predicted, order (-1, 0, +1).
    pub confusion: [[usize; N_CLASSES]; N_CLASSES],
    pub test_class_counts: [usize; N_CLASSES],
    pub train_samples: usize,
    pub test_samples: usize,
    pub top_features: Vec<String>,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Pipeline {
        let out = cfg.out_dir();
        Pipeline { cfg, out }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.out.join(stage.name())
    }

    fn open(&self, stage: Stage) -> Result<StageWriter<'_>> {
        for up in stage.upstream() {
            let manifest = self.stage_dir(*up).join(MANIFEST);
            if !manifest.is_file() {
                return Err(FearlabError::MissingArtifact {
                    path: manifest,
                    stage: up.name(),
                });
            }
        }
        let dir = self.stage_dir(stage);
        fs::create_dir_all(&dir).map_err(|e| FearlabError::io(&dir, e))?;
        // A half-written stage must not look complete.
        let manifest = dir.join(MANIFEST);
        if manifest.exists() {
            fs::remove_file(&manifest).map_err(|e| FearlabError::io(&manifest, e))?;
        }
        Ok(StageWriter {
            stage,
            dir,
            cfg: &self.cfg,
            written: Vec::new(),
        })
    }

    fn upstream_file(&self, stage: Stage, name: &str) -> Result<PathBuf> {
        let path = self.stage_dir(stage).join(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(FearlabError::MissingArtifact {
                path,
                stage: stage.name(),
            })
        }
    }

    pub fn run(&self, stage: Stage) -> Result<String> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Index => self.index(),
            Stage::Signals => self.signals(),
            Stage::Label => self.label(),
            Stage::Dataset => self.dataset(),
            Stage::Train => self.train(),
            Stage::Importance => self.importance(),
            Stage::Sweep => self.sweep(),
        }
    }

    /// Runs every stage in order, returning one summary line per stage.
    pub fn run_all(&self) -> Result<Vec<String>> {
        Stage::ALL.iter().map(|s| self.run(*s)).collect()
    }

    fn ingest(&self) -> Result<String> {
        let mut w = self.open(Stage::Ingest)?;
        let inputs = &self.cfg.inputs;
        let quotes_path = self.cfg.resolve(&inputs.quotes);
        let quotes = market_data::parse_quotes(&quotes_path, QuoteFormat::from_path(&quotes_path))?;
        let tweets = market_data::parse_tweets(&self.cfg.resolve(&inputs.tweets))?;
        let trends = market_data::parse_trends(&self.cfg.resolve(&inputs.trends))?;
        let prices = match &inputs.index_prices {
            Some(p) => Some(market_data::parse_index_prices(&self.cfg.resolve(p))?),
            None => None,
        };

        market_data::write_quotes(&w.file("quotes.csv"), &quotes.records, QuoteFormat::Csv)?;
        market_data::write_tweets(&w.file("tweets.jsonl"), &tweets.tweets.records)?;
        market_data::write_trends(&w.file("trends.csv"), &trends.records)?;
        if let Some(p) = &prices {
            market_data::write_index_prices(&w.file("index_prices.csv"), p)?;
        }
        let report = IngestReport {
            quotes: RowReport {
                rows: quotes.rows,
                accepted: quotes.records.len(),
                rejected: quotes.rejected,
            },
            tweets: TweetReport {
                rows: tweets.tweets.rows,
                accepted: tweets.tweets.records.len(),
                retweets_removed: tweets.retweets,
                rejected: tweets.tweets.rejected,
            },
            trends: TrendsReport {
                knots: trends.records.len(),
                gaps: trends
                    .gaps
                    .iter()
                    .map(|(a, b)| (crate::timefmt::format(*a), crate::timefmt::format(*b)))
                    .collect(),
            },
            index_prices: prices.as_ref().map(Vec::len),
        };
        formats::write_json(&w.file("report.json"), &report)?;
        w.finish()?;
        Ok(format!(
            "ingest: {} quotes ({} rejected), {} tweets ({} retweets removed), {} trend knots",
            report.quotes.accepted,
            report.quotes.rejected.len(),
            report.tweets.accepted,
            report.tweets.retweets_removed,
            report.trends.knots
        ))
    }

    fn index(&self) -> Result<String> {
        let quotes_path = self.upstream_file(Stage::Ingest, "quotes.csv")?;
        let feed = self.stage_dir(Stage::Ingest).join("index_prices.csv");
        let mut w = self.open(Stage::Index)?;
        let quotes = market_data::parse_quotes(&quotes_path, QuoteFormat::Csv)?;
        let grid = self.cfg.grid();
        let vxbt = compute_vxbt_series(&quotes.records, &grid, &self.cfg.index)?;
        let (price, source) = if self.cfg.inputs.index_prices.is_some() && feed.is_file() {
            let points = market_data::parse_index_prices(&feed)?;
            let max_age = self.cfg.signals.index_price_max_age_minutes * fearlab_core::time::MINUTE;
            (sample_last(&points, &grid, max_age)?, "feed")
        } else {
            (vxbt.forward.clone(), "forward")
        };
        formats::write_series(&w.file("vxbt.csv"), "vxbt", &vxbt.series)?;
        formats::write_json(&w.file("report.json"), &vxbt.report)?;
        formats::write_series(&w.file("index_price.csv"), "value", &price)?;
        formats::write_json(
            &w.file("price_report.json"),
            &PriceReport {
                source: source.into(),
                points: price.len(),
                gaps: price.gap_count(),
            },
        )?;
        w.finish()?;
        let IndexReport {
            points,
            gaps,
            clamped_radicands,
        } = vxbt.report;
        Ok(format!(
            "index: {points} points, {gaps} gaps, {clamped_radicands} clamped; index price from {source}"
        ))
    }

    fn signals(&self) -> Result<String> {
        let tweets_path = self.upstream_file(Stage::Ingest, "tweets.jsonl")?;
        let trends_path = self.upstream_file(Stage::Ingest, "trends.csv")?;
        let mut w = self.open(Stage::Signals)?;
        let s = &self.cfg.signals;
        let lexicon = match &self.cfg.inputs.lexicon {
            Some(p) => {
                let p = self.cfg.resolve(p);
                let text = fs::read_to_string(&p).map_err(|e| FearlabError::io(&p, e))?;
                Lexicon::from_tsv(&text, s.lexicon_alpha)?
            }
            None => Lexicon::new(Default::default(), s.lexicon_alpha)?,
        };
        let tweets = market_data::parse_tweets(&tweets_path)?.tweets.records;
        let trends = market_data::parse_trends(&trends_path)?.records;
        let grid = self.cfg.grid();
        let (volume, sentiment) = aggregate_tweets(&tweets, &lexicon, &grid)?;
        let empty = sentiment.gap_count();
        let volume = ewma(&volume, s.ewma_span)?;
        let sentiment = ewma(&sentiment, s.ewma_span)?.forward_filled();
        let trends_series = upsample_linear(&trends, &grid)?;
        formats::write_series(&w.file(&series_file("volume")), "value", &volume)?;
        formats::write_series(&w.file(&series_file("sentiment")), "value", &sentiment)?;
        formats::write_series(&w.file(&series_file("trends")), "value", &trends_series)?;
        let report = SignalsReport {
            tweets: tweets.len(),
            empty_intervals: empty,
            trends_gaps: trends_series.gap_count(),
        };
        formats::write_json(&w.file("report.json"), &report)?;
        w.finish()?;
        Ok(format!(
            "signals: {} tweets, {} empty intervals, {} trends gaps",
            report.tweets, report.empty_intervals, report.trends_gaps
        ))
    }

    fn level_series(&self) -> Result<Vec<(String, UniformSeries)>> {
        let interval = self.cfg.grid().interval;
        let sources = [
            ("vxbt", Stage::Index, "vxbt.csv"),
            ("index", Stage::Index, "index_price.csv"),
            ("volume", Stage::Signals, "volume.csv"),
            ("sentiment", Stage::Signals, "sentiment.csv"),
            ("trends", Stage::Signals, "trends.csv"),
        ];
        sources
            .iter()
            .map(|(name, stage, file)| {
                let path = self.upstream_file(*stage, file)?;
                Ok((name.to_string(), formats::read_series(&path, interval)?))
            })
            .collect()
    }

    fn label(&self) -> Result<String> {
        let levels = self.level_series()?;
        let mut w = self.open(Stage::Label)?;
        let len = levels[0].1.len();
        let fit_points = match self.cfg.labeling.mode {
            LabelingMode::Paper => len,
            LabelingMode::LeakSafe => (self.cfg.dataset.train_fraction * len as f64).floor() as usize,
        };
        let mut thresholds = Vec::new();
        let mut filled_gaps = Vec::new();
        for (name, series) in &levels {
            if series.gap_count() == series.len() {
                return Err(FearlabError::artifact(
                    self.stage_dir(Stage::Label),
                    format!("series `{name}` has no values"),
                ));
            }
            filled_gaps.push((name.clone(), series.gap_count()));
            let labeled = normalize_and_label(&series.forward_filled(), 0..fit_points)
                .map_err(|e| e.at_stage("label"))?;
            formats::write_labels(&w.file(&series_file(name)), &labeled.directions)?;
            thresholds.push(ThresholdEntry {
                series: name.clone(),
                theta: labeled.fit.theta,
                counts: labeled.fit.class_counts,
                imbalance: labeled.fit.imbalance,
            });
        }
        let report = LabelReport {
            mode: self.cfg.labeling.mode,
            fit_points,
            thresholds,
            filled_gaps,
        };
        formats::write_json(&w.file("thresholds.json"), &report.thresholds)?;
        formats::write_json(&w.file("report.json"), &report)?;
        w.finish()?;
        Ok(format!("label: {} series, fit on {} of {} points", levels.len(), fit_points, len))
    }

    fn directions(&self) -> Result<Vec<(String, DirectionSeries)>> {
        let interval = self.cfg.grid().interval;
        SERIES
            .iter()
            .map(|name| {
                let path = self.upstream_file(Stage::Label, &series_file(name))?;
                Ok((name.to_string(), formats::read_labels(&path, interval)?))
            })
            .collect()
    }

    fn dataset(&self) -> Result<String> {
        let dirs = self.directions()?;
        let mut w = self.open(Stage::Dataset)?;
        let d = &self.cfg.dataset;
        let ds = windowize(&dirs, &d.target, d.window, d.horizon).map_err(|e| e.at_stage("dataset"))?;
        let (train, test) = chrono_split(&ds, d.train_fraction).map_err(|e| e.at_stage("dataset"))?;
        let features = w.file("features.csv");
        let targets = w.file("targets.csv");
        formats::write_dataset(&features, &targets, &ds)?;
        let manifest = DatasetManifest {
            target: d.target.clone(),
            series: SERIES.iter().map(|s| s.to_string()).collect(),
            window: d.window,
            horizon: d.horizon,
            columns: ds.feature_names.iter().map(|f| f.to_string()).collect(),
            samples: ds.len(),
            train_fraction: d.train_fraction,
            train_samples: train.len(),
            test_samples: test.len(),
        };
        formats::write_json(&w.file("dataset.json"), &manifest)?;
        w.finish()?;
        Ok(format!(
            "dataset: {} samples x {} features ({} train / {} test)",
            ds.len(),
            ds.width(),
            train.len(),
            test.len()
        ))
    }

    fn load_split(&self) -> Result<(LabeledDataset, LabeledDataset)> {
        let features = self.upstream_file(Stage::Dataset, "features.csv")?;
        let targets = self.upstream_file(Stage::Dataset, "targets.csv")?;
        let meta: DatasetManifest = formats::read_json(&self.upstream_file(Stage::Dataset, "dataset.json")?)?;
        let ds = formats::read_dataset(&features, &targets)?;
        let (train, test) = chrono_split(&ds, meta.train_fraction)?;
        Ok((train, test))
    }

    fn train(&self) -> Result<String> {
        if !self.stage_dir(Stage::Dataset).join(MANIFEST).is_file() {
            return Err(FearlabError::MissingArtifact {
                path: self.stage_dir(Stage::Dataset).join(MANIFEST),
                stage: "dataset",
            });
        }
        let (train, _) = self.load_split()?;
        let mut w = self.open(Stage::Train)?;
        let m = &self.cfg.model;
        let tuning: Tuning = tune(&train, &m.spec(), m.cv_folds, self.cfg.seed()).map_err(|e| e.at_stage("train"))?;
        let model = GbmModel::fit(&train, &tuning.config).map_err(|e| e.at_stage("train"))?;
        formats::write_json(&w.file("model.json"), &model)?;
        if tuning.random.is_some() {
            write_search_log(&w.file("search_log.csv"), &tuning)?;
        }
        let report = TrainReport {
            config: tuning.config,
            train_samples: train.len(),
            random_search_best: tuning.random.as_ref().map(|r| r.best_score),
            grid_search_best: tuning.grid.as_ref().map(|g| g.best_score),
        };
        formats::write_json(&w.file("report.json"), &report)?;
        w.finish()?;
        let c = tuning.config;
        Ok(format!(
            "train: {} samples, learning_rate {}, {} stages, depth {}",
            train.len(),
            c.learning_rate,
            c.n_stages,
            c.max_depth
        ))
    }

    fn load_model(&self) -> Result<GbmModel> {
        let path = self.upstream_file(Stage::Train, "model.json")?;
        let model: GbmModel = formats::read_json(&path)?;
        model.check().map_err(|e| FearlabError::artifact(&path, e))?;
        Ok(model)
    }

    fn importance(&self) -> Result<String> {
        let model = self.load_model()?;
        let (train, test) = self.load_split()?;
        let mut w = self.open(Stage::Importance)?;
        let predicted = model.predict_dataset(&test).map_err(|e| e.at_stage("importance"))?;
        let confusion = confusion_matrix(&test.y, &predicted.labels);
        let hits: usize = (0..N_CLASSES).map(|k| confusion[k][k]).sum();
        let report = permutation_importance(&model, &test, self.cfg.importance.repeats, self.cfg.seed())
            .map_err(|e| e.at_stage("importance"))?;
        let top = self.cfg.importance.top;
        write_importance(&w.file("importance.csv"), &report.entries)?;
        write_importance(&w.file("top.csv"), report.top(top))?;
        let alt = report.filtered(|f| matches!(f.series.as_str(), "volume" | "sentiment" | "trends"));
        write_importance(&w.file("top_non_financial.csv"), alt.top(top))?;
        let metrics = Metrics {
            accuracy: hits as f64 / test.len() as f64,
            confusion,
            test_class_counts: test.class_counts(),
            train_samples: train.len(),
            test_samples: test.len(),
            top_features: report.top(5).iter().map(|e| e.feature.to_string()).collect(),
        };
        formats::write_json(&w.file("metrics.json"), &metrics)?;
        w.finish()?;
        Ok(format!(
            "importance: test accuracy {:.4} on {} samples; top feature {}",
            metrics.accuracy,
            test.len(),
            metrics.top_features.first().map(String::as_str).unwrap_or("-")
        ))
    }

    fn sweep(&self) -> Result<String> {
        let dirs = self.directions()?;
        let model = self.load_model()?;
        let mut w = self.open(Stage::Sweep)?;
        let d = &self.cfg.dataset;
        let cfg = PipelineConfig {
            target: d.target.clone(),
            window: d.window,
            horizon: d.horizon,
            train_fraction: d.train_fraction,
            cv_folds: self.cfg.model.cv_folds,
            importance_repeats: self.cfg.importance.repeats,
            seed: self.cfg.seed(),
            model: self.cfg.model.spec(),
        };
        let started = std::time::Instant::now();
        let mut clock = move || started.elapsed().as_secs_f64();
        let result = window_sweep(&dirs, &cfg, &model.config, &self.cfg.sweep.windows, &mut clock)
            .map_err(|e| e.at_stage("sweep"))?;
        let minutes = self.cfg.grid.interval_minutes as usize;
        let rows = result.rows.iter().map(|r| {
            [
                r.window.to_string(),
                (r.window * minutes).to_string(),
                r.mean_cv_accuracy.map(|v| v.to_string()).unwrap_or_default(),
                r.std.map(|v| v.to_string()).unwrap_or_default(),
            ]
        });
        formats::write_table(
            &w.file("sweep.csv"),
            &["window_steps", "window_minutes", "mean_cv_accuracy", "std"],
            rows,
        )?;
        w.finish()?;
        let failed = result.rows.iter().filter(|r| r.mean_cv_accuracy.is_none()).count();
        Ok(format!("sweep: {} windows, {} failed", result.rows.len(), failed))
    }
}

fn write_search_log(path: &Path, tuning: &Tuning) -> Result<()> {
    let phases: [(&str, Option<&SearchOutcome>); 2] =
        [("random", tuning.random.as_ref()), ("grid", tuning.grid.as_ref())];
    let mut rows = Vec::new();
    let mut n = 0usize;
    for (phase, outcome) in phases {
        for t in outcome.map(|o| o.trials.as_slice()).unwrap_or_default() {
            rows.push([
                n.to_string(),
                phase.to_string(),
                t.config.learning_rate.to_string(),
                t.config.n_stages.to_string(),
                t.config.max_depth.to_string(),
                t.mean_cv_accuracy.to_string(),
                t.std_cv_accuracy.to_string(),
            ]);
            n += 1;
        }
    }
    formats::write_table(
        path,
        &[
            "trial",
            "phase",
            "learning_rate",
            "n_stages",
            "max_depth",
            "mean_cv_accuracy",
            "std_cv_accuracy",
        ],
        rows,
    )
}

fn write_importance(path: &Path, entries: &[fearlab_core::importance::ImportanceEntry]) -> Result<()> {
    let rows = entries.iter().map(|e| {
        [
            format!("{}_direction", e.feature.series),
            e.feature.lag.to_string(),
            e.mean_drop.to_string(),
            e.std_drop.to_string(),
        ]
    });
    formats::write_table(path, &["feature", "lag", "mean_drop", "std_drop"], rows)
}

/// The importance report for an already-trained model, recomputed from the
/// stored artifacts.
pub fn stored_importance(p: &Pipeline) -> Result<ImportanceReport> {
    let model = p.load_model()?;
    let (_, test) = p.load_split()?;
    Ok(permutation_importance(&model, &test, p.cfg.importance.repeats, p.cfg.seed())?)
}
