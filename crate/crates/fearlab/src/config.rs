//! The TOML run configuration, CLI overrides and validation.

use std::path::{Path, PathBuf};

use fearlab_core::experiments::ModelSpec;
use fearlab_core::gbm::{GbmConfig, SearchSpace};
use fearlab_core::time::{Grid, MINUTE};
use fearlab_core::volindex::IndexParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FearlabError, Result};
use crate::timefmt;

/// The five feature series, in column order.
pub const SERIES: [&str; 5] = ["vxbt", "index", "volume", "sentiment", "trends"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Required; there is no clock-derived default.
    pub seed: Option<u64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub inputs: Inputs,
    pub grid: GridConfig,
    #[serde(default)]
    pub index: IndexParams,
    #[serde(default)]
    pub signals: SignalsConfig,
    #[serde(default)]
    pub labeling: LabelingConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub importance: ImportanceConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Parameters for `fearlab synth`; ignored by the pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
    /// Directory relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    /// `.csv` or `.jsonl`.
    pub quotes: PathBuf,
    pub tweets: PathBuf,
    pub trends: PathBuf,
    /// Optional `timestamp,price` feed; without it the near-term forward
    /// implied by the option chain stands in for the index price.
    #[serde(default)]
    pub index_prices: Option<PathBuf>,
    /// `word<TAB>valence` lines; without it only pre-scored tweets carry sentiment.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: String,
    pub end: String,
    #[serde(default = "default_interval")]
    pub interval_minutes: i64,
}

fn default_interval() -> i64 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalsConfig {
    pub ewma_span: usize,
    pub lexicon_alpha: f64,
    /// Oldest index price still used at a grid instant.
    pub index_price_max_age_minutes: i64,
}

impl Default for SignalsConfig {
    fn default() -> Self {
        SignalsConfig {
            ewma_span: fearlab_core::signals::DEFAULT_EWMA_SPAN,
            lexicon_alpha: fearlab_core::signals::DEFAULT_ALPHA,
            index_price_max_age_minutes: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelingMode {
    /// Normalisation and threshold fitted on the training prefix only.
    #[default]
    LeakSafe,
    /// Normalisation and threshold fitted on the whole series.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingConfig {
    pub mode: LabelingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub target: String,
    pub window: usize,
    pub horizon: usize,
    pub train_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            target: "vxbt".into(),
            window: 24,
            horizon: 1,
            train_fraction: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelMode {
    Fixed,
    #[default]
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub mode: ModelMode,
    pub cv_folds: usize,
    /// Random-search trials.
    pub trials: usize,
    /// Follow the random search with a grid search around its winner.
    pub refine: bool,
    /// The fixed configuration, or the base for searched ones.
    pub params: GbmConfig,
    pub space: SearchSpace,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            mode: ModelMode::Search,
            cv_folds: 5,
            trials: 20,
            refine: true,
            params: GbmConfig::default(),
            space: SearchSpace::default(),
        }
    }
}

impl ModelConfig {
    pub fn spec(&self) -> ModelSpec {
        match self.mode {
            ModelMode::Fixed => ModelSpec::Fixed(self.params),
            ModelMode::Search => ModelSpec::Search {
                base: self.params,
                space: self.space,
                trials: self.trials,
                refine: self.refine,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceConfig {
    pub repeats: usize,
    pub top: usize,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        ImportanceConfig { repeats: 10, top: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub windows: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            windows: (1..=48).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub spot: f64,
    /// Long-run mean of the latent volatility.
    pub vol_mean: f64,
    pub strikes_per_expiry: usize,
    /// Mean original tweets per grid interval.
    pub tweets_per_interval: f64,
    pub retweet_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            spot: 9000.0,
            vol_mean: 0.8,
            strikes_per_expiry: 15,
            tweets_per_interval: 4.0,
            retweet_fraction: 0.2,
        }
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paper_compat: bool,
    pub paper_eq2_minus: bool,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses the file, applies `overrides` and validates the result.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| FearlabError::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| FearlabError::Config(vec![e.message().to_string()]))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.paper_compat {
            self.labeling.mode = LabelingMode::Paper;
        }
        if o.paper_eq2_minus {
            self.index.eq2_minus = true;
        }
        if let Some(out) = &o.out_dir {
            // Relative to the working directory, unlike the file setting.
            self.out_dir = std::env::current_dir().map(|d| d.join(out)).unwrap_or_else(|_| out.clone());
        }
    }

    /// Every violation, not only the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.seed.is_none() {
            v.push("seed is required (set `seed` or pass --seed)".into());
        }
        match (timefmt::parse(&self.grid.start), timefmt::parse(&self.grid.end)) {
            (Some(start), Some(end)) => {
                let interval = self.grid.interval_minutes;
                if start >= end {
                    v.push("grid.start must precede grid.end".into());
                } else if interval <= 0 {
                    v.push("grid.interval_minutes must be positive".into());
                } else if (end - start) % (interval * MINUTE) != 0 {
                    v.push("grid.interval_minutes must divide the grid span".into());
                }
            }
            (s, e) => {
                if s.is_none() {
                    v.push(format!("grid.start `{}` is not an ISO-8601 instant", self.grid.start));
                }
                if e.is_none() {
                    v.push(format!("grid.end `{}` is not an ISO-8601 instant", self.grid.end));
                }
            }
        }
        if let Err(e) = self.index.validate() {
            v.push(format!("index: {e}"));
        }
        if self.signals.ewma_span < 1 {
            v.push("signals.ewma_span must be at least 1".into());
        }
        if !(self.signals.lexicon_alpha > 0.0) {
            v.push("signals.lexicon_alpha must be positive".into());
        }
        if self.signals.index_price_max_age_minutes < 0 {
            v.push("signals.index_price_max_age_minutes must be non-negative".into());
        }
        let d = &self.dataset;
        if !SERIES.contains(&d.target.as_str()) {
            v.push(format!("dataset.target must be one of {}", SERIES.join(", ")));
        }
        if d.window < 1 {
            v.push("dataset.window must be at least 1".into());
        }
        if d.horizon < 1 {
            v.push("dataset.horizon must be at least 1".into());
        }
        if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
            v.push("dataset.train_fraction must lie in (0, 1)".into());
        }
        let m = &self.model;
        if m.cv_folds < 2 {
            v.push("model.cv_folds must be at least 2".into());
        }
        if let Err(e) = m.params.validate() {
            v.push(format!("model.params: {e}"));
        }
        if m.mode == ModelMode::Search {
            if m.trials < 1 {
                v.push("model.trials must be at least 1".into());
            }
            if let Err(e) = m.space.validate() {
                v.push(format!("model.space: {e}"));
            }
        }
        if self.importance.repeats < 1 {
            v.push("importance.repeats must be at least 1".into());
        }
        let w = &self.sweep.windows;
        if w.is_empty() || w[0] < 1 || w.windows(2).any(|p| p[0] >= p[1]) {
            v.push("sweep.windows must be non-empty, positive and strictly increasing".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(FearlabError::Config(v))
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config carries a seed")
    }

    pub fn grid(&self) -> Grid {
        let start = timefmt::parse(&self.grid.start).expect("validated");
        let end = timefmt::parse(&self.grid.end).expect("validated");
        Grid::new(start, end, self.grid.interval_minutes * MINUTE).expect("validated")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    /// SHA-256 of the effective settings. The output directory is left out
    /// so that identical runs into different directories share a hash.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("out_dir");
            obj.remove("synth");
        }
        let text = serde_json::to_string(&value).expect("config serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
