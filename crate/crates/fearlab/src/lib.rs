//! File formats, configuration, the staged pipeline and the `fearlab` CLI
//! around `fearlab-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod market_data;
pub mod pipeline;
pub mod synth;
pub mod timefmt;

pub use config::{Overrides, RunConfig};
pub use error::{FearlabError, Result};
pub use pipeline::{Pipeline, Stage};
