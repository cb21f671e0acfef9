//! Core algorithms for building a short-dated implied-volatility index from
//! option quotes, turning it and a handful of alternative-data signals into
//! ternary direction labels, and learning to predict the index's next move
//! with a multiclass gradient-boosted tree ensemble.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, configuration and the command line
//! live in the `fearlab` companion crate.
//!
//! Pipeline, roughly in order:
//!
//! - [`volindex`]: per-expiry variance contributions and the 7-day index.
//! - [`signals`]: tweet volume and sentiment, EWMA smoothing, trend upsampling.
//! - [`labeling`]: min-max normalisation and balanced direction thresholds.
//! - [`dataset`]: lagged windows and the chronological split.
//! - [`gbm`]: boosted trees, cross-validation, random and grid search.
//! - [`importance`]: permutation importance.
//! - [`experiments`]: headline run and window-size sweep.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod gbm;
pub mod importance;
pub mod labeling;
mod par;
pub mod records;
pub mod series;
pub mod signals;
pub mod time;
pub mod volindex;

pub use error::{Error, Result};
pub use records::{OptionQuoteRecord, Side, TrendsRecord, TweetRecord};
pub use series::{Direction, DirectionSeries, UniformSeries};
pub use time::{Grid, Timestamp};
