use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no strike has both a call and a put quoted")]
    NoParityStrike,
    #[error("insufficient usable quotes: {found} usable, {required} required")]
    InsufficientQuotes { found: usize, required: usize },
    #[error("near and next term expire at the same minute")]
    DegenerateTerms,
    #[error("fewer than two knots to interpolate")]
    TooFewKnots,
    #[error("series is constant over the fit range")]
    ConstantSeries,
    #[error("series contains a gap at index {0}")]
    GapInSeries(usize),
    #[error("series are misaligned: {0}")]
    Misaligned(String),
    #[error("window {window} + horizon {horizon} must be below series length {len}")]
    WindowTooLong {
        window: usize,
        horizon: usize,
        len: usize,
    },
    #[error("split leaves an empty side ({train} train, {test} test)")]
    EmptySplit { train: usize, test: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("feature width mismatch: model expects {expected}, got {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Wraps `self` with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
