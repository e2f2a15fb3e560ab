//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any stage of the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error in {path}: {msg}")]
    CsvParse { path: String, msg: String },

    #[error("no parseable rows in {path}")]
    EmptySeries { path: String },

    #[error("duplicate timestamp {stamp} in series '{variable}' with conflicting values")]
    DuplicateTimestamp { variable: String, stamp: String },

    #[error("date intersection of the input series is empty")]
    EmptyIntersection,

    #[error("series '{variable}' has a {gap_days}-day gap ending {date}; cap is {cap} days")]
    GapTooLong {
        variable: String,
        date: chrono::NaiveDate,
        gap_days: i64,
        cap: u32,
    },

    #[error("variable '{0}' not present in frame")]
    UnknownVariable(String),

    #[error("insufficient data: needed {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("design matrix is singular or rank deficient: {0}")]
    SingularDesign(String),

    #[error("optimizer failed to converge after {0} iterations")]
    NonConvergence(usize),

    #[error("optimum violates stationarity/invertibility constraints")]
    NonStationary,

    #[error("AICc undefined: n = {n} must exceed k + 1 = {k_plus_one}")]
    AiccDegenerate { n: usize, k_plus_one: usize },

    #[error("Ljung-Box lag count h = {h} must exceed fitted df = {fitted_df}")]
    LjungBoxDegenerate { h: usize, fitted_df: usize },

    #[error("all candidate fits failed; last error: {0}")]
    AllCandidatesFailed(String),

    #[error("covariate dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("constant series: min-max scaling undefined")]
    ConstantSeries,

    #[error("training diverged: loss became non-finite at epoch {0}")]
    Diverged(usize),

    #[error("window too short: need at least {needed}, got {got}")]
    WindowTooShort { needed: usize, got: usize },

    #[error("constant window: spectral entropy undefined")]
    ConstantWindow,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("meta dataset needs at least {needed} fold records, got {got}")]
    TooFewFolds { needed: usize, got: usize },

    #[error("{0} does not produce forecast intervals")]
    IntervalsUnsupported(crate::forecast::ModelTag),

    #[error("training rows contain a single class; classifier needs at least two")]
    SingleClass,

    #[error("fold records and feature vectors are misaligned at {0}")]
    DateMisalignment(chrono::NaiveDate),

    #[error("config: {0}")]
    Config(String),

    // The boxed error is folded into the message rather than exposed as a
    // source, so error chains do not print it twice.
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
