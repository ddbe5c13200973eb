use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e} exceeds tolerance")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("degenerate autocorrelation: matrix is all zeros")]
    DegenerateAutocorrelation,

    #[error("linear system is singular (zero pivot at column {column}{})", if *.ridge_applied { " after ridge regularization" } else { "" })]
    SingularSystem { column: usize, ridge_applied: bool },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("label {label} out of range [0, {num_classes}) at row {row}")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        num_classes: usize,
    },

    #[error("empty feature vector")]
    EmptyFeatureVector,

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid activation output {value} at row {row}, column {col}: expected a value in [0, 1]")]
    ActivationRange { row: usize, col: usize, value: f64 },

    #[error("{path}: wrong magic for {expected_kind}: found {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: PathBuf,
        expected_kind: &'static str,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated file: needed {needed} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        needed: usize,
        found: usize,
    },

    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("{path}: truncated record: file length {len} is not a multiple of {record_len}")]
    BadRecordLength {
        path: PathBuf,
        len: usize,
        record_len: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("training failed at iteration {iteration}: {source}")]
    Trainer {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite loss {loss} at iteration {iteration} (max |w| = {max_abs_weight:e}, max |y| = {max_abs_output:e})")]
    NonFiniteLoss {
        iteration: usize,
        loss: f64,
        max_abs_weight: f64,
        max_abs_output: f64,
    },

    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no results to emit")]
    NoResults,

    #[error("weights shape mismatch: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    WeightsShape {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wrap an io error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by an invalid configuration or unusable input
    /// files, as opposed to failures during a run. The CLI maps these to a
    /// distinct exit code.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
