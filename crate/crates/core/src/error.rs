use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no foreground pixel in image")]
    AllBackground,
    #[error("orientation undefined for an isotropic mask")]
    DegenerateOrientation,
    #[error("wrist cut at row {row} removes a whole finger segment")]
    CutAboveFingers { row: usize },
    #[error("finger segmentation failed: found {count} profile segments, expected 5")]
    Segmentation { count: usize },
    #[error("missing finger: {0}")]
    MissingFinger(String),
    #[error("empty shape")]
    EmptyShape,
    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("all feature relevances are zero")]
    AllZeroRelevance,
    #[error("feature layout incompatible: {0}")]
    BadLayout(String),
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("probe subject {0} has no enrolled templates")]
    UnknownSubject(String),
    #[error("feature mean is zero for column {0}")]
    ZeroMean(usize),
    #[error("score set is empty")]
    EmptyScores,
    #[error("layout error at {path}: {reason}")]
    Layout { path: PathBuf, reason: String },
    #[error("too few subjects: {0}")]
    TooFewSubjects(usize),
    #[error("parameter out of range: {0}")]
    ParamsOutOfRange(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind, used in CLI error JSON and FFI status codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AllBackground => "all_background",
            Error::DegenerateOrientation => "degenerate_orientation",
            Error::CutAboveFingers { .. } => "cut_above_fingers",
            Error::Segmentation { .. } => "segmentation",
            Error::MissingFinger(_) => "missing_finger",
            Error::EmptyShape => "empty_shape",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::DegenerateLabels(_) => "degenerate_labels",
            Error::AllZeroRelevance => "all_zero_relevance",
            Error::BadLayout(_) => "bad_layout",
            Error::EmptyInput => "empty_input",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidConfig(_) => "invalid_config",
            Error::UnknownSubject(_) => "unknown_subject",
            Error::ZeroMean(_) => "zero_mean",
            Error::EmptyScores => "empty_scores",
            Error::Layout { .. } => "layout",
            Error::TooFewSubjects(_) => "too_few_subjects",
            Error::ParamsOutOfRange(_) => "params_out_of_range",
            Error::Io(_) => "io",
            Error::Image(_) => "image",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// Errors caused by an unusable image, as opposed to bad configuration or I/O.
    pub fn is_segmentation_failure(&self) -> bool {
        matches!(
            self,
            Error::AllBackground
                | Error::CutAboveFingers { .. }
                | Error::Segmentation { .. }
                | Error::MissingFinger(_)
                | Error::EmptyShape
        )
    }
}
