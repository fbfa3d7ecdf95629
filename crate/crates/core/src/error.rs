use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid tract set: {0}")]
    InvalidTractSet(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("constant field: {0}")]
    ConstantField(String),

    #[error("insufficient observations: need at least {needed}, got {got}")]
    InsufficientObservations { needed: usize, got: usize },

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid intensity: {0}")]
    InvalidIntensity(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI error document.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCoordinate(_) => "invalid_coordinate",
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::InvalidTractSet(_) => "invalid_tract_set",
            Error::Schema(_) => "schema",
            Error::Row { .. } => "row",
            Error::EmptyInput(_) => "empty_input",
            Error::Alignment(_) => "alignment",
            Error::ConstantField(_) => "constant_field",
            Error::InsufficientObservations { .. } => "insufficient_observations",
            Error::DegenerateWeights(_) => "degenerate_weights",
            Error::InvalidWeights(_) => "invalid_weights",
            Error::InvalidIntensity(_) => "invalid_intensity",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
