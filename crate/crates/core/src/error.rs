use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("signal has {len} samples, fewer than the {window}-sample window")]
    SignalTooShort { len: usize, window: usize },

    #[error("invalid analysis parameters: {0}")]
    InvalidAnalysis(String),

    #[error("spectrogram shapes differ: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("entropy undefined for an all-zero spectrogram")]
    UndefinedEntropy,

    #[error("correlation undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("recording {index} (inlet {inlet_mm} mm, outlet {outlet_mm} mm): {source}")]
    Recording {
        index: usize,
        inlet_mm: f64,
        outlet_mm: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported model format version {0}")]
    ModelVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "out_of_range",
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::Domain(_) => "domain",
            Error::SignalTooShort { .. } => "signal_too_short",
            Error::InvalidAnalysis(_) => "invalid_analysis",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::UndefinedEntropy => "undefined_entropy",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::Recording { .. } => "recording",
            Error::ModelVersion(_) => "model_version",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Wav(_) => "wav",
        }
    }
}
