use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("{field} = {value} is out of range ({expected})")]
    Range {
        field: String,
        value: f64,
        expected: &'static str,
    },

    #[error("singular geometry: {0}")]
    Singularity(String),

    #[error("index {index} out of range for {what} (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("subspace error: {sources} sources need more than {sensors} sensors")]
    Subspace { sources: usize, sensors: usize },

    /// Carries the peak angles (degrees) that were found.
    #[error("degenerate spectrum: wanted {wanted} peaks, found {}", found.len())]
    DegenerateSpectrum { wanted: usize, found: Vec<f64> },

    #[error("ill-conditioned design matrix (condition number {condition:e})")]
    Conditioning { condition: f64 },

    #[error("infeasible budget {budget:e}: minimum achievable power is {bound:e}")]
    Infeasible { budget: f64, bound: f64 },

    #[error("enumeration of 2^{bits} patterns exceeds the 2^24 limit")]
    Size { bits: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::Range { .. } => "range",
            Error::Singularity(_) => "singularity",
            Error::Index { .. } => "index",
            Error::Dimension(_) => "dimension",
            Error::Subspace { .. } => "subspace",
            Error::DegenerateSpectrum { .. } => "degenerate-spectrum",
            Error::Conditioning { .. } => "conditioning",
            Error::Infeasible { .. } => "infeasible",
            Error::Size { .. } => "size",
            Error::Shape(_) => "shape",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn range(field: impl Into<String>, value: f64, expected: &'static str) -> Self {
        Error::Range {
            field: field.into(),
            value,
            expected,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
