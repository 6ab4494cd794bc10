use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix exponent has a complex or defective spectrum: {0}")]
    UnsupportedSpectrum(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge: relative change {rel_change:.3e} between resolutions {resolution} and {}", resolution + 1)]
    Quadrature { resolution: u32, rel_change: f64 },

    #[error("circulant embedding is not nonnegative definite (most negative eigenvalue {min_eigenvalue:.6e}, relative {relative:.3e}, embedding size {size})")]
    Embedding {
        min_eigenvalue: f64,
        relative: f64,
        size: usize,
    },

    #[error("sample path has the wrong kind: expected {expected}")]
    Kind { expected: &'static str },

    #[error("insufficient data: {reason} (largest achievable octave: {j_max_achievable})")]
    InsufficientData {
        reason: String,
        j_max_achievable: u32,
    },

    #[error("unsupported filter: {0}")]
    UnsupportedFilter(String),

    #[error("non-positive eigenvalue {value:.6e} of the wavelet variance at scale 2^{octave}")]
    NonPositiveEigenvalue { octave: u32, value: f64 },

    #[error("off-diagonal entry is zero; the angle estimator is undefined")]
    DegenerateOffDiagonal,

    #[error("Omega series tail not converged at z_max = {z_max} (tail ratio {ratio:.3e})")]
    TailNotConverged { z_max: i64, ratio: f64 },

    #[error("B(2^{octave}) is not positive definite (det = {det:.6e}, b22 = {b22:.6e})")]
    SingularB { octave: u32, det: f64, b22: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedSpectrum(_) => "UnsupportedSpectrum",
            Error::Shape(_) => "ShapeError",
            Error::Singular(_) => "Singular",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Quadrature { .. } => "QuadratureError",
            Error::Embedding { .. } => "EmbeddingError",
            Error::Kind { .. } => "KindError",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::UnsupportedFilter(_) => "UnsupportedFilter",
            Error::NonPositiveEigenvalue { .. } => "NonPositiveEigenvalue",
            Error::DegenerateOffDiagonal => "DegenerateOffDiagonal",
            Error::TailNotConverged { .. } => "TailNotConverged",
            Error::SingularB { .. } => "SingularB",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }

    /// True for errors caused by bad input or configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::Parse(_) | Error::Io(_) | Error::UnsupportedFilter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
