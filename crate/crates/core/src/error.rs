use thiserror::Error;

/// Errors produced by the localization library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AoaError {
    /// A sensor coincides with the source (or an iterate), or the geometry is
    /// otherwise unusable for the requested operation.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A linear solve was rejected because the matrix is singular, indefinite
    /// or too badly conditioned. `cond` is the eigenvalue-ratio estimate
    /// (`inf` when the matrix is singular or indefinite).
    #[error("ill-conditioned system (condition estimate {cond:e})")]
    IllConditioned { cond: f64 },

    /// The scatter matrix of a generalized eigenvalue pencil is not positive definite.
    #[error("scatter matrix is not positive definite")]
    InvalidScatter,

    /// The Fisher information is singular: the source is not identifiable from
    /// this geometry.
    #[error("unidentifiable geometry: Fisher information is singular (condition estimate {cond:e})")]
    Unidentifiable { cond: f64 },

    /// The Cramér-Rao bound is undefined (zero noise).
    #[error("CRLB undefined: {0}")]
    UndefinedCrlb(String),

    /// An argument lies outside its valid domain.
    #[error("value out of range: {0}")]
    OutOfRange(String),

    /// Caller-side misuse (empty inputs, mismatched dimensions, bad scenario).
    #[error("invalid input: {0}")]
    Usage(String),
}

impl AoaError {
    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            AoaError::DegenerateGeometry(_) => "degenerate-geometry",
            AoaError::IllConditioned { .. } => "ill-conditioned",
            AoaError::InvalidScatter => "invalid-scatter",
            AoaError::Unidentifiable { .. } => "unidentifiable-geometry",
            AoaError::UndefinedCrlb(_) => "undefined-crlb",
            AoaError::OutOfRange(_) => "out-of-range",
            AoaError::Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = AoaError> = std::result::Result<T, E>;
