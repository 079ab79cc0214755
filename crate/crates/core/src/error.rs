use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("{0} is not an effective model")]
    NotEffectiveModel(&'static str),

    #[error("a boson cutoff is required for the Dicke model")]
    MissingCutoff,

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spectrum has no eigenvectors")]
    MissingEigenvectors,

    #[error("sector multiplicities are exact only up to {max} atoms (requested {requested})")]
    TooManyAtoms { requested: usize, max: usize },

    #[error("boson cutoff did not converge below the hard cap {cap} (last cutoff {last}, |df| = {delta:e})")]
    CutoffCapExceeded { cap: usize, last: usize, delta: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
