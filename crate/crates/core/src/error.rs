use thiserror::Error;

/// Errors raised by the matrix kernel, state model, and quantifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsentError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("unknown subsystem label `{0}`")]
    Label(String),

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    Trace { trace: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    Normalization { norm: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("distance {0} is not supported by the optimizers")]
    UnsupportedKind(String),

    #[error("instrument violates completeness (deviation {deviation:e})")]
    Instrument { deviation: f64 },

    #[error("flag `{label}` is not classical (off-diagonal mass {mass:e})")]
    Classicality { label: String, mass: f64 },

    #[error("total dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, CsentError>;
