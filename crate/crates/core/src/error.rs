use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain has no interior cells")]
    EmptyDomain,
    #[error("domain interior is not connected ({components} components)")]
    DisconnectedDomain { components: usize },
    #[error("invalid domain descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("L^p exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operator has {dof} degrees of freedom, above the dense cap of {cap}; use the iterative heat-flow or DHS paths")]
    CapExceeded { dof: usize, cap: usize },
    #[error("symbol carries derivatives up to order {available}, order {needed} requested")]
    InsufficientDerivatives { needed: usize, available: usize },
    #[error("resolvent solve failed at quadrature node {node}: {reason}")]
    SolverFailure { node: String, reason: String },
    #[error("z = {z} lies on the spectrum")]
    OnSpectrum { z: String },
    #[error("ray angle condition violated: {0}")]
    AngleCondition(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown corpus kind `{0}`")]
    UnknownCorpusKind(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
