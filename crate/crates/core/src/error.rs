use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The photon-number cutoff leaves more probability behind than allowed.
    #[error(
        "truncation error: residual weight {residual:.3e} exceeds tolerance {tolerance:.3e} \
         at n_max = {n_max}"
    )]
    Truncation {
        residual: f64,
        tolerance: f64,
        n_max: usize,
    },

    /// Accumulated matrix violates a structural invariant it must hold.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A sweep cell failed; carries the offending coordinates.
    #[error("cell (x = {x}, y = {y}) failed: {source}")]
    Cell {
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
