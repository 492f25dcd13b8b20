use thiserror::Error;

/// Library-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// A potential definition violated an invariant (degree, sign, α range).
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// A precision context violated an invariant (digits floor, tolerance).
    #[error("invalid precision context: {0}")]
    InvalidPrecision(String),

    /// Malformed textual input (potential blocks, CLI value lists).
    #[error("parse error: {0}")]
    Parse(String),

    /// A quadrature rule failed to converge within the node budget.
    /// Carries the last two estimates so the caller can judge how far off it was.
    #[error("quadrature did not converge within {nodes} nodes (last estimates {previous} and {last})")]
    QuadratureNonConvergence {
        nodes: usize,
        previous: String,
        last: String,
    },

    /// Root bracketing or iteration failed.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// An argument was outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index or size exceeded what a table or rule can provide.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A computation detectably lost precision; the message carries a
    /// digit-increase hint.
    #[error("precision failure: {0}")]
    PrecisionLoss(String),

    /// A least-squares system was rank deficient.
    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    /// The requested potential is not one-cut regular (h touches zero).
    #[error("potential is not one-cut regular: {0}")]
    NotOneCut(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
