//! Error taxonomy shared by every module.
//!
//! Precondition-style failures (bad dimensions, malformed input, violated
//! contracts) are distinguished from numerical failures (divergent series,
//! vanishing margins, exhausted band budgets) so that callers such as the
//! CLI can map them onto distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular element")]
    Singular,

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("divergent series: {0}")]
    Divergence(String),

    #[error("band budget exceeded: {0}")]
    BandBudget(String),

    #[error("ill-conditioned: margin {margin:.6e} at theta {witness:.8}")]
    IllConditioned { margin: f64, witness: f64 },

    #[error("grid misaligned: {0}")]
    Alignment(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("pointwise singular value at t = {0:.8}")]
    PointwiseSingular(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for input/contract violations (as opposed to numerical outcomes).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::Domain(_)
                | Error::Precondition(_)
                | Error::Alignment(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
