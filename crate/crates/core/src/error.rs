use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The data-generating process failed validation (non-causal AR part,
    /// non-invertible MA part, non-summable coefficients, bad variance).
    #[error("invalid process spec: {0}")]
    InvalidSpec(String),

    /// A truncation tail is too large for the requested accuracy.
    #[error("insufficient precision: {what} (required length {required}, cap {cap})")]
    Precision {
        what: String,
        required: usize,
        cap: usize,
    },

    /// The fitting window is empty or ill-formed.
    #[error("invalid window: maximal order {k_n} must satisfy 1 <= K_n < n = {n}")]
    InvalidWindow { k_n: usize, n: usize },

    /// A leading block of the Gram matrix is numerically singular.
    #[error("rank degeneracy in the Gram matrix at order {order}")]
    RankDegeneracy { order: usize },

    /// A log-based criterion was asked to score a zero residual variance.
    #[error("degenerate fit: residual variance is zero at order {order}")]
    DegenerateFit { order: usize },

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),

    /// Too many Monte Carlo replications were dropped as degenerate.
    #[error("{dropped} of {total} replications dropped as rank-degenerate (limit 0.1%)")]
    TooManyDrops { dropped: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
