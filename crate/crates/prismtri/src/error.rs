//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument for an operation (bad index, malformed chord, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A size guard was exceeded. Callers may override guards explicitly.
    #[error("capacity guard exceeded: {0}")]
    Capacity(String),

    /// An internal structural assertion failed, indicating a bug in an
    /// upstream component rather than bad user input.
    #[error("structural assertion failed: {0}")]
    Structural(String),

    /// The maximal-witness constructor exhausted its search family without
    /// reaching the target size.
    #[error("construction failed: best size {best} < target {target}")]
    Construction { best: usize, target: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
