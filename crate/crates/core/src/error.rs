use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// Structural validation failed; one entry per violation.
    #[error("invalid {what}: {}", .violations.join("; "))]
    Invalid {
        what: &'static str,
        violations: Vec<String>,
    },

    #[error("resource cap `{cap}` ({limit}) exceeded while {stage}")]
    ResourceCap {
        cap: &'static str,
        limit: u64,
        stage: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn cap(cap: &'static str, limit: u64, stage: impl Into<String>) -> Error {
        Error::ResourceCap {
            cap,
            limit,
            stage: stage.into(),
        }
    }
}
