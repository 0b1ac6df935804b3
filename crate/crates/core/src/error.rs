use thiserror::Error;

/// Failure modes shared by every solver in the crate.
///
/// `Precondition` carries the name of the hypothesis that failed so that
/// callers (the CLI in particular) can report it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("({condition}) {detail}")]
    Precondition { condition: String, detail: String },

    #[error("{stage} did not converge: {detail}")]
    NonConvergence { stage: String, detail: String },

    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: String, detail: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(condition: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition { condition: condition.into(), detail: detail.into() }
    }

    pub fn diverged(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::NonConvergence { stage: stage.into(), detail: detail.into() }
    }

    pub fn numerical(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numerical { stage: stage.into(), detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
