use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no sign change on the initial bracket: {0}")]
    NoSignChange(String),
    #[error("degenerate digit system: every expansion has the same value")]
    Degenerate,
    #[error("size guard: {0}")]
    Guard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
