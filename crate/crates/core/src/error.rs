use serde::{Deserialize, Serialize};
use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Diagnostics attached to a pipeline stage that ran to completion without
/// producing a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub reason: String,
    pub witness: Option<String>,
}

impl Failure {
    pub fn new(stage: impl Into<String>, reason: impl Into<String>) -> Self {
        Failure {
            stage: stage.into(),
            reason: reason.into(),
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: impl fmt::Debug) -> Self {
        self.witness = Some(format!("{witness:?}"));
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {}", self.stage, self.reason)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness: {w})")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("impossible state: {0}")]
    ImpossibleState(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Failed(Failure),
    #[error("cancelled")]
    Cancelled,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn failed(stage: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Failed(Failure::new(stage, reason))
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Failed(_) | Error::Cancelled | Error::ImpossibleState(_) => 1,
            _ => 2,
        }
    }
}

impl From<Failure> for Error {
    fn from(f: Failure) -> Self {
        Error::Failed(f)
    }
}
