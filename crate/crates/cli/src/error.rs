use enfix::{EnrichmentError, SolveError, SpaceError};
use serde::Serialize;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const PRECONDITION: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const NOT_CERTIFIABLE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Precondition(String),
    #[error("no admissible certificate: best grid point b = {b}, c = {c}")]
    NotCertifiable { b: f64, c: f64 },
    #[error(transparent)]
    Enrichment(#[from] EnrichmentError),
    #[error(transparent)]
    Solve(SolveError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::PreconditionFailed { .. } | SolveError::DominanceFailed { .. } => {
                CliError::Precondition(e.to_string())
            }
            other => CliError::Solve(other),
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Invalid(_) => "invalid-problem",
            CliError::Io(_) => "io",
            CliError::Precondition(_) => "precondition-failed",
            CliError::NotCertifiable { .. } => "not-certifiable",
            CliError::Enrichment(_) => "enrichment",
            CliError::Solve(SolveError::BackVerificationFailed { .. }) => "back-verification-failed",
            CliError::Solve(_) => "solve",
            CliError::Space(_) => "space",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => exit::PRECONDITION,
            CliError::NotCertifiable { .. } => exit::NOT_CERTIFIABLE,
            CliError::Solve(SolveError::BackVerificationFailed { .. }) => exit::NOT_CONVERGED,
            _ => exit::USAGE,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("error json")
    }
}
