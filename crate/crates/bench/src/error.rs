use thiserror::Error;

use tcac_core::geometry::GeometryError;
use tcac_core::mfield::FieldError;
use tcac_core::pul::PulError;
use tcac_core::timedomain::TimeDomainError;
use tcac_core::tline::TlineError;

/// Process exit code for invalid input (config, fixtures, arguments).
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit code for a numerical failure during a run.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown study `{name}`; expected one of: {}", options.join(", "))]
    UnknownStudy { name: String, options: Vec<&'static str> },
    #[error("fixture {path}: {reason}")]
    Fixture { path: String, reason: String },
    #[error("config {path}: {reason}")]
    Config { path: String, reason: String },
    #[error("{path}: provider `{provider}` does not cover {what}")]
    Coverage { path: String, provider: String, what: String },
    #[error("{0}")]
    Invalid(String),
    #[error("run directory {path} is locked by another writer")]
    Locked { path: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pul(#[from] PulError),
    #[error(transparent)]
    Tline(#[from] TlineError),
    #[error(transparent)]
    TimeDomain(#[from] TimeDomainError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn pul_is_numerical(e: &PulError) -> bool {
    matches!(e, PulError::Singular { .. } | PulError::Residual { .. })
}

impl BenchError {
    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Maps the error to the CLI exit code.
    pub fn exit_code(&self) -> i32 {
        let numerical = match self {
            BenchError::Pul(e) => pul_is_numerical(e),
            BenchError::Tline(TlineError::Pul(e)) => pul_is_numerical(e),
            BenchError::TimeDomain(TimeDomainError::Pul(e)) => pul_is_numerical(e),
            BenchError::TimeDomain(TimeDomainError::Tline(TlineError::Pul(e))) => pul_is_numerical(e),
            _ => false,
        };
        if numerical {
            EXIT_NUMERICAL
        } else {
            EXIT_VALIDATION
        }
    }
}
