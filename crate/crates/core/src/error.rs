// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside domain: {0}")]
    OutsideDomain(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported trajectory: {0}")]
    UnsupportedTrajectory(String),

    /// Evaluation landed on a removable singularity of a closed form; the caller must
    /// request the analytic limit branch explicitly.
    #[error("removable singularity at nu = {nu} ({resonance} resonance); request the resonant limit branch")]
    RemovableSingularity { nu: f64, resonance: &'static str },

    #[error("validation failed:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::OutsideDomain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Prefixes the message with `context`, keeping the kind (and exit code).
    pub fn context(self, context: &str) -> Self {
        match self {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{context}: {m}")),
            Error::OutsideDomain(m) => Error::OutsideDomain(format!("{context}: {m}")),
            Error::NumericalFailure(m) => Error::NumericalFailure(format!("{context}: {m}")),
            Error::UnsupportedTrajectory(m) => Error::UnsupportedTrajectory(format!("{context}: {m}")),
            Error::Validation(list) => Error::Validation(list.into_iter().map(|m| format!("{context}: {m}")).collect()),
            Error::Parse(m) => Error::Parse(format!("{context}: {m}")),
            other => other,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::OutsideDomain(_)
            | Error::UnsupportedTrajectory(_)
            | Error::RemovableSingularity { .. }
            | Error::Validation(_)
            | Error::Parse(_) => 2,
            Error::NumericalFailure(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
