use std::path::PathBuf;

use kgfluct_core::Error as CoreError;

use crate::config::ConfigError;

/// Everything a command can fail with, mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("{failed} validation check(s) outside tolerance")]
    ToleranceViolation { failed: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for divergence, 4 for validation
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Divergence { .. } => 3,
                CoreError::InvalidParameter { .. }
                | CoreError::Feasibility { .. }
                | CoreError::Unstable { .. }
                | CoreError::SupportTruncated(_)
                | CoreError::NonPositiveMass(_)
                | CoreError::TooFewMembers(_) => 2,
                _ => 1,
            },
            CliError::ToleranceViolation { .. } => 4,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(CoreError::Feasibility { sites: 3 }).exit_code(), 2);
        assert_eq!(
            CliError::Core(CoreError::Divergence {
                step: 4,
                member: None
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::ToleranceViolation { failed: 1 }.exit_code(), 4);
        assert_eq!(CliError::Core(CoreError::ZeroNorm).exit_code(), 1);
    }
}
