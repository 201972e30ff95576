use std::io;
use std::path::PathBuf;

/// Failure of a command; rendered as one machine-parsable line by the binary.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mase_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        CliError::Json { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }

    /// Stable snake_case tag for scripts.
    pub fn kind(&self) -> &'static str {
        use mase_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::NonFinite { .. } => "non_finite",
                E::InvalidGrid { .. } => "invalid_grid",
                E::GridMismatch => "grid_mismatch",
                E::InvalidOrder(_) => "invalid_order",
                E::InvalidConfig(_) => "invalid_config",
                E::IntegrationFailure { .. } => "integration_failure",
                E::Singularity { .. } => "singularity",
                E::Nonexistence(_) => "nonexistence",
                E::EnergyMismatch { .. } => "energy_mismatch",
                E::UndefinedAxis => "undefined_axis",
                E::InsufficientSnapshots { .. } => "insufficient_snapshots",
                E::Support(_) => "support",
            },
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Config(_) => "invalid_config",
            CliError::Format { .. } => "format",
        }
    }

    /// 2 for bad input, 1 for faults met while running.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "io" | "integration_failure" | "singularity" => 1,
            _ => 2,
        }
    }

    /// `error kind=<kind>: <message>` on a single line.
    pub fn one_line(&self) -> String {
        let message = self.to_string().replace(['\n', '\r'], " ");
        format!("error kind={}: {}", self.kind(), message)
    }
}
