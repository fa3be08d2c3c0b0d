use std::path::PathBuf;

/// Errors of the simulation harness, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl SimError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Numerical(_) => 3,
            SimError::Io { .. } | SimError::Format { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }
}

impl From<dmimo_core::Error> for SimError {
    fn from(e: dmimo_core::Error) -> Self {
        use dmimo_core::Error as E;
        match e {
            E::Config(_) | E::Argument(_) => SimError::Config(e.to_string()),
            E::RankDeficient { .. } | E::Infeasible { .. } | E::NoUsableChannel | E::NoConvergence { .. } => {
                SimError::Numerical(e.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
