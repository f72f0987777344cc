use thiserror::Error;

/// Everything that can stop a run, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 is success; 1 covers bad input and configuration; 2 a fit that failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<ordscore::Error> for CliError {
    fn from(e: ordscore::Error) -> Self {
        use ordscore::Error as E;
        match e {
            E::SingularDesign { .. }
            | E::IrlsDidNotConverge { .. }
            | E::DegenerateScores(_)
            | E::InvalidProbability(_)
            | E::InvalidShape(_) => CliError::Numerical(e.to_string()),
            E::InvalidResponse { .. } | E::InsufficientData { .. } => CliError::Data(e.to_string()),
            E::InvalidFactor { .. }
            | E::InvalidDegree { .. }
            | E::InvalidKnots(_)
            | E::TooFewLevels { .. }
            | E::DimensionMismatch(_) => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
