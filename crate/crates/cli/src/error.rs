use dtunnel_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Regime(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// 0 ok, 1 parse, 2 regime, 3 singular, 4 validation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io { .. } => 1,
            CliError::Regime(_) => 2,
            CliError::Singular(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Core(e) => match e {
                CoreError::RegimeViolation(_) => 2,
                CoreError::SingularParameters(_)
                | CoreError::AmbiguousRegime { .. }
                | CoreError::NonPositiveDelta(_) => 3,
                CoreError::StepSizeUnderflow { .. }
                | CoreError::NonFiniteState(_)
                | CoreError::CflViolation { .. }
                | CoreError::NegativeDensity { .. }
                | CoreError::MassLoss(_) => 4,
                _ => 1,
            },
        }
    }

    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
