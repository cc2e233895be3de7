use noma_core::NomaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unknown figure {0:?}; expected fig7, fig8-9, fig12-13 or mindet-table")]
    UnknownFigure(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::UnknownFigure(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<NomaError> for CliError {
    fn from(e: NomaError) -> Self {
        let field = match &e {
            NomaError::NonPrime { .. }
            | NomaError::TooSmall { .. }
            | NomaError::Unsupported { .. }
            | NomaError::UnsupportedDimension { .. } => "p",
            NomaError::AlphaOutOfRange(_) => "alpha",
            NomaError::SizeCap { .. } | NomaError::ZeroRate => "m1/m2",
            NomaError::LatticeMismatch => "lattice",
            NomaError::ConfigInvalid { field, .. } => field,
            NomaError::InsufficientData { .. } => return CliError::Failed(e.to_string()),
        };
        CliError::Config {
            field: field.to_string(),
            reason: e.to_string(),
        }
    }
}
