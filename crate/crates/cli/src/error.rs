use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("CONFIG_INVALID: {message}{}", location(*line, *column))]
    ConfigInvalid { message: String, line: usize, column: usize },
    #[error("STAGE_FAILED({stage}): {cause}")]
    StageFailed { stage: String, cause: String },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] mincurv::Error),
}

fn location(line: usize, column: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" (line {line}, column {column})")
    }
}

impl HarnessError {
    pub fn config(message: impl Into<String>) -> Self {
        Self::ConfigInvalid { message: message.into(), line: 0, column: 0 }
    }

    pub fn stage(stage: impl Into<String>, cause: impl ToString) -> Self {
        Self::StageFailed { stage: stage.into(), cause: cause.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
