use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("missing config key {0:?}")]
    MissingKey(String),
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error(transparent)]
    Core(#[from] randiso::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
