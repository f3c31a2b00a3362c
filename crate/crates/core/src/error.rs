use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("quadrature did not converge: value {value}, error {error:e} > requested {requested:e}")]
    Quadrature { value: f64, error: f64, requested: f64 },
    #[error("search budget exceeded at depth {depth} ({reason})")]
    Budget { depth: usize, reason: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing table entries: {0:?}")]
    MissingEntries(Vec<(u32, u32)>),
    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
