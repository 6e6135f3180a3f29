use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid topology parameters: {0}")]
    InvalidTopology(String),
    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),
    #[error("empty series: the run horizon must be at least one second")]
    EmptySeries,
    #[error("need at least 2 samples for a confidence interval, got {0}")]
    TooFewSamples(usize),
    #[error("edge list parse error at line {line}: {msg}")]
    EdgeList { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
