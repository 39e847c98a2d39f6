use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the allowed range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("expected {expected} channel angles, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("operation requires a noiseless instance (sigma = {0})")]
    NoisyInstance(f64),
    #[error("protocol uses {queries} queries; at most {max} are supported here")]
    TooManyQueries { queries: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("protocol has no segments")]
    EmptyProtocol,
}
