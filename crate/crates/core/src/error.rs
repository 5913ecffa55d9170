use thiserror::Error;

use crate::instance::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("unknown index {0}")]
    UnknownIndex(usize),
    #[error("index {0} is already built")]
    AlreadyBuilt(usize),
    #[error("not a permutation of all indexes: {0}")]
    NotAPermutation(String),
    #[error("position out of range: {0}")]
    PositionOutOfRange(String),
    #[error("constraint set is cyclic")]
    CyclicConstraints,
    #[error("instance too large for exhaustive enumeration ({0} indexes, limit {1})")]
    TooLarge(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsatisfiable profile: {0}")]
    Unsatisfiable(String),
    #[error("start deployment violates constraints: {0}")]
    InfeasibleStart(String),
}

pub type Result<T> = std::result::Result<T, Error>;
