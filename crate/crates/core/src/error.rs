use thiserror::Error;

use crate::diagram::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid node identifier `{0}` (expected [A-Za-z0-9_]+)")]
    InvalidIdentifier(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("diagram is invalid: {}", format_violations(.0))]
    InvalidDiagram(Vec<Violation>),

    #[error("malformed query: {0}")]
    MalformedQuery(String),

    #[error("walk is not valid in this diagram: {0}")]
    InvalidWalk(String),

    #[error("walk is not open given the conditioning set")]
    NotOpen,

    #[error("open path enumeration exceeded the cap of {0} paths")]
    EnumerationCap(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("cannot name split node for edge {tail} -> {head}: all candidates collide")]
    NameCollision { tail: String, head: String },

    #[error("could not draw a positive definite error covariance after {0} attempts")]
    GeneratorExhausted(usize),

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("factorization not applicable: {0}")]
    NotApplicable(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
