use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("no feasible allocation: {0}")]
    Infeasible(String),

    #[error("divisibility violated: {}", join(.0))]
    Divisibility(Vec<Violation>),

    #[error("load undefined for r = {r} and s = {s} (division by l - 1 = 0)")]
    UndefinedLoad { r: usize, s: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("only s = 1 is supported here, got s = {0}")]
    UnsupportedS(usize),

    #[error("field GF(2^{w}) too small for {needed} distinct coefficients")]
    FieldTooSmall { needed: usize, w: u32 },

    #[error("duplicate Vandermonde coefficient {0}")]
    DuplicateCoefficient(u32),

    #[error("singular Vandermonde submatrix")]
    SingularMatrix,

    #[error("symbol count mismatch: expected {expected}, got {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error("decode failure: {0}")]
    DecodeFailure(String),

    #[error("node {node} is missing intermediate value v({q},{n})")]
    MissingValue { node: usize, q: usize, n: usize },

    #[error("node {node} holds a corrupted intermediate value v({q},{n})")]
    PayloadMismatch { node: usize, q: usize, n: usize },

    #[error("replicas of reduce function {q} disagree")]
    ReplicaDisagreement { q: usize },

    #[error("reduce assignment is not weakly symmetric: {0}")]
    AssignmentNotSymmetric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
