use thiserror::Error;

/// Errors produced while parsing, analysing or relaxing a polynomial program.
#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent length {found} does not match variable count {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("negative exponent {value} in {context}")]
    NegativeExponent { value: i64, context: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("relaxation order {order} is below the minimal order {min_order}")]
    OrderTooLow { order: u32, min_order: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("SDPA parse error at line {line}: {msg}")]
    Sdpa { line: usize, msg: String },

    #[error("moment equalities are inconsistent; the relaxation is infeasible")]
    InconsistentEqualities,

    #[error("optimality gap is undefined for a zero reference value")]
    UndefinedGap,

    #[error("solver failed at step {step}: {msg}")]
    Solver { step: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
