use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which structural property of a chain failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    RowSum { row: usize, sum: f64 },
    Negative { what: &'static str, row: usize, col: usize, value: f64 },
    StationarySum { sum: f64 },
    DetailedBalance { x: usize, y: usize, gap: f64 },
    Reducible { unreached: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::RowSum { row, sum } => {
                write!(f, "row sum: row {row} sums to {sum:e}, expected 1")
            }
            Violation::Negative { what, row, col, value } => {
                write!(f, "negativity: {what} entry ({row}, {col}) is {value:e}")
            }
            Violation::StationarySum { sum } => {
                write!(f, "stationary sum: pi sums to {sum:e}, expected 1")
            }
            Violation::DetailedBalance { x, y, gap } => write!(
                f,
                "detailed balance: |pi({x})P({x},{y}) - pi({y})P({y},{x})| = {gap:e}"
            ),
            Violation::Reducible { unreached } => write!(
                f,
                "reducibility: state {unreached} is not mutually reachable from state 0"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(Violation),

    #[error("degenerate stationary measure: {0}")]
    DegenerateMeasure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::DegenerateMeasure(_) => 3,
            _ => 2,
        }
    }
}
