//! Shared error type for the whole library.
//!
//! Errors carry enough position information to point at the offending
//! column/cell, and classify themselves into the coarse categories the CLI
//! maps to exit codes (usage / data / numerical).

use thiserror::Error;

/// Coarse classification used by front-ends to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Caller passed arguments that can never work (bad sizes, bad ranges).
    Usage,
    /// The input data is malformed or incomplete.
    Data,
    /// The data is well-formed but numerically degenerate for the request.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),
    #[error("matrix is not symmetric (max asymmetry {max_delta:.3e})")]
    NotSymmetric { max_delta: f64 },
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },
    #[error("column {column} is not standardized (mean {mean:.3e}, norm {norm})")]
    NotStandardized { column: usize, mean: f64, norm: f64 },
    #[error("column is the zero vector")]
    ZeroVector,
    #[error("column {column} is constant; its inefficiency index is infinite (the variable is immobile)")]
    ConstantColumn { column: usize },
    #[error("column {column} is perfectly explained by the others (R\u{030c}\u{b2} = {r_squared}); collinearity index is infinite")]
    PerfectCollinearity { column: usize, r_squared: f64 },
    #[error("column size {column_size} out of range for {total_columns} columns")]
    SizeOutOfRange {
        column_size: usize,
        total_columns: usize,
    },
    #[error("models have different column sizes ({0} vs {1}); comparison is only defined within one size")]
    DifferentColumnSizes(usize, usize),
    #[error("model list mixes column sizes ({0} and {1})")]
    MixedColumnSizes(usize, usize),
    #[error("enumeration of {required} models exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("class needs at least two members, got {0}")]
    ClassTooSmall(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid fixture size: {0}")]
    SizeError(String),
    #[error("selection class is empty; nothing to rank")]
    EmptyClass,
    #[error("dataset has no response column; scoring needs one")]
    NoResponse,
    #[error("invalid model subset: {0}")]
    InvalidModel(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("intercept column missing or not all ones at row {row}")]
    InterceptMissing { row: usize },

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV parse error at row {row}: {detail}")]
    ParseError { row: usize, detail: String },
    #[error("non-numeric cell at row {row}, column {column} ({name:?}): {cell:?}")]
    NonNumericCell {
        row: usize,
        column: usize,
        name: String,
        cell: String,
    },
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("duplicate or reserved header {name:?}")]
    DuplicateHeader { name: String },
    #[error("column {name:?} not found")]
    UnknownColumn { name: String },
    #[error("dataset has {rows} rows but {columns} design columns; a full-model fit needs more rows than columns")]
    TooFewRows { rows: usize, columns: usize },
}

impl Error {
    /// Map the error onto the coarse front-end classification.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DimensionMismatch(_)
            | SizeOutOfRange { .. }
            | DifferentColumnSizes(..)
            | MixedColumnSizes(..)
            | BudgetExceeded { .. }
            | ClassTooSmall(_)
            | IndexOutOfRange(_)
            | SizeError(_)
            | EmptyClass
            | NoResponse
            | InvalidModel(_)
            | ParamOutOfRange(_) => ErrorClass::Usage,
            Io { .. }
            | ParseError { .. }
            | NonNumericCell { .. }
            | RaggedRows { .. }
            | DuplicateHeader { .. }
            | UnknownColumn { .. }
            | TooFewRows { .. }
            | InterceptMissing { .. } => ErrorClass::Data,
            RankDeficient(_)
            | NotSymmetric { .. }
            | NotPositiveDefinite { .. }
            | NotStandardized { .. }
            | ZeroVector
            | ConstantColumn { .. }
            | PerfectCollinearity { .. } => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
