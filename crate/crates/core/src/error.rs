use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("field order {0} exceeds the supported bound of 32")]
    FieldTooLarge(usize),
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("element {element} is outside a field of order {order}")]
    ElementOutOfRange { element: usize, order: usize },

    #[error("entry {value} at row {row}, column {col} exceeds level count {levels}")]
    LevelOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        levels: usize,
    },
    #[error("column {col} does not have equally replicated levels")]
    UnbalancedColumn { col: usize },
    #[error("grid {cells} does not divide level count {levels}")]
    NonDivisibleGrid { cells: usize, levels: usize },
    #[error("not a Latin hypercube: {0}")]
    NotLatinHypercube(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("array too large: {0}")]
    TooLarge(String),
    #[error("linear column specification is all zero")]
    AllZeroSpec,
    #[error("strength {strength} unsupported for s = {s}")]
    StrengthUnsupported { strength: usize, s: usize },
    #[error("run size {0} is not a perfect square")]
    NotSquareRunSize(usize),
    #[error("array is not in block form: {0}")]
    NotBlockForm(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header claims strength {claimed} but the array has strength {actual}")]
    StrengthMismatch { claimed: usize, actual: usize },

    #[error("cell (row {row}, column {col}) of B is not a permutation of 0..{lambda}")]
    CellNotPermutation {
        row: usize,
        col: usize,
        lambda: usize,
    },
    #[error("(a{i}, a{j}, b{k}) is not a full factorial")]
    PreconditionFailed { i: usize, j: usize, k: usize },
    #[error("input array is not of strength 3")]
    NotStrength3,
    #[error("u = {0} is too small, need u >= 3")]
    UTooSmall(usize),
    #[error("constructed design failed verification: {0}")]
    VerificationFailed(String),

    #[error("omega = {omega} exceeds the number of qualitative factors q = {q}")]
    OmegaExceedsQ { omega: usize, q: usize },
    #[error("run size {n} is not divisible by s^omega = {divisor}")]
    RunSizeNotDivisible { n: usize, divisor: usize },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("bundle error: {0}")]
    Bundle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
