use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field size {0}: expected one of 2, 3, 5, 7")]
    UnsupportedField(u32),
    #[error("element {value} is not a canonical residue modulo {q}")]
    NonCanonicalEntry { value: u32, q: u8 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: u8, right: u8 },
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("enumeration budget exceeded: {required} items required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("{name} is defined over F_{expected}, got F_{got}")]
    WrongField { name: String, expected: u8, got: u8 },
    #[error("operation requires a linear space")]
    NotLinear,
    #[error("inconsistent map values: {0}")]
    InconsistentMap(String),
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("internal verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
