use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinjetError {
    #[error("derivative of order {requested} requested from a jet of order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{name}` out of range for dimension {dim}")]
    VariableOutOfRange { name: String, dim: usize },

    #[error("invalid model: {0}")]
    ModelInvalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resonant weight: delta = {delta} equals excluded value {excluded} ({rule}) for m = {m}")]
    ResonantWeight { m: usize, delta: f64, excluded: f64, rule: &'static str },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("point outside the domain: {0}")]
    OutsideDomain(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl FinjetError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            FinjetError::NumericDomain(_)
            | FinjetError::ModelInvalid(_)
            | FinjetError::OutsideDomain(_)
            | FinjetError::OrderExceeded { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, FinjetError>;
