use thiserror::Error;

/// Errors raised for malformed input. Non-identifiability is never an
/// error; it is reported through [`crate::engine::Status::Fail`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),

    #[error("variable `{variable}` has duplicate domain value `{value}`")]
    DuplicateDomainValue { variable: String, value: String },

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge {0}")]
    DuplicateEdge(String),

    #[error("directed edges form a cycle through `{0}`")]
    Cyclic(String),

    #[error("value `{value}` is not in the domain of `{variable}`")]
    ValueOutOfDomain { variable: String, value: String },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid counterfactual term: {0}")]
    InvalidTerm(String),

    #[error("event set is not ancestrally closed: missing {0}")]
    NotAncestral(String),

    #[error("factor spans more than one c-component: {0}")]
    MultipleComponents(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("no distribution table for intervention {0}")]
    MissingTable(String),

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("division by zero: conditioning on a zero-probability event")]
    DivisionByZero,

    #[error("conditioning event {0} has probability zero")]
    ConditioningOnNullEvent(String),

    #[error("exogenous state space of {0} states exceeds the enumeration limit")]
    StateSpaceTooLarge(u128),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
