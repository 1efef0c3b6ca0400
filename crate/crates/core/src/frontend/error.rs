use super::ast::Pos;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: syntax error: {message}{}", expected_suffix(.expected))]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
    /// Tokens that would have been accepted at `pos`, if known.
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

/// Stable identifiers for every validation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DuplicateContract,
    DuplicateStateVar,
    DuplicateFunction,
    DuplicateLocal,
    ReservedName,
    UnknownVariable,
    UnknownFunction,
    UnknownContract,
    TypeMismatch,
    AddressArithmetic,
    NoNumericCast,
    MappingShape,
    MappingNotState,
    IndexNonMapping,
    IndexArity,
    CallAsValue,
    ArityMismatch,
    ContractParam,
    NewInConstructorOnly,
    NewInLoop,
    RecursiveInstantiation,
    InvalidAssignTarget,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::DuplicateContract => "duplicate-contract",
            Rule::DuplicateStateVar => "duplicate-state-var",
            Rule::DuplicateFunction => "duplicate-function",
            Rule::DuplicateLocal => "duplicate-local",
            Rule::ReservedName => "reserved-name",
            Rule::UnknownVariable => "unknown-variable",
            Rule::UnknownFunction => "unknown-function",
            Rule::UnknownContract => "unknown-contract",
            Rule::TypeMismatch => "type-mismatch",
            Rule::AddressArithmetic => "address-arithmetic",
            Rule::NoNumericCast => "no-numeric-cast",
            Rule::MappingShape => "mapping-shape",
            Rule::MappingNotState => "mapping-not-state",
            Rule::IndexNonMapping => "index-non-mapping",
            Rule::IndexArity => "index-arity",
            Rule::CallAsValue => "call-as-value",
            Rule::ArityMismatch => "arity-mismatch",
            Rule::ContractParam => "contract-param",
            Rule::NewInConstructorOnly => "new-in-constructor-only",
            Rule::NewInLoop => "new-in-loop",
            Rule::RecursiveInstantiation => "recursive-instantiation",
            Rule::InvalidAssignTarget => "invalid-assign-target",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: validation error [{rule}]: {message}")]
pub struct ValidationError {
    pub rule: Rule,
    pub pos: Pos,
    pub message: String,
}

impl ValidationError {
    pub fn new(rule: Rule, pos: Pos, message: impl Into<String>) -> Self {
        Self {
            rule,
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
}
