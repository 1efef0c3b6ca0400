//! Lexing, parsing, validation and lowering of MicroSol source.

pub mod ast;
mod error;
pub mod ir;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use error::{FrontendError, Rule, SyntaxError, ValidationError};
pub use parser::{parse, KEYWORDS};
pub use printer::{expr_to_string, print};
pub use validate::{
    validate, ArgSlot, ContractBundle, InstanceInfo, ParamSlot, StateSlot, TxLayout,
    VariableLayout, ROOT_ADDRESS,
};

/// Canonical JSON rendering of a syntax tree. Keys appear in declaration
/// order, so equal trees print identically.
pub fn ast_to_json(unit: &ast::SourceUnit) -> String {
    serde_json::to_string_pretty(unit).expect("syntax trees always serialize")
}
