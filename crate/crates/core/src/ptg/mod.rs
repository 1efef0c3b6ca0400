//! Participation topology: which users a transaction can communicate with.
//!
//! [`taint_summary`] finds the clients, roles and literal addresses that can
//! reach an address-sensitive operation, [`build_ptg`] turns that into a
//! graph, and [`semantic_pt`] computes the exact participants of one action
//! by brute force so the graph can be checked against it.

mod graph;
mod semantic;
mod taint;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::semantics::SemanticsError;

pub use graph::{build_ptg, Edge, Label, PtGraph, Vertex};
pub use semantic::{
    semantic_pt, semantic_pt_with_budget, Participation, SemanticPt, DEFAULT_PT_BUDGET,
};
pub use taint::taint_summary;

/// Address sources that reach a sink.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TaintSummary {
    /// Client indices.
    pub args: BTreeSet<usize>,
    /// Role indices.
    pub roles: BTreeSet<usize>,
    /// Literal addresses.
    pub lits: BTreeSet<u64>,
}

#[derive(Debug, Error)]
pub enum PtError {
    #[error("enumeration needs {needed} executions, over the budget of {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[cfg(test)]
mod tests;
