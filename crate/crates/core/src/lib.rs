//! Parameterized verification of MicroSol smart contracts.

pub mod checker;
pub mod frontend;
pub mod localization;
pub mod properties;
pub mod ptg;
pub mod report;
pub mod semantics;
