//! Ground theory engine: linear integer arithmetic with boolean
//! structure, existence flags, and boolean variables.

mod core;
mod linear;
mod simplex;
mod smtlib;
mod solver;

pub use core::{entails, minimize_core, Entailment};
pub use linear::{attr_key, LinAtom, LinExpr};
pub use smtlib::{export_smtlib, SmtlibError};
pub use solver::{check_sat, Model, TheoryVerdict, DEFAULT_THEORY_BUDGET};
