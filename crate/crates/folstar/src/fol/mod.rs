//! FOL* syntax and semantics.
//!
//! A *signature* declares classes of relational objects; every attribute is
//! an integer, and every object carries an implicit boolean `ext` attribute
//! marking whether it exists in a solution. Formulas quantify over objects
//! of a class, never over bare integers.

mod eval;
mod ground;
mod nnf;
mod parse;
mod print;
mod search;
mod syntax;

pub use eval::{evaluate, DomainObject, EvalError, Solution, Valuation};
pub use ground::{ground, GroundError};
pub use nnf::{is_nnf, neg_one_level, to_nnf};
pub use parse::{parse_formula, parse_problem, parse_raw_formula, ParseError};
pub use print::render;
pub use search::{brute_force_sat, solution_volume, SearchBounds};
pub use syntax::{
    and_of, complement, implies, or_of, Binder, CmpOp, Formula, Problem, Signature, Term,
};
