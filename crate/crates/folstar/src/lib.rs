//! Proof-generating unsatisfiability engine for FOL* — first-order logic
//! whose quantifiers range over *relational objects*: typed records of
//! integer attributes plus a boolean `ext` flag marking existence.
//!
//! The crate is organised as a pipeline:
//!
//! * [`fol`] — syntax, parsing, printing, negation normal form, semantics
//!   (evaluation, grounding, brute-force model search).
//! * [`lia`] — the background theory: a deterministic, budget-limited
//!   decision procedure for quantifier-free linear integer arithmetic,
//!   with unsat cores, core shrinking, and SMT-LIB export.
//! * [`proof`] — the proof object model: resources (lemmas, facts,
//!   side-effect objects), derivation steps, postcondition checking, and
//!   the line-oriented JSON proof file format.
//! * [`prover`] — proof construction: quantifier instantiation with
//!   derivation macros, iterative deepening, the SAT probe, and forward
//!   replay checking.
//! * [`checker`] — backward checking: core extraction from the final
//!   UNSAT step, dependency minimization, and proof trimming.
//! * [`diagnosis`] — atom-level unsat diagnosis: which input atoms the
//!   proof actually uses, and the weakened formula that keeps only those.

pub mod checker;
pub mod diagnosis;
pub mod fol;
pub mod lia;
pub mod proof;
pub mod prover;
