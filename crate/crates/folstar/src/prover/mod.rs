//! Proof search: a saturation prover that emits checkable proof objects.
//!
//! [`prove`] runs an instantiation loop (see [`saturate`]) that grows a
//! pool of ground lemmas round by round and asks the linear-arithmetic
//! core whether the pool is contradictory. Every derivation is emitted
//! through a [`ProofBuilder`], so the search cannot take a step the
//! proof system would reject: a successful run *is* its own proof. The
//! loop prefers the starred macro rules; [`expand_proof`] rewrites a
//! finished proof into primitive steps, and [`forward_check`] replays
//! any proof against a problem from scratch.

mod builder;
mod cleanup;
mod macros;
mod saturate;

pub use builder::{Applied, ProofBuilder};
pub use macros::{expand_macro, expand_proof, TempAlloc};

use crate::fol::{
    complement, implies, neg_one_level, Formula, Problem, SearchBounds, Solution,
};
use crate::lia::DEFAULT_THEORY_BUDGET;
use crate::proof::{inputs_match, initial_state, apply_step, Deps, Id, Proof, Rule};

/// Tunables for the saturation loop.
#[derive(Debug, Clone)]
pub struct ProverConfig {
    /// Maximum instantiation rounds before giving up.
    pub max_rounds: usize,
    /// Work budget for every theory-solver call.
    pub theory_budget: u64,
    /// Bounds for the satisfiability probe that runs when a round ends
    /// without a contradiction.
    pub sat_probe: SearchBounds,
    /// Emit the starred macro rules (the default). When false, the
    /// finished proof is expanded into primitive steps.
    pub emit_macros: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            max_rounds: 8,
            theory_budget: DEFAULT_THEORY_BUDGET,
            sat_probe: SearchBounds {
                max_volume: 3,
                value_bound: 8,
            },
            emit_macros: true,
        }
    }
}

/// What a prover run concluded.
#[derive(Debug, Clone)]
pub enum ProveOutcome {
    /// The assertions are contradictory; here is a checkable proof.
    Unsat(Proof),
    /// A finite model satisfies the assertions.
    Sat(Solution),
    /// Neither verdict within the configured budgets; the string says
    /// which budget ran out or why the search stalled.
    Unknown(String),
}

/// How a checker should treat macro steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Validate macro steps directly against their own conditions.
    Native,
    /// Expand macro steps to primitives first, then validate those.
    Expand,
}

/// Why a forward check rejected a proof.
#[derive(Debug, Clone)]
pub struct CheckFailure {
    /// Index of the offending step, when the failure is tied to one.
    pub step: Option<usize>,
    pub reason: String,
}

impl std::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {}: {}", i, self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

/// Prove the problem's assertions unsatisfiable, find a model, or give
/// up with a reason.
pub fn prove(problem: &Problem, cfg: &ProverConfig) -> ProveOutcome {
    let outcome = saturate::run(problem, cfg);
    match outcome {
        ProveOutcome::Unsat(proof) if !cfg.emit_macros => {
            match expand_proof(&proof, cfg.theory_budget) {
                Ok(expanded) => ProveOutcome::Unsat(expanded),
                Err((step, reason)) => ProveOutcome::Unknown(format!(
                    "internal error while expanding step {step}: {reason}"
                )),
            }
        }
        other => other,
    }
}

/// Replay a proof against a problem from an empty state. Succeeds iff
/// the inputs restate the problem, no step dead-ends, and the final
/// step concludes UNSAT.
pub fn forward_check(
    problem: &Problem,
    proof: &Proof,
    theory_budget: u64,
    mode: CheckMode,
) -> Result<(), CheckFailure> {
    inputs_match(problem, proof).map_err(|reason| CheckFailure { step: None, reason })?;
    match proof.steps.last() {
        Some(last) if last.rule == Rule::Unsat => {}
        Some(_) => {
            return Err(CheckFailure {
                step: Some(proof.steps.len() - 1),
                reason: "final step does not conclude UNSAT".into(),
            })
        }
        None => {
            return Err(CheckFailure {
                step: None,
                reason: "proof has no steps".into(),
            })
        }
    }
    match mode {
        CheckMode::Native => {
            let mut state = initial_state();
            for (i, step) in proof.steps.iter().enumerate() {
                state = apply_step(&state, step, theory_budget);
                if let Some(dead) = state.dead {
                    return Err(CheckFailure {
                        step: Some(i),
                        reason: dead.reason,
                    });
                }
            }
            Ok(())
        }
        CheckMode::Expand => expand_proof(proof, theory_budget)
            .map(|_| ())
            .map_err(|(step, reason)| CheckFailure {
                step: Some(step),
                reason,
            }),
    }
}

/// Derive the one-level-pushed form of a negated lemma, repeatedly,
/// until the top of the formula is no longer a pushable negation.
/// Returns the final lemma id and formula; an input that is already in
/// that shape comes back unchanged with no steps emitted.
pub fn derive_nnf(
    b: &mut ProofBuilder,
    id: Id,
    f: &Formula,
) -> Result<(Id, Formula), String> {
    let mut id = id;
    let mut current = f.clone();
    while let Some(pushed) = neg_one_level(&current) {
        let Formula::Not(inner) = &current else {
            unreachable!("neg_one_level only fires on negations");
        };
        let (def, lit) = b.def_get_or_define(&current)?;
        let asserted = b.apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![id],
                d: vec![def],
                ..Deps::default()
            },
            vec![Formula::BoolVar(lit.clone())],
            vec![],
            vec![],
        )?;
        let anchor = Formula::BoolVar(lit);
        let lemmas = vec![
            implies(anchor.clone(), pushed.clone()),
            implies(complement(&anchor), (**inner).clone()),
        ];
        let rewritten = b.apply(
            Rule::RewriteNeg,
            Deps {
                d: vec![def],
                ..Deps::default()
            },
            lemmas,
            vec![],
            vec![],
        )?;
        let cut = b.apply(
            Rule::Unit,
            Deps {
                r: vec![rewritten.lemmas[0], asserted.lemmas[0]],
                ..Deps::default()
            },
            vec![pushed.clone()],
            vec![],
            vec![],
        )?;
        id = cut.lemmas[0];
        current = pushed;
    }
    Ok((id, current))
}
