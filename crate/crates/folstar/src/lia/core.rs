//! Entailment queries and unsatisfiable-core minimization, built on
//! `check_sat`.

use crate::fol::{complement, Formula};

use super::solver::{check_sat, TheoryVerdict};

/// Three-valued entailment verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    Holds,
    Fails,
    Unknown,
}

/// Does the conjunction of `facts` entail `goal`? Decided by refutation:
/// `facts ∧ ¬goal` unsatisfiable.
pub fn entails(facts: &[Formula], goal: &Formula, budget: u64) -> Entailment {
    let mut fs: Vec<Formula> = facts.to_vec();
    fs.push(complement(goal));
    match check_sat(&fs, budget) {
        TheoryVerdict::Unsat(_) => Entailment::Holds,
        TheoryVerdict::Sat(_) => Entailment::Fails,
        TheoryVerdict::Unknown => Entailment::Unknown,
    }
}

/// Shrink an unsatisfiable set to a 1-minimal core by deletion: drop each
/// member in turn and keep the drop whenever the rest stays unsatisfiable.
/// Members whose removal makes the verdict `Unknown` are kept, so the
/// result is always a genuine core (possibly non-minimal under budget
/// pressure). Returns indices into `fs`, ascending.
///
/// Precondition: `check_sat(fs)` is unsatisfiable within `budget`.
pub fn minimize_core(fs: &[Formula], budget: u64) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..fs.len()).collect();
    let mut i = 0;
    while i < kept.len() {
        let candidate: Vec<Formula> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &k)| fs[k].clone())
            .collect();
        if check_sat(&candidate, budget).is_unsat() {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}
