//! Post-refutation cleanup.
//!
//! The saturation loop derives eagerly, so a finished proof usually
//! carries steps and resources the final contradiction never uses. The
//! cleanup walks backwards from the end marking needed resources, drops
//! steps that add none of them, narrows the additions of the rules whose
//! shape permits a subset (conjunct extraction and the theory-boundary
//! shipments), and renumbers the survivors densely. Input steps always
//! survive whole: the trimmed proof must still state the problem it
//! refutes.

use std::collections::BTreeSet;

use crate::proof::{renumber, Id, Rule, Step};

/// May this rule's additions be narrowed to the needed subset?
fn subset_prunable(rule: Rule) -> bool {
    matches!(
        rule,
        Rule::RewriteAndStar | Rule::RewriteAnd | Rule::FolToT | Rule::TToFol
    )
}

/// Drop unused steps and additions, keeping every Input step, and
/// renumber densely.
pub(super) fn cleanup(steps: &[Step]) -> Vec<Step> {
    let mut needed: BTreeSet<Id> = BTreeSet::new();
    let mut kept: Vec<Step> = Vec::new();
    for step in steps.iter().rev() {
        let keep_whole = step.rule == Rule::Unsat || step.rule == Rule::Input;
        let adds_needed = step.added_ids().any(|id| needed.contains(&id));
        if !keep_whole && !adds_needed {
            continue;
        }
        let mut s = step.clone();
        if !keep_whole && subset_prunable(s.rule) {
            s.add_r.retain(|(id, _)| needed.contains(id));
            s.add_f.retain(|(id, _)| needed.contains(id));
        }
        for id in s.deps.r.iter().chain(&s.deps.f).chain(&s.deps.d) {
            needed.insert(*id);
        }
        kept.push(s);
    }
    kept.reverse();
    renumber(&kept)
}
