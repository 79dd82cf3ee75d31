//! Proof states and the state-transition function.

use std::collections::{BTreeMap, BTreeSet};

use crate::fol::Formula;

use super::pc::pc_check;
use super::{Deps, Id, SeoItem, Step};

/// Why a state became a dead end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadEnd {
    /// Step that failed to apply.
    pub step: usize,
    pub reason: String,
}

impl std::fmt::Display for DeadEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

/// A proof state: lemmas `R⁺`, facts `F`, objects and definitions `D`,
/// plus bookkeeping for freshness and definition lookup. Dead ends are
/// in-band (`dead` is set and absorbing).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct State {
    pub lemmas: BTreeMap<Id, Formula>,
    pub facts: BTreeMap<Id, Formula>,
    pub seos: BTreeMap<Id, SeoItem>,
    pub dead: Option<DeadEnd>,
    names: BTreeSet<String>,
    defs_by_formula: BTreeMap<Formula, Id>,
    defs_by_lit: BTreeMap<String, Id>,
    objects_by_name: BTreeMap<String, Id>,
}

impl State {
    /// Is `name` free for a fresh literal or object?
    pub fn is_fresh_name(&self, name: &str) -> bool {
        !self.names.contains(name)
    }

    /// The definition binding id for `formula`, if registered.
    pub fn def_of_formula(&self, formula: &Formula) -> Option<Id> {
        self.defs_by_formula.get(formula).copied()
    }

    /// The definition binding id for literal `lit`, if registered.
    pub fn def_of_lit(&self, lit: &str) -> Option<Id> {
        self.defs_by_lit.get(lit).copied()
    }

    /// The object entry id for `name`, if present.
    pub fn object_id(&self, name: &str) -> Option<Id> {
        self.objects_by_name.get(name).copied()
    }

    /// All `(name, class)` object entries, in id order.
    pub fn objects(&self) -> Vec<(String, String)> {
        self.seos
            .values()
            .filter_map(|item| match item {
                SeoItem::Obj { name, class } => Some((name.clone(), class.clone())),
                SeoItem::Def { .. } => None,
            })
            .collect()
    }

    /// Smallest lemma id whose formula equals `f`, if any.
    pub fn lemma_with(&self, f: &Formula) -> Option<Id> {
        self.lemmas
            .iter()
            .find(|(_, g)| *g == f)
            .map(|(id, _)| *id)
    }

    /// Is `id` present in any of the three stores?
    pub fn has_id(&self, id: Id) -> bool {
        self.lemmas.contains_key(&id) || self.facts.contains_key(&id) || self.seos.contains_key(&id)
    }

    fn note_names(&mut self, f: &Formula) {
        f.all_names(&mut self.names);
    }
}

/// The empty state (`R⁺₀` is populated by applying the proof's input
/// steps).
pub fn initial_state() -> State {
    State::default()
}

/// A synthetic state holding exactly the given resources, with `names` as
/// the freshness pool: the dependency slice a single-step re-check runs
/// against when no forward replay is available.
pub(crate) fn slice_state(
    lemmas: BTreeMap<Id, Formula>,
    facts: BTreeMap<Id, Formula>,
    seos: BTreeMap<Id, SeoItem>,
    names: BTreeSet<String>,
) -> State {
    let mut s = State {
        lemmas,
        facts,
        seos,
        dead: None,
        names,
        ..State::default()
    };
    for (id, item) in s.seos.clone() {
        match item {
            SeoItem::Obj { name, .. } => {
                s.objects_by_name.insert(name, id);
            }
            SeoItem::Def { lit, formula } => {
                s.defs_by_lit.insert(lit, id);
                s.defs_by_formula.insert(formula, id);
            }
        }
    }
    s
}

fn deps_present(state: &State, deps: &Deps) -> Result<(), String> {
    for id in &deps.r {
        if !state.lemmas.contains_key(id) {
            return Err(format!("unsatisfied dependency: lemma {id}"));
        }
    }
    for id in &deps.f {
        if !state.facts.contains_key(id) {
            return Err(format!("unsatisfied dependency: fact {id}"));
        }
    }
    for id in &deps.d {
        if !state.seos.contains_key(id) {
            return Err(format!("unsatisfied dependency: object/definition {id}"));
        }
    }
    Ok(())
}

/// Apply one derivation step. Dead states are absorbing; any violation
/// (missing dependency, failed precondition, id clash, definition-registry
/// clash) yields a dead state carrying the reason.
pub fn apply_step(state: &State, step: &Step, theory_budget: u64) -> State {
    if state.dead.is_some() {
        return state.clone();
    }
    let mut next = state.clone();
    let fail = |mut s: State, reason: String| {
        s.dead = Some(DeadEnd {
            step: step.id,
            reason,
        });
        s
    };

    if let Err(reason) = deps_present(state, &step.deps) {
        return fail(next, reason);
    }
    for id in step.added_ids() {
        if state.has_id(id) {
            return fail(next, format!("resource id {id} already exists"));
        }
    }
    if let Err(reason) = pc_check(state, step, theory_budget) {
        return fail(next, reason);
    }

    for (id, f) in &step.add_r {
        next.note_names(f);
        next.lemmas.insert(*id, f.clone());
    }
    for (id, f) in &step.add_f {
        next.note_names(f);
        next.facts.insert(*id, f.clone());
    }
    for (id, item) in &step.add_d {
        match item {
            SeoItem::Obj { name, class: _ } => {
                if next.objects_by_name.contains_key(name) {
                    return fail(next, format!("object `{name}` already exists"));
                }
                next.names.insert(name.clone());
                next.objects_by_name.insert(name.clone(), *id);
            }
            SeoItem::Def { lit, formula } => {
                // The definition registry is a bijection.
                if next.defs_by_lit.contains_key(lit) {
                    return fail(next, format!("literal `{lit}` already bound"));
                }
                if next.defs_by_formula.contains_key(formula) {
                    return fail(next, "formula already has a definition".to_string());
                }
                next.names.insert(lit.clone());
                next.note_names(formula);
                next.defs_by_lit.insert(lit.clone(), *id);
                next.defs_by_formula.insert(formula.clone(), *id);
            }
        }
        next.seos.insert(*id, item.clone());
    }
    next
}

/// Replay a full proof from the empty state. Stops early only in the
/// sense that a dead state absorbs the remaining steps.
pub fn replay(steps: &[Step], theory_budget: u64) -> State {
    let mut state = initial_state();
    for step in steps {
        state = apply_step(&state, step, theory_budget);
        if state.dead.is_some() {
            break;
        }
    }
    state
}
