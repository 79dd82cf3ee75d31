//! Proof intermediate representation: resources, derivation steps,
//! states, rule preconditions, and the proof file format.
//!
//! A proof is a sequence of steps. Each step names the resources it
//! depends on (lemma ids `R'`, fact ids `F'`, object/definition ids `D'`)
//! and the resources it adds. Applying a step to a state either unions
//! the additions in (when the dependencies are present and the rule's
//! precondition holds) or yields a dead end carrying the reason.

mod pc;
mod ser;
mod state;

pub use pc::{define_lemmas, is_in_theory, substitute};
pub use ser::{deserialize_proof, serialize_proof, ProofFileError};
pub use state::{apply_step, initial_state, replay, DeadEnd, State};
pub(crate) use state::slice_state;

use std::collections::BTreeMap;

use crate::fol::{Formula, Problem};

/// Dense resource identifier, unique across lemmas, facts, and
/// objects/definitions of one proof.
pub type Id = usize;

/// Every derivation rule, including the input pseudo-rule and the four
/// macros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Input,
    Define,
    Subs,
    ApplyLemma,
    RewriteOr,
    RewriteAnd,
    RewriteNeg,
    ExistentialInst,
    UniversalInst,
    Unit,
    Unsat,
    TDerive,
    FolToT,
    TToFol,
    RewriteAndStar,
    RewriteOrStar,
    ExistentialInstStar,
    UniversalInstStar,
}

impl Rule {
    pub const ALL: [Rule; 18] = [
        Rule::Input,
        Rule::Define,
        Rule::Subs,
        Rule::ApplyLemma,
        Rule::RewriteOr,
        Rule::RewriteAnd,
        Rule::RewriteNeg,
        Rule::ExistentialInst,
        Rule::UniversalInst,
        Rule::Unit,
        Rule::Unsat,
        Rule::TDerive,
        Rule::FolToT,
        Rule::TToFol,
        Rule::RewriteAndStar,
        Rule::RewriteOrStar,
        Rule::ExistentialInstStar,
        Rule::UniversalInstStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Input => "Input",
            Rule::Define => "Define",
            Rule::Subs => "Subs",
            Rule::ApplyLemma => "ApplyLemma",
            Rule::RewriteOr => "RewriteOr",
            Rule::RewriteAnd => "RewriteAnd",
            Rule::RewriteNeg => "RewriteNeg",
            Rule::ExistentialInst => "ExistentialInst",
            Rule::UniversalInst => "UniversalInst",
            Rule::Unit => "Unit",
            Rule::Unsat => "UNSAT",
            Rule::TDerive => "TDerive",
            Rule::FolToT => "FolToT",
            Rule::TToFol => "TToFol",
            Rule::RewriteAndStar => "RewriteAND*",
            Rule::RewriteOrStar => "RewriteOR*",
            Rule::ExistentialInstStar => "ExistentialInst*",
            Rule::UniversalInstStar => "UniversalInst*",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.iter().copied().find(|r| r.name() == name)
    }

    pub fn is_macro(self) -> bool {
        matches!(
            self,
            Rule::RewriteAndStar
                | Rule::RewriteOrStar
                | Rule::ExistentialInstStar
                | Rule::UniversalInstStar
        )
    }
}

/// An entry in the object/definition store `D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SeoItem {
    /// A relational object available for instantiation.
    Obj { name: String, class: String },
    /// A definition binding: boolean literal `lit` stands for `formula`.
    Def { lit: String, formula: Formula },
}

/// Dependency ids, split by resource kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Deps {
    pub r: Vec<Id>,
    pub f: Vec<Id>,
    pub d: Vec<Id>,
}

impl Deps {
    pub fn is_empty(&self) -> bool {
        self.r.is_empty() && self.f.is_empty() && self.d.is_empty()
    }
}

/// One derivation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// Dense step index within the proof.
    pub id: usize,
    pub rule: Rule,
    pub deps: Deps,
    pub add_r: Vec<(Id, Formula)>,
    pub add_f: Vec<(Id, Formula)>,
    pub add_d: Vec<(Id, SeoItem)>,
}

impl Step {
    /// Ids this step adds, in allocation order (lemmas, facts, then
    /// objects/definitions).
    pub fn added_ids(&self) -> impl Iterator<Item = Id> + '_ {
        self.add_r
            .iter()
            .map(|(i, _)| *i)
            .chain(self.add_f.iter().map(|(i, _)| *i))
            .chain(self.add_d.iter().map(|(i, _)| *i))
    }
}

/// A proof: input steps followed by derivation steps, ids dense.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Proof {
    pub steps: Vec<Step>,
}

impl Proof {
    /// Steps with rule `Input`.
    pub fn inputs(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| s.rule == Rule::Input)
    }
}

/// Validate one step against a state without committing it: dependency
/// presence, id freshness, the rule precondition, and the store
/// consistency checks (object-name uniqueness, definition bijectivity).
/// `Err` carries the reason a replay would die on this step.
pub fn check_step(state: &State, step: &Step, theory_budget: u64) -> Result<(), String> {
    match apply_step(state, step, theory_budget).dead {
        Some(dead) => Err(dead.reason),
        None => Ok(()),
    }
}

/// Renumber a self-contained step list densely: step ids become list
/// positions and resource ids are reassigned in order of addition, with
/// all dependencies remapped.
///
/// Precondition: every dependency refers to a resource added by an
/// earlier step in the list (the list is closed and forward-reference
/// free, as every replayable proof is).
pub fn renumber(steps: &[Step]) -> Vec<Step> {
    let mut map: BTreeMap<Id, Id> = BTreeMap::new();
    let mut next: Id = 0;
    let mut out = Vec::with_capacity(steps.len());
    for (pos, step) in steps.iter().enumerate() {
        let remap = |ids: &[Id], map: &BTreeMap<Id, Id>| -> Vec<Id> {
            ids.iter().map(|i| map[i]).collect()
        };
        let deps = Deps {
            r: remap(&step.deps.r, &map),
            f: remap(&step.deps.f, &map),
            d: remap(&step.deps.d, &map),
        };
        let mut fresh = |old: Id, map: &mut BTreeMap<Id, Id>| -> Id {
            let id = next;
            next += 1;
            map.insert(old, id);
            id
        };
        let add_r = step
            .add_r
            .iter()
            .map(|(i, f)| (fresh(*i, &mut map), f.clone()))
            .collect();
        let add_f = step
            .add_f
            .iter()
            .map(|(i, f)| (fresh(*i, &mut map), f.clone()))
            .collect();
        let add_d = step
            .add_d
            .iter()
            .map(|(i, item)| (fresh(*i, &mut map), item.clone()))
            .collect();
        out.push(Step {
            id: pos,
            rule: step.rule,
            deps,
            add_r,
            add_f,
            add_d,
        });
    }
    out
}

/// Validate that a proof's input steps state exactly `problem`: input
/// steps precede all derivation steps, their formulas are the problem's
/// assertions in order under ids `0..n`, and their objects are the
/// declared objects in declaration order.
pub fn inputs_match(problem: &Problem, proof: &Proof) -> Result<(), String> {
    let mut formulas: Vec<(Id, &Formula)> = Vec::new();
    let mut objects: Vec<(&str, &str)> = Vec::new();
    let mut derivation_seen = false;
    for step in &proof.steps {
        if step.rule != Rule::Input {
            derivation_seen = true;
            continue;
        }
        if derivation_seen {
            return Err("input steps must precede all derivation steps".to_string());
        }
        for (id, f) in &step.add_r {
            formulas.push((*id, f));
        }
        for (_, item) in &step.add_d {
            match item {
                SeoItem::Obj { name, class } => objects.push((name, class)),
                SeoItem::Def { .. } => {
                    return Err("input steps may not add definitions".to_string())
                }
            }
        }
    }
    if formulas.len() != problem.assertions.len() {
        return Err(format!(
            "proof states {} input formulas, the problem asserts {}",
            formulas.len(),
            problem.assertions.len()
        ));
    }
    for (k, ((id, f), assertion)) in formulas.iter().zip(&problem.assertions).enumerate() {
        if *id != k {
            return Err(format!(
                "input formulas must use ids 0..{}; found id {id} at position {k}",
                problem.assertions.len()
            ));
        }
        if *f != assertion {
            return Err(format!("input formula {k} differs from the problem's assertion"));
        }
    }
    let declared: Vec<(&str, &str)> = problem
        .signature
        .objects
        .iter()
        .map(|(n, c)| (n.as_str(), c.as_str()))
        .collect();
    if objects != declared {
        return Err("input objects differ from the problem's declared objects".to_string());
    }
    Ok(())
}
