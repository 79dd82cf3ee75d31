//! Backward proof checking, dependency minimization, and trimming.
//!
//! The backward checker starts from the final UNSAT step and works
//! toward the inputs, validating *only* the steps the conclusion
//! actually depends on (the core). Each core step is re-checked against
//! a synthetic state assembled from its dependencies — no forward replay
//! and no prover involvement — then its dependency lists are shrunk to
//! what the rule's precondition really consumes, and the steps providing
//! the surviving dependencies join the core. [`trim`] keeps the input
//! steps and the core, rewrites dependencies to the minimized ones, and
//! renumbers densely; the result checks in both directions and trims to
//! itself.
//!
//! Because no replay accumulates state, a cheap structural sweep first
//! rebuilds what a replay would enforce globally: unique resource ids,
//! the object/definition registries staying bijective, and the per-step
//! name pools that freshness conditions are judged against.

use std::collections::{BTreeMap, BTreeSet};

use crate::fol::{complement, Formula, Problem};
use crate::lia::{entails, Entailment};
use crate::proof::{
    check_step, inputs_match, renumber, serialize_proof, slice_state, Deps, Id, Proof, Rule,
    SeoItem, Step,
};

/// Size accounting for a checked proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckStats {
    pub steps_total: usize,
    /// Core derivation steps (input steps are not counted).
    pub steps_core: usize,
    pub bytes_total: usize,
    /// Serialized size of the trimmed proof.
    pub bytes_core: usize,
}

/// Outcome of a backward check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub valid: bool,
    /// Reason for rejection when no single step is to blame (bad inputs,
    /// missing UNSAT conclusion).
    pub reason: Option<String>,
    /// The offending step and why, when rejection is tied to one.
    pub failing_step: Option<(usize, String)>,
    /// Indices of the derivation steps the conclusion depends on.
    pub core: BTreeSet<usize>,
    /// Minimized dependency lists for every core step.
    pub minimized: BTreeMap<usize, Deps>,
    pub stats: CheckStats,
}

impl CheckReport {
    /// The rejection reason, regardless of which field carries it.
    pub fn why(&self) -> Option<String> {
        self.reason
            .clone()
            .or_else(|| self.failing_step.as_ref().map(|(i, r)| format!("step {i}: {r}")))
    }
}

/// Which store a resource id belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lemma,
    Fact,
    Seo,
}

/// Everything the sweep learns about a proof's resources.
struct ResourceIndex<'a> {
    /// id → (adding step, store).
    adder: BTreeMap<Id, (usize, Kind)>,
    lemmas: BTreeMap<Id, &'a Formula>,
    facts: BTreeMap<Id, &'a Formula>,
    seos: BTreeMap<Id, &'a SeoItem>,
    /// Names each step introduces (for reconstructing freshness pools).
    deltas: Vec<Vec<String>>,
}

/// One step's dependencies resolved to resources, in dependency order.
struct View<'a> {
    r: Vec<(Id, &'a Formula)>,
    f: Vec<(Id, &'a Formula)>,
    defs: Vec<(Id, &'a str, &'a Formula)>,
    objs: Vec<(Id, &'a str, &'a str)>,
}

/// Check a proof backwards from its UNSAT conclusion.
pub fn backward_check(problem: &Problem, proof: &Proof, theory_budget: u64) -> CheckReport {
    let steps_total = proof.steps.len();
    let bytes_total = serialize_proof(proof).len();
    let invalid = |reason: Option<String>, failing_step: Option<(usize, String)>| CheckReport {
        valid: false,
        reason,
        failing_step,
        core: BTreeSet::new(),
        minimized: BTreeMap::new(),
        stats: CheckStats {
            steps_total,
            steps_core: 0,
            bytes_total,
            bytes_core: 0,
        },
    };

    if let Err(reason) = inputs_match(problem, proof) {
        return invalid(Some(reason), None);
    }
    match proof.steps.last() {
        Some(last) if last.rule == Rule::Unsat => {}
        Some(_) => return invalid(Some("proof does not end in an UNSAT step".into()), None),
        None => return invalid(Some("proof has no steps".into()), None),
    }

    let index = match sweep(proof) {
        Ok(index) => index,
        Err(failing) => return invalid(None, Some(failing)),
    };

    // Running name pool, shrunk step by step as the loop walks backwards:
    // before processing step i it holds exactly the names steps 0..i-1
    // introduce.
    let mut pool: BTreeMap<&str, usize> = BTreeMap::new();
    for delta in &index.deltas {
        for name in delta {
            *pool.entry(name).or_insert(0) += 1;
        }
    }

    let n = proof.steps.len();
    let mut core: BTreeSet<usize> = BTreeSet::new();
    core.insert(n - 1);
    let mut minimized: BTreeMap<usize, Deps> = BTreeMap::new();

    for i in (0..n).rev() {
        for name in &index.deltas[i] {
            let count = pool.get_mut(name.as_str()).expect("pool covers all deltas");
            *count -= 1;
            if *count == 0 {
                pool.remove(name.as_str());
            }
        }
        if !core.contains(&i) {
            continue;
        }
        let step = &proof.steps[i];

        let view = match resolve_deps(&index, step, i) {
            Ok(view) => view,
            Err(reason) => return invalid(None, Some((i, reason))),
        };
        let names: BTreeSet<String> = pool.keys().map(|s| s.to_string()).collect();
        let state = slice_state(
            view.r.iter().map(|(id, f)| (*id, (*f).clone())).collect(),
            view.f.iter().map(|(id, f)| (*id, (*f).clone())).collect(),
            step.deps
                .d
                .iter()
                .map(|id| (*id, index.seos[id].clone()))
                .collect(),
            names,
        );
        if let Err(reason) = check_step(&state, step, theory_budget) {
            return invalid(None, Some((i, reason)));
        }

        let min = minimize_deps(&view, step, theory_budget);
        let min = {
            let mut retry = step.clone();
            retry.deps = min.clone();
            // Shrinking must never flip the verdict; fall back to the
            // original dependencies if it would (e.g. on budget
            // exhaustion mid-minimization).
            if check_step(&state, &retry, theory_budget).is_ok() {
                min
            } else {
                step.deps.clone()
            }
        };
        for id in min.r.iter().chain(&min.f).chain(&min.d) {
            let (j, _) = index.adder[id];
            if proof.steps[j].rule != Rule::Input {
                core.insert(j);
            }
        }
        minimized.insert(i, min);
    }

    let trimmed = assemble(proof, &core, &minimized);
    let stats = CheckStats {
        steps_total,
        steps_core: core.len(),
        bytes_total,
        bytes_core: serialize_proof(&trimmed).len(),
    };
    CheckReport {
        valid: true,
        reason: None,
        failing_step: None,
        core,
        minimized,
        stats,
    }
}

/// Keep the input steps and the core, rewrite dependencies to the
/// minimized ones, renumber densely.
pub fn trim(proof: &Proof, report: &CheckReport) -> Result<Proof, String> {
    if !report.valid {
        return Err(report
            .why()
            .map(|w| format!("cannot trim an invalid proof: {w}"))
            .unwrap_or_else(|| "cannot trim an invalid proof".into()));
    }
    Ok(assemble(proof, &report.core, &report.minimized))
}

fn assemble(proof: &Proof, core: &BTreeSet<usize>, minimized: &BTreeMap<usize, Deps>) -> Proof {
    let mut kept: Vec<Step> = Vec::new();
    for (i, step) in proof.steps.iter().enumerate() {
        if step.rule != Rule::Input && !core.contains(&i) {
            continue;
        }
        let mut s = step.clone();
        if let Some(min) = minimized.get(&i) {
            s.deps = min.clone();
        }
        kept.push(s);
    }
    Proof {
        steps: renumber(&kept),
    }
}

/// One pass over all steps: index every resource, reject duplicate ids
/// and registry collisions, record per-step name deltas.
fn sweep(proof: &Proof) -> Result<ResourceIndex<'_>, (usize, String)> {
    let mut index = ResourceIndex {
        adder: BTreeMap::new(),
        lemmas: BTreeMap::new(),
        facts: BTreeMap::new(),
        seos: BTreeMap::new(),
        deltas: Vec::with_capacity(proof.steps.len()),
    };
    let mut obj_names: BTreeSet<&str> = BTreeSet::new();
    let mut def_lits: BTreeSet<&str> = BTreeSet::new();
    let mut def_formulas: BTreeSet<&Formula> = BTreeSet::new();
    for (i, step) in proof.steps.iter().enumerate() {
        let mut delta: BTreeSet<String> = BTreeSet::new();
        let claim = |id: Id,
                         kind: Kind,
                         adder: &mut BTreeMap<Id, (usize, Kind)>|
         -> Result<(), (usize, String)> {
            if adder.insert(id, (i, kind)).is_some() {
                return Err((i, format!("resource id {id} already exists")));
            }
            Ok(())
        };
        for (id, f) in &step.add_r {
            claim(*id, Kind::Lemma, &mut index.adder)?;
            index.lemmas.insert(*id, f);
            f.all_names(&mut delta);
        }
        for (id, f) in &step.add_f {
            claim(*id, Kind::Fact, &mut index.adder)?;
            index.facts.insert(*id, f);
            f.all_names(&mut delta);
        }
        for (id, item) in &step.add_d {
            claim(*id, Kind::Seo, &mut index.adder)?;
            index.seos.insert(*id, item);
            match item {
                SeoItem::Obj { name, .. } => {
                    if !obj_names.insert(name) {
                        return Err((i, format!("object `{name}` already exists")));
                    }
                    delta.insert(name.clone());
                }
                SeoItem::Def { lit, formula } => {
                    if !def_lits.insert(lit) {
                        return Err((i, format!("literal `{lit}` already bound")));
                    }
                    if !def_formulas.insert(formula) {
                        return Err((i, "formula already has a definition".to_string()));
                    }
                    delta.insert(lit.clone());
                    formula.all_names(&mut delta);
                }
            }
        }
        index.deltas.push(delta.into_iter().collect());
    }
    Ok(index)
}

/// Resolve a step's dependency ids against the index, requiring each to
/// be added by an earlier step in the matching store.
fn resolve_deps<'a>(
    index: &ResourceIndex<'a>,
    step: &Step,
    at: usize,
) -> Result<View<'a>, String> {
    let earlier = |id: &Id, kind: Kind| match index.adder.get(id) {
        Some((j, k)) if *j < at && *k == kind => true,
        _ => false,
    };
    let mut view = View {
        r: Vec::new(),
        f: Vec::new(),
        defs: Vec::new(),
        objs: Vec::new(),
    };
    for id in &step.deps.r {
        if !earlier(id, Kind::Lemma) {
            return Err(format!("unsatisfied dependency: lemma {id}"));
        }
        view.r.push((*id, index.lemmas[id]));
    }
    for id in &step.deps.f {
        if !earlier(id, Kind::Fact) {
            return Err(format!("unsatisfied dependency: fact {id}"));
        }
        view.f.push((*id, index.facts[id]));
    }
    for id in &step.deps.d {
        if !earlier(id, Kind::Seo) {
            return Err(format!("unsatisfied dependency: object/definition {id}"));
        }
        match index.seos[id] {
            SeoItem::Obj { name, class } => view.objs.push((*id, name, class)),
            SeoItem::Def { lit, formula } => view.defs.push((*id, lit, formula)),
        }
    }
    Ok(view)
}

/// Shrink a validated step's dependencies to exactly what its rule's
/// precondition consumes. Mirrors the precondition's own witness search;
/// any unexpected shape falls back to the original lists (sound, just
/// larger). TDerive is the one semantic case: facts are deletion-
/// minimized under entailment of the derived fact.
fn minimize_deps(view: &View<'_>, step: &Step, theory_budget: u64) -> Deps {
    let keep_all = || step.deps.clone();
    match step.rule {
        Rule::Input | Rule::Define => Deps::default(),
        Rule::Subs => Deps {
            d: view.defs.iter().map(|(id, _, _)| *id).collect(),
            ..Deps::default()
        },
        Rule::RewriteNeg | Rule::ExistentialInst => match view.defs.first() {
            Some((id, _, _)) => Deps {
                d: vec![*id],
                ..Deps::default()
            },
            None => keep_all(),
        },
        Rule::ApplyLemma => {
            let Some(Formula::BoolVar(lit)) = step.add_r.first().map(|(_, f)| f) else {
                return keep_all();
            };
            let Some((def_id, _, defined)) = view.defs.iter().find(|(_, l, _)| l == lit) else {
                return keep_all();
            };
            let Some((lem_id, _)) = view.r.iter().find(|(_, f)| *f == *defined) else {
                return keep_all();
            };
            Deps {
                r: vec![*lem_id],
                d: vec![*def_id],
                ..Deps::default()
            }
        }
        Rule::RewriteOr => {
            let Some((anchor_id, _, target)) = view.defs.first() else {
                return keep_all();
            };
            let Formula::Or(disjuncts) = target else {
                return keep_all();
            };
            let mut d = vec![*anchor_id];
            for disjunct in disjuncts {
                let Some((id, _, _)) = view.defs.iter().find(|(_, _, f)| *f == disjunct) else {
                    return keep_all();
                };
                if !d.contains(id) {
                    d.push(*id);
                }
            }
            Deps {
                d,
                ..Deps::default()
            }
        }
        Rule::UniversalInst => {
            let Some((anchor_id, lit, target)) = view.defs.first() else {
                return keep_all();
            };
            let Formula::Forall(binder, body) = target else {
                return keep_all();
            };
            let Some(added) = step.add_r.first().map(|(_, f)| f) else {
                return keep_all();
            };
            let anchor = Formula::BoolVar(lit.to_string());
            let witness = view.objs.iter().find(|(_, name, class)| {
                *class == binder.class
                    && *added
                        == crate::fol::implies(
                            anchor.clone(),
                            crate::fol::implies(
                                Formula::Ext(name.to_string()),
                                body.subst_obj(&binder.var, name),
                            ),
                        )
            });
            match witness {
                Some((obj_id, _, _)) => Deps {
                    d: vec![*anchor_id, *obj_id],
                    ..Deps::default()
                },
                None => keep_all(),
            }
        }
        Rule::Unit => {
            let Some(added) = step.add_r.first().map(|(_, f)| f) else {
                return keep_all();
            };
            for (clause_id, clause) in &view.r {
                let Formula::Or(xs) = clause else { continue };
                for (i, x) in xs.iter().enumerate() {
                    let unit = complement(x);
                    let Some((unit_id, _)) = view.r.iter().find(|(_, f)| **f == unit) else {
                        continue;
                    };
                    let rest: Vec<Formula> = xs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, f)| f.clone())
                        .collect();
                    if crate::fol::or_of(rest) == *added {
                        let mut r = vec![*clause_id];
                        if !r.contains(unit_id) {
                            r.push(*unit_id);
                        }
                        return Deps {
                            r,
                            ..Deps::default()
                        };
                    }
                }
            }
            keep_all()
        }
        Rule::Unsat => {
            if let Some((id, _)) = view.r.iter().find(|(_, f)| **f == Formula::False) {
                return Deps {
                    r: vec![*id],
                    ..Deps::default()
                };
            }
            if let Some((id, _)) = view.f.iter().find(|(_, f)| **f == Formula::False) {
                return Deps {
                    f: vec![*id],
                    ..Deps::default()
                };
            }
            keep_all()
        }
        Rule::TDerive => {
            let Some(goal) = step.add_f.first().map(|(_, f)| f) else {
                return keep_all();
            };
            let mut keep: Vec<(Id, Formula)> =
                view.f.iter().map(|(id, f)| (*id, (*f).clone())).collect();
            let mut i = 0;
            while i < keep.len() {
                let trial: Vec<Formula> = keep
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (_, f))| f.clone())
                    .collect();
                if entails(&trial, goal, theory_budget) == Entailment::Holds {
                    keep.remove(i);
                } else {
                    i += 1;
                }
            }
            Deps {
                f: keep.into_iter().map(|(id, _)| id).collect(),
                ..Deps::default()
            }
        }
        Rule::FolToT => {
            let mut r: Vec<Id> = Vec::new();
            for (_, fact) in &step.add_f {
                let Some((id, _)) = view.r.iter().find(|(_, f)| *f == fact) else {
                    return keep_all();
                };
                if !r.contains(id) {
                    r.push(*id);
                }
            }
            Deps {
                r,
                ..Deps::default()
            }
        }
        Rule::TToFol => {
            let mut f: Vec<Id> = Vec::new();
            for (_, lemma) in &step.add_r {
                let Some((id, _)) = view.f.iter().find(|(_, g)| *g == lemma) else {
                    return keep_all();
                };
                if !f.contains(id) {
                    f.push(*id);
                }
            }
            Deps {
                f,
                ..Deps::default()
            }
        }
        Rule::RewriteAnd | Rule::RewriteAndStar | Rule::RewriteOrStar | Rule::ExistentialInstStar => {
            match view.r.first() {
                Some((id, _)) => Deps {
                    r: vec![*id],
                    ..Deps::default()
                },
                None => keep_all(),
            }
        }
        Rule::UniversalInstStar => {
            let Some((target_id, target)) = view.r.first() else {
                return keep_all();
            };
            let Formula::Forall(binder, body) = *target else {
                return keep_all();
            };
            let Some(added) = step.add_r.first().map(|(_, f)| f) else {
                return keep_all();
            };
            let witness = view.objs.iter().find(|(_, name, class)| {
                *class == binder.class
                    && *added
                        == crate::fol::implies(
                            Formula::Ext(name.to_string()),
                            body.subst_obj(&binder.var, name),
                        )
            });
            match witness {
                Some((obj_id, _, _)) => Deps {
                    r: vec![*target_id],
                    d: vec![*obj_id],
                    ..Deps::default()
                },
                None => keep_all(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_problem;
    use crate::proof::define_lemmas;

    const BUDGET: u64 = 100_000;

    /// `Input(⊥) ; FolToT ; UNSAT`, the smallest refutation.
    fn falsum_problem_and_proof() -> (Problem, Proof) {
        let problem = parse_problem("(assert false)").unwrap();
        let steps = vec![
            Step {
                id: 0,
                rule: Rule::Input,
                deps: Deps::default(),
                add_r: vec![(0, Formula::False)],
                add_f: vec![],
                add_d: vec![],
            },
            Step {
                id: 1,
                rule: Rule::FolToT,
                deps: Deps {
                    r: vec![0],
                    ..Deps::default()
                },
                add_r: vec![],
                add_f: vec![(1, Formula::False)],
                add_d: vec![],
            },
            Step {
                id: 2,
                rule: Rule::Unsat,
                deps: Deps {
                    f: vec![1],
                    ..Deps::default()
                },
                add_r: vec![],
                add_f: vec![],
                add_d: vec![],
            },
        ];
        (problem, Proof { steps })
    }

    #[test]
    fn minimal_refutation_is_valid_with_both_derivations_in_core() {
        let (problem, proof) = falsum_problem_and_proof();
        let report = backward_check(&problem, &proof, BUDGET);
        assert!(report.valid, "{:?}", report.why());
        assert_eq!(report.core, [1, 2].into_iter().collect());
        assert_eq!(report.stats.steps_core, 2);
        let trimmed = trim(&proof, &report).unwrap();
        assert_eq!(trimmed.steps.len(), 3);
    }

    #[test]
    fn injected_unused_definition_is_excluded_from_core_and_trimmed_away() {
        let (problem, mut proof) = falsum_problem_and_proof();
        let unused = Formula::BoolVar("p".into());
        let [pos, neg] = define_lemmas("junk", &unused);
        proof.steps.insert(
            1,
            Step {
                id: 9,
                rule: Rule::Define,
                deps: Deps::default(),
                add_r: vec![(10, pos), (11, neg)],
                add_f: vec![],
                add_d: vec![(
                    12,
                    SeoItem::Def {
                        lit: "junk".into(),
                        formula: unused,
                    },
                )],
            },
        );
        let report = backward_check(&problem, &proof, BUDGET);
        assert!(report.valid, "{:?}", report.why());
        assert!(!report.core.contains(&1), "the junk step must not be core");
        let trimmed = trim(&proof, &report).unwrap();
        assert_eq!(trimmed.steps.len(), 3);
        let again = backward_check(&problem, &trimmed, BUDGET);
        assert!(again.valid);
        assert_eq!(trim(&trimmed, &again).unwrap(), trimmed);
    }

    #[test]
    fn truncated_proof_is_rejected_for_missing_conclusion() {
        let (problem, mut proof) = falsum_problem_and_proof();
        proof.steps.pop();
        let report = backward_check(&problem, &proof, BUDGET);
        assert!(!report.valid);
        assert!(report.reason.unwrap().contains("UNSAT"));
    }

    #[test]
    fn emptied_fact_dependencies_invalidate_the_conclusion() {
        let (problem, mut proof) = falsum_problem_and_proof();
        proof.steps[2].deps.f.clear();
        let report = backward_check(&problem, &proof, BUDGET);
        assert!(!report.valid);
        let (step, reason) = report.failing_step.unwrap();
        assert_eq!(step, 2);
        assert!(reason.contains("false"), "{reason}");
    }

    #[test]
    fn extra_dependencies_are_minimized_away() {
        let (problem, mut proof) = falsum_problem_and_proof();
        // A second input lemma the conclusion never needs.
        let problem = {
            let mut p = problem;
            p.assertions
                .push(crate::fol::parse_raw_formula("(> x 0)").unwrap());
            p
        };
        proof.steps[0]
            .add_r
            .push((1, problem.assertions[1].clone()));
        proof.steps[1].deps.r.push(1); // FolToT drags in the extra lemma
        proof.steps[1].add_f = vec![(2, Formula::False)];
        proof.steps[2].deps.f = vec![2];
        let report = backward_check(&problem, &proof, BUDGET);
        assert!(report.valid, "{:?}", report.why());
        assert_eq!(report.minimized[&1].r, vec![0]);
    }
}
