//! Rule preconditions.
//!
//! `pc_check` validates one derivation step against the state it is applied
//! to: the step's dependencies must stand in the relationship the rule
//! demands, and the step's additions must have *exactly* the shape the rule
//! produces. Dependency lists may mention extra resources (they are still
//! required to exist, but play no role here); additions are never optional
//! or extensible beyond what each rule's contract says.
//!
//! Definition-driven rules (Subs, RewriteOr, RewriteNeg, ExistentialInst,
//! UniversalInst) are anchored on a definition binding: the *first*
//! definition entry in the step's `D` dependencies names the formula being
//! rewritten or instantiated. Subsequent definition entries play the
//! rule-specific supporting roles.

use crate::fol::{and_of, complement, implies, neg_one_level, or_of, Formula};
use crate::lia::{entails, Entailment};

use super::state::State;
use super::{Rule, SeoItem, Step};

/// Is `f` a theory formula, i.e. directly expressible as a linear integer
/// constraint set? Exactly the quantifier-free fragment: the term grammar
/// is linear by construction, so only quantifiers can fall outside 𝕋.
pub fn is_in_theory(f: &Formula) -> bool {
    !f.has_quantifier()
}

/// The two lemmas introduced when `lit` is defined to stand for `f`:
/// `lit ⇒ f` (the positive definition lemma) and `¬lit ⇒ ¬f` (the
/// negative one). Shared by every definition-producing rule and by the
/// prover, so both sides agree on the exact encoding.
pub fn define_lemmas(lit: &str, f: &Formula) -> [Formula; 2] {
    let l = Formula::BoolVar(lit.to_string());
    [
        implies(l.clone(), f.clone()),
        implies(complement(&l), complement(f)),
    ]
}

/// Substitute defined subformulas by their literals: every occurrence of a
/// binding's formula is replaced by the binding's literal, provided none of
/// the occurrence's free objects is captured by an enclosing quantifier.
/// Bindings are tried in list order at each node (first match wins) and
/// replaced occurrences are not re-entered.
pub fn substitute(f: &Formula, bindings: &[(String, Formula)]) -> Formula {
    fn go(f: &Formula, bindings: &[(String, Formula)], bound: &mut Vec<String>) -> Formula {
        for (lit, pattern) in bindings {
            if f == pattern
                && pattern
                    .free_objects()
                    .iter()
                    .all(|o| !bound.contains(o))
            {
                return Formula::BoolVar(lit.clone());
            }
        }
        match f {
            Formula::True
            | Formula::False
            | Formula::BoolVar(_)
            | Formula::Ext(_)
            | Formula::Cmp(..) => f.clone(),
            Formula::Not(inner) => Formula::Not(Box::new(go(inner, bindings, bound))),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|c| go(c, bindings, bound)).collect())
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|c| go(c, bindings, bound)).collect()),
            Formula::Exists(b, body) => {
                bound.push(b.var.clone());
                let body = go(body, bindings, bound);
                bound.pop();
                Formula::Exists(b.clone(), Box::new(body))
            }
            Formula::Forall(b, body) => {
                bound.push(b.var.clone());
                let body = go(body, bindings, bound);
                bound.pop();
                Formula::Forall(b.clone(), Box::new(body))
            }
        }
    }
    go(f, bindings, &mut Vec::new())
}

/// Dependency views resolved against the state. Construction assumes the
/// ids exist (the caller checks that first).
struct DepView<'a> {
    lemmas: Vec<&'a Formula>,
    facts: Vec<&'a Formula>,
    defs: Vec<(&'a str, &'a Formula)>,
    objs: Vec<(&'a str, &'a str)>,
}

impl<'a> DepView<'a> {
    fn new(state: &'a State, step: &Step) -> Self {
        let lemmas = step.deps.r.iter().map(|id| &state.lemmas[id]).collect();
        let facts = step.deps.f.iter().map(|id| &state.facts[id]).collect();
        let mut defs = Vec::new();
        let mut objs = Vec::new();
        for id in &step.deps.d {
            match &state.seos[id] {
                SeoItem::Obj { name, class } => objs.push((name.as_str(), class.as_str())),
                SeoItem::Def { lit, formula } => defs.push((lit.as_str(), formula)),
            }
        }
        DepView {
            lemmas,
            facts,
            defs,
            objs,
        }
    }

    fn has_lemma(&self, f: &Formula) -> bool {
        self.lemmas.iter().any(|g| *g == f)
    }

    fn has_fact(&self, f: &Formula) -> bool {
        self.facts.iter().any(|g| *g == f)
    }

    fn def_of_formula(&self, f: &Formula) -> Option<&'a str> {
        self.defs.iter().find(|(_, g)| *g == f).map(|(l, _)| *l)
    }

    /// The anchor definition (first `Def` entry among the `D` deps) of a
    /// definition-driven rule.
    fn anchor_def(&self, rule: &str) -> Result<(&'a str, &'a Formula), String> {
        self.defs
            .first()
            .copied()
            .ok_or_else(|| format!("{rule} needs a definition dependency"))
    }
}

fn err(msg: impl Into<String>) -> Result<(), String> {
    Err(msg.into())
}

fn require(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

/// The single added lemma, or an error naming the rule.
fn one_lemma<'a>(step: &'a Step, rule: &str) -> Result<&'a Formula, String> {
    if step.add_r.len() != 1 {
        return Err(format!("{rule} must add exactly one lemma"));
    }
    Ok(&step.add_r[0].1)
}

/// The exact expected lemma list, or an error naming the rule.
fn lemmas_exactly(step: &Step, expected: &[Formula], rule: &str) -> Result<(), String> {
    if step.add_r.len() == expected.len() && step.add_r.iter().map(|(_, f)| f).eq(expected.iter())
    {
        Ok(())
    } else {
        Err(format!("{rule} additions do not match the rule's lemma shape"))
    }
}

fn no_facts(step: &Step, rule: &str) -> Result<(), String> {
    require(
        step.add_f.is_empty(),
        &format!("{rule} must not add facts"),
    )
}

fn no_seos(step: &Step, rule: &str) -> Result<(), String> {
    require(
        step.add_d.is_empty(),
        &format!("{rule} must not add objects or definitions"),
    )
}

fn no_lemmas(step: &Step, rule: &str) -> Result<(), String> {
    require(
        step.add_r.is_empty(),
        &format!("{rule} must not add lemmas"),
    )
}

/// The single added object entry, or an error naming the rule.
fn one_obj<'a>(step: &'a Step, rule: &str) -> Result<(&'a str, &'a str), String> {
    match step.add_d.as_slice() {
        [(_, SeoItem::Obj { name, class })] => Ok((name, class)),
        _ => Err(format!("{rule} must add exactly one object")),
    }
}

/// The first lemma dependency's formula: the extraction target of the
/// conjunction rules and of the native decomposition macros.
fn target_lemma<'a>(state: &'a State, step: &Step, rule: &str) -> Result<&'a Formula, String> {
    step.deps
        .r
        .first()
        .map(|id| &state.lemmas[id])
        .ok_or_else(|| format!("{rule} needs a lemma dependency"))
}

/// Shared body of RewriteAnd and its macro form: the first lemma dependency
/// is a conjunction and every added lemma is one of its conjuncts.
fn check_conjunct_extraction(state: &State, step: &Step, rule: &str) -> Result<(), String> {
    no_facts(step, rule)?;
    no_seos(step, rule)?;
    let target = target_lemma(state, step, rule)?;
    let conjuncts = match target {
        Formula::And(cs) => cs,
        _ => return Err(format!("{rule} target is not a conjunction")),
    };
    require(
        !step.add_r.is_empty(),
        &format!("{rule} must add at least one conjunct"),
    )?;
    for (_, f) in &step.add_r {
        require(
            conjuncts.contains(f),
            "added lemma is not a conjunct of the target",
        )?;
    }
    Ok(())
}

/// Check the precondition of `step.rule` and the exact shape of the step's
/// additions against `state`. `Err` carries a human-readable reason.
pub(super) fn pc_check(state: &State, step: &Step, theory_budget: u64) -> Result<(), String> {
    let deps = DepView::new(state, step);
    match step.rule {
        Rule::Input => {
            require(step.deps.is_empty(), "Input steps take no dependencies")?;
            no_facts(step, "Input")?;
            require(
                step.add_d
                    .iter()
                    .all(|(_, item)| matches!(item, SeoItem::Obj { .. })),
                "Input steps may only add declared objects, not definitions",
            )
        }
        Rule::Define => {
            no_facts(step, "Define")?;
            let (lit, formula) = match step.add_d.as_slice() {
                [(_, SeoItem::Def { lit, formula })] => (lit, formula),
                _ => return err("Define must add exactly one definition"),
            };
            require(
                state.is_fresh_name(lit),
                &format!("literal `{lit}` is not fresh"),
            )?;
            lemmas_exactly(step, &define_lemmas(lit, formula), "Define")
        }
        Rule::Subs => {
            no_facts(step, "Subs")?;
            no_seos(step, "Subs")?;
            let (lit, target) = deps.anchor_def("Subs")?;
            let bindings: Vec<(String, Formula)> = deps.defs[1..]
                .iter()
                .map(|(l, f)| (l.to_string(), (*f).clone()))
                .collect();
            require(
                !bindings.is_empty(),
                "Subs needs a definition dependency to substitute with",
            )?;
            let rewritten = substitute(target, &bindings);
            lemmas_exactly(step, &define_lemmas(lit, &rewritten), "Subs")
        }
        Rule::ApplyLemma => {
            no_facts(step, "ApplyLemma")?;
            no_seos(step, "ApplyLemma")?;
            let added = one_lemma(step, "ApplyLemma")?;
            let lit = match added {
                Formula::BoolVar(l) => l,
                _ => return err("ApplyLemma must add a definition literal"),
            };
            let defined = deps
                .defs
                .iter()
                .find(|(l, _)| l == lit)
                .map(|(_, f)| *f)
                .ok_or_else(|| format!("no definition dependency binds `{lit}`"))?;
            require(
                deps.has_lemma(defined),
                "the defined formula is not among the lemma dependencies",
            )
        }
        Rule::RewriteOr => {
            no_facts(step, "RewriteOr")?;
            no_seos(step, "RewriteOr")?;
            let (lit, target) = deps.anchor_def("RewriteOr")?;
            let disjuncts = match target {
                Formula::Or(cs) => cs,
                _ => return err("RewriteOr anchor is not a disjunction"),
            };
            let anchor = Formula::BoolVar(lit.to_string());
            let mut literals = Vec::with_capacity(disjuncts.len());
            for d in disjuncts {
                let l = deps
                    .def_of_formula(d)
                    .ok_or("a disjunct has no definition dependency")?;
                literals.push(Formula::BoolVar(l.to_string()));
            }
            let mut expected = vec![implies(anchor.clone(), or_of(literals.clone()))];
            for l in &literals {
                expected.push(implies(complement(&anchor), complement(l)));
            }
            lemmas_exactly(step, &expected, "RewriteOr")
        }
        Rule::RewriteAnd => check_conjunct_extraction(state, step, "RewriteAnd"),
        Rule::RewriteNeg => {
            no_facts(step, "RewriteNeg")?;
            no_seos(step, "RewriteNeg")?;
            let (lit, target) = deps.anchor_def("RewriteNeg")?;
            let pushed = neg_one_level(target)
                .ok_or("RewriteNeg anchor is not a negated compound formula")?;
            let inner = match target {
                Formula::Not(inner) => (**inner).clone(),
                _ => unreachable!("neg_one_level accepts only negations"),
            };
            let anchor = Formula::BoolVar(lit.to_string());
            let expected = [
                implies(anchor.clone(), pushed),
                implies(complement(&anchor), inner),
            ];
            lemmas_exactly(step, &expected, "RewriteNeg")
        }
        Rule::ExistentialInst => {
            no_facts(step, "ExistentialInst")?;
            let (lit, target) = deps.anchor_def("ExistentialInst")?;
            let (binder, body) = match target {
                Formula::Exists(b, body) => (b, body),
                _ => return err("ExistentialInst anchor is not an existential"),
            };
            let (name, class) = one_obj(step, "ExistentialInst")?;
            require(
                state.is_fresh_name(name),
                &format!("object name `{name}` is not fresh"),
            )?;
            require(class == binder.class, "object class does not match the binder")?;
            let witnessed = and_of(vec![
                Formula::Ext(name.to_string()),
                body.subst_obj(&binder.var, name),
            ]);
            lemmas_exactly(step, &define_lemmas(lit, &witnessed), "ExistentialInst")
        }
        Rule::UniversalInst => {
            no_facts(step, "UniversalInst")?;
            no_seos(step, "UniversalInst")?;
            let (lit, target) = deps.anchor_def("UniversalInst")?;
            let (binder, body) = match target {
                Formula::Forall(b, body) => (b, body),
                _ => return err("UniversalInst anchor is not a universal"),
            };
            let added = one_lemma(step, "UniversalInst")?;
            let anchor = Formula::BoolVar(lit.to_string());
            let ok = deps.objs.iter().any(|(name, class)| {
                *class == binder.class
                    && *added
                        == implies(
                            anchor.clone(),
                            implies(
                                Formula::Ext(name.to_string()),
                                body.subst_obj(&binder.var, name),
                            ),
                        )
            });
            require(
                ok,
                "no object dependency instantiates the universal to the added lemma",
            )
        }
        Rule::Unit => {
            no_facts(step, "Unit")?;
            no_seos(step, "Unit")?;
            let added = one_lemma(step, "Unit")?;
            let ok = deps.lemmas.iter().any(|clause| {
                let xs = match clause {
                    Formula::Or(xs) => xs,
                    _ => return false,
                };
                xs.iter().enumerate().any(|(i, x)| {
                    deps.has_lemma(&complement(x)) && {
                        let remaining: Vec<Formula> = xs
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, f)| f.clone())
                            .collect();
                        or_of(remaining) == *added
                    }
                })
            });
            require(
                ok,
                "no clause dependency resolves with a complemented unit to the added lemma",
            )
        }
        Rule::Unsat => {
            no_lemmas(step, "UNSAT")?;
            no_facts(step, "UNSAT")?;
            no_seos(step, "UNSAT")?;
            require(
                deps.has_lemma(&Formula::False) || deps.has_fact(&Formula::False),
                "no dependency is the constant false",
            )
        }
        Rule::TDerive => {
            no_lemmas(step, "TDerive")?;
            no_seos(step, "TDerive")?;
            let goal = match step.add_f.as_slice() {
                [(_, f)] => f,
                _ => return err("TDerive must add exactly one fact"),
            };
            require(is_in_theory(goal), "added fact is not a theory formula")?;
            let facts: Vec<Formula> = deps.facts.iter().map(|f| (*f).clone()).collect();
            match entails(&facts, goal, theory_budget) {
                Entailment::Holds => Ok(()),
                Entailment::Fails => err("the fact dependencies do not entail the added fact"),
                Entailment::Unknown => err("theory budget exhausted"),
            }
        }
        Rule::FolToT => {
            no_lemmas(step, "FolToT")?;
            no_seos(step, "FolToT")?;
            require(!step.add_f.is_empty(), "FolToT must add at least one fact")?;
            for (_, f) in &step.add_f {
                require(is_in_theory(f), "added fact is not a theory formula")?;
                require(
                    deps.has_lemma(f),
                    "added fact is not among the lemma dependencies",
                )?;
            }
            Ok(())
        }
        Rule::TToFol => {
            no_facts(step, "TToFol")?;
            no_seos(step, "TToFol")?;
            require(!step.add_r.is_empty(), "TToFol must add at least one lemma")?;
            for (_, f) in &step.add_r {
                require(
                    deps.has_fact(f),
                    "added lemma is not among the fact dependencies",
                )?;
            }
            Ok(())
        }
        Rule::RewriteAndStar => check_conjunct_extraction(state, step, "RewriteAND*"),
        Rule::RewriteOrStar => {
            no_facts(step, "RewriteOR*")?;
            let target = target_lemma(state, step, "RewriteOR*")?;
            let disjuncts = match target {
                Formula::Or(cs) => cs,
                _ => return err("RewriteOR* target is not a disjunction"),
            };
            require(
                step.add_d.len() == disjuncts.len(),
                "RewriteOR* must define every disjunct",
            )?;
            let mut lits: Vec<&str> = Vec::with_capacity(disjuncts.len());
            for ((_, item), disjunct) in step.add_d.iter().zip(disjuncts) {
                let (lit, formula) = match item {
                    SeoItem::Def { lit, formula } => (lit, formula),
                    _ => return err("RewriteOR* may only add definitions"),
                };
                require(
                    state.is_fresh_name(lit) && !lits.contains(&lit.as_str()),
                    &format!("literal `{lit}` is not fresh"),
                )?;
                require(
                    formula == disjunct,
                    "definitions must bind the disjuncts in order",
                )?;
                lits.push(lit);
            }
            let mut expected: Vec<Formula> = lits
                .iter()
                .zip(disjuncts)
                .map(|(lit, disjunct)| {
                    implies(Formula::BoolVar(lit.to_string()), disjunct.clone())
                })
                .collect();
            expected.push(or_of(
                lits.iter()
                    .map(|l| Formula::BoolVar(l.to_string()))
                    .collect(),
            ));
            lemmas_exactly(step, &expected, "RewriteOR*")
        }
        Rule::ExistentialInstStar => {
            no_facts(step, "ExistentialInst*")?;
            let target = target_lemma(state, step, "ExistentialInst*")?;
            let (binder, body) = match target {
                Formula::Exists(b, body) => (b, body),
                _ => return err("ExistentialInst* target is not an existential"),
            };
            let (name, class) = one_obj(step, "ExistentialInst*")?;
            require(
                state.is_fresh_name(name),
                &format!("object name `{name}` is not fresh"),
            )?;
            require(class == binder.class, "object class does not match the binder")?;
            let added = one_lemma(step, "ExistentialInst*")?;
            let witnessed = and_of(vec![
                Formula::Ext(name.to_string()),
                body.subst_obj(&binder.var, name),
            ]);
            require(*added == witnessed, "added lemma is not the witnessed body")
        }
        Rule::UniversalInstStar => {
            no_facts(step, "UniversalInst*")?;
            no_seos(step, "UniversalInst*")?;
            let target = target_lemma(state, step, "UniversalInst*")?;
            let (binder, body) = match target {
                Formula::Forall(b, body) => (b, body),
                _ => return err("UniversalInst* target is not a universal"),
            };
            let added = one_lemma(step, "UniversalInst*")?;
            let ok = deps.objs.iter().any(|(name, class)| {
                *class == binder.class
                    && *added
                        == implies(
                            Formula::Ext(name.to_string()),
                            body.subst_obj(&binder.var, name),
                        )
            });
            require(
                ok,
                "no object dependency instantiates the universal to the added lemma",
            )
        }
    }
}
