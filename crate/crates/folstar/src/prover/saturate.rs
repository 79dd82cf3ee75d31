//! The saturation loop behind [`prove`](super::prove).
//!
//! Each round works in three phases. Phase A drains a queue of
//! quantified lemmas: existentials are instantiated with fresh objects,
//! conjunctions are split, universals are parked for phase B, negations
//! are pushed one level, and disjunctions are compiled to a literal
//! clause with guarded definitions per disjunct. Phase B instantiates
//! every parked universal against every known object of the right class
//! (once per pair). Phase C hands the accumulated ground lemmas to the
//! theory solver: an UNSAT verdict is minimized and closed off with the
//! theory-boundary steps, a SAT or Unknown verdict falls back to a
//! bounded model search over the original assertions, and otherwise the
//! next round begins. Rounds bound the object population, which is what
//! keeps the loop finite on problems that saturate forever.

use std::collections::{BTreeSet, VecDeque};

use crate::fol::{
    and_of, brute_force_sat, complement, implies, or_of, Binder, Formula, Problem,
};
use crate::lia::{check_sat, minimize_core, TheoryVerdict};
use crate::proof::{define_lemmas, Deps, Id, Proof, Rule, SeoItem};

use super::builder::ProofBuilder;
use super::cleanup::cleanup;
use super::{derive_nnf, ProveOutcome, ProverConfig};

/// Run the loop to completion. Internal errors (a step the builder
/// refuses mid-derivation) surface as an `Unknown` outcome rather than a
/// panic: the prover must never claim a verdict it cannot back.
pub(super) fn run(problem: &Problem, cfg: &ProverConfig) -> ProveOutcome {
    let mut sat = Saturation::new(problem, cfg);
    match sat.run() {
        Ok(outcome) => outcome,
        Err(e) => ProveOutcome::Unknown(format!("internal error: {e}")),
    }
}

/// A universal lemma parked for phase B: lemma id, binder, body.
struct Universal {
    lemma: Id,
    binder: Binder,
    body: Formula,
}

/// A universal disjunct guarded by a definition literal: instances are
/// emitted as guarded lemmas `l ⇒ (ext(o) ⇒ body[o])` for the solver.
struct GuardedUniversal {
    def: Id,
    lit: String,
    binder: Binder,
    body: Formula,
}

struct Saturation<'a> {
    problem: &'a Problem,
    cfg: &'a ProverConfig,
    b: ProofBuilder,
    /// Quantified lemmas awaiting phase-A decomposition.
    work: VecDeque<(Id, Formula)>,
    /// Formulas already routed, so nothing is decomposed or pooled twice.
    seen: BTreeSet<Formula>,
    /// Ground lemmas accumulated for the phase-C solver call.
    pool: Vec<(Id, Formula)>,
    universals: Vec<Universal>,
    guarded: Vec<GuardedUniversal>,
    /// Known objects: SEO id, name, class.
    objects: Vec<(Id, String, String)>,
    /// Universal × object pairs already instantiated.
    pairs: BTreeSet<(usize, usize)>,
    guarded_pairs: BTreeSet<(usize, usize)>,
    /// Bounded model search over the assertions, computed at most once.
    probe: Option<Option<crate::fol::Solution>>,
    /// Did any theory call give up on its budget?
    budget_hit: bool,
}

impl<'a> Saturation<'a> {
    fn new(problem: &'a Problem, cfg: &'a ProverConfig) -> Self {
        Saturation {
            problem,
            cfg,
            b: ProofBuilder::new(cfg.theory_budget),
            work: VecDeque::new(),
            seen: BTreeSet::new(),
            pool: Vec::new(),
            universals: Vec::new(),
            guarded: Vec::new(),
            objects: Vec::new(),
            pairs: BTreeSet::new(),
            guarded_pairs: BTreeSet::new(),
            probe: None,
            budget_hit: false,
        }
    }

    fn run(&mut self) -> Result<ProveOutcome, String> {
        self.load_problem()?;
        let mut rounds = 0;
        while rounds < self.cfg.max_rounds {
            rounds += 1;
            let steps_before = self.b.steps().len();
            self.drain_work()?;
            self.sweep_universals()?;
            if let Some(outcome) = self.endgame()? {
                return Ok(outcome);
            }
            if self.b.steps().len() == steps_before {
                return Ok(ProveOutcome::Unknown(format!(
                    "saturated after {rounds} round(s) without deriving a contradiction"
                )));
            }
        }
        if self.budget_hit {
            Ok(ProveOutcome::Unknown(format!(
                "theory budget exhausted within {rounds} round(s)"
            )))
        } else {
            Ok(ProveOutcome::Unknown(format!(
                "round budget exhausted after {rounds} round(s)"
            )))
        }
    }

    /// Emit the single Input step and route its contents.
    fn load_problem(&mut self) -> Result<(), String> {
        let lemmas = self.problem.assertions.clone();
        let seos: Vec<SeoItem> = self
            .problem
            .signature
            .objects
            .iter()
            .map(|(name, class)| SeoItem::Obj {
                name: name.clone(),
                class: class.clone(),
            })
            .collect();
        let ids = self
            .b
            .apply(Rule::Input, Deps::default(), lemmas.clone(), vec![], seos)?;
        for (id, f) in ids.lemmas.iter().zip(&lemmas) {
            self.dispatch(*id, f.clone());
        }
        for (seo, (name, class)) in ids.seos.iter().zip(&self.problem.signature.objects) {
            self.objects.push((*seo, name.clone(), class.clone()));
        }
        Ok(())
    }

    /// Route a derived lemma: ground formulas feed the solver pool,
    /// quantified ones queue for decomposition. Duplicates are dropped.
    fn dispatch(&mut self, id: Id, f: Formula) {
        if !self.seen.insert(f.clone()) {
            return;
        }
        if f.has_quantifier() {
            self.work.push_back((id, f));
        } else {
            self.pool.push((id, f));
        }
    }

    /// Route a definitional side lemma: pool it if ground, otherwise
    /// leave it inert. Guarded lemmas never re-enter the work queue —
    /// decomposing them would regress through their own definitions.
    fn pool_if_ground(&mut self, id: Id, f: Formula) {
        if f.has_quantifier() || !self.seen.insert(f.clone()) {
            return;
        }
        self.pool.push((id, f));
    }

    /// Phase A: decompose every queued quantified lemma.
    fn drain_work(&mut self) -> Result<(), String> {
        while let Some((id, f)) = self.work.pop_front() {
            match &f {
                Formula::Exists(_, _) => self.instantiate_existential(id, &f)?,
                Formula::And(cs) => self.split_conjunction(id, cs.clone())?,
                Formula::Forall(binder, body) => self.universals.push(Universal {
                    lemma: id,
                    binder: binder.clone(),
                    body: (**body).clone(),
                }),
                Formula::Not(_) => {
                    let (nid, g) = derive_nnf(&mut self.b, id, &f)?;
                    self.dispatch(nid, g);
                }
                Formula::Or(ds) => self.split_disjunction(id, ds.clone())?,
                _ => unreachable!("ground formulas are pooled at dispatch"),
            }
        }
        Ok(())
    }

    /// `∃x:C·p(x)` — pick a fresh witness object and derive
    /// `ext(x°) ∧ p(x°)` in one macro step.
    fn instantiate_existential(&mut self, id: Id, f: &Formula) -> Result<(), String> {
        let Formula::Exists(binder, body) = f else {
            return Err("existential instantiation on a non-existential".into());
        };
        let name = self.b.fresh_obj(&binder.var);
        let witnessed = and_of(vec![
            Formula::Ext(name.clone()),
            body.subst_obj(&binder.var, &name),
        ]);
        let ids = self.b.apply(
            Rule::ExistentialInstStar,
            Deps {
                r: vec![id],
                ..Deps::default()
            },
            vec![witnessed.clone()],
            vec![],
            vec![SeoItem::Obj {
                name: name.clone(),
                class: binder.class.clone(),
            }],
        )?;
        self.objects.push((ids.seos[0], name, binder.class.clone()));
        self.dispatch(ids.lemmas[0], witnessed);
        Ok(())
    }

    /// `φ₁ ∧ … ∧ φₙ` — extract every conjunct in one macro step.
    fn split_conjunction(&mut self, id: Id, conjuncts: Vec<Formula>) -> Result<(), String> {
        let ids = self.b.apply(
            Rule::RewriteAndStar,
            Deps {
                r: vec![id],
                ..Deps::default()
            },
            conjuncts.clone(),
            vec![],
            vec![],
        )?;
        for (cid, c) in ids.lemmas.iter().zip(conjuncts) {
            self.dispatch(*cid, c);
        }
        Ok(())
    }

    /// A quantified disjunction: compile it to a clause over definition
    /// literals, then give each quantified disjunct its one-shot guarded
    /// treatment. The macro path needs every disjunct distinct and
    /// undefined (its step introduces all the definitions itself); any
    /// collision falls back to the primitive chain, which reuses
    /// existing definitions.
    fn split_disjunction(&mut self, id: Id, disjuncts: Vec<Formula>) -> Result<(), String> {
        let macro_ok = self.cfg.emit_macros && {
            let distinct: BTreeSet<&Formula> = disjuncts.iter().collect();
            distinct.len() == disjuncts.len()
                && disjuncts
                    .iter()
                    .all(|d| self.b.state().def_of_formula(d).is_none())
        };
        let bindings = if macro_ok {
            self.disjunction_macro(id, &disjuncts)?
        } else {
            self.disjunction_primitive(id, &disjuncts)?
        };
        let mut seen_defs = BTreeSet::new();
        for (def, lit, d) in bindings {
            if !seen_defs.insert(def) {
                continue;
            }
            match &d {
                Formula::Exists(_, _) => self.guarded_existential(def, &lit, &d)?,
                Formula::Forall(binder, body) => self.guarded.push(GuardedUniversal {
                    def,
                    lit,
                    binder: binder.clone(),
                    body: (**body).clone(),
                }),
                Formula::Not(_) => self.guarded_negation(def, &lit, &d)?,
                // Nested connectives stay behind their literal: the
                // clause plus the definition lemmas already over-
                // approximate them soundly.
                _ => {}
            }
        }
        Ok(())
    }

    /// One RewriteOR* step: fresh definitions for all disjuncts, their
    /// positive definition lemmas, and the literal clause.
    fn disjunction_macro(
        &mut self,
        id: Id,
        disjuncts: &[Formula],
    ) -> Result<Vec<(Id, String, Formula)>, String> {
        let lits: Vec<String> = disjuncts.iter().map(|_| self.b.fresh_lit()).collect();
        let mut lemmas: Vec<Formula> = lits
            .iter()
            .zip(disjuncts)
            .map(|(l, d)| implies(Formula::BoolVar(l.clone()), d.clone()))
            .collect();
        let clause = or_of(lits.iter().map(|l| Formula::BoolVar(l.clone())).collect());
        lemmas.push(clause);
        let seos: Vec<SeoItem> = lits
            .iter()
            .zip(disjuncts)
            .map(|(l, d)| SeoItem::Def {
                lit: l.clone(),
                formula: d.clone(),
            })
            .collect();
        let ids = self.b.apply(
            Rule::RewriteOrStar,
            Deps {
                r: vec![id],
                ..Deps::default()
            },
            lemmas.clone(),
            vec![],
            seos,
        )?;
        for (rid, lemma) in ids.lemmas.iter().zip(&lemmas) {
            self.pool_if_ground(*rid, lemma.clone());
        }
        Ok(ids
            .seos
            .iter()
            .zip(lits)
            .zip(disjuncts)
            .map(|((seo, lit), d)| (*seo, lit, d.clone()))
            .collect())
    }

    /// The primitive chain: define the disjunction and each disjunct,
    /// assert the defined literal, rewrite it to the literal clause, and
    /// cut the guard away with Unit.
    fn disjunction_primitive(
        &mut self,
        id: Id,
        disjuncts: &[Formula],
    ) -> Result<Vec<(Id, String, Formula)>, String> {
        let whole = or_of(disjuncts.to_vec());
        let (def_whole, lit_whole) = self.b.def_get_or_define(&whole)?;
        let asserted = self.b.apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![id],
                d: vec![def_whole],
                ..Deps::default()
            },
            vec![Formula::BoolVar(lit_whole.clone())],
            vec![],
            vec![],
        )?;
        let mut bindings: Vec<(Id, String, Formula)> = Vec::new();
        for d in disjuncts {
            let (def, lit) = self.b.def_get_or_define(d)?;
            let pos = self.b.positive_def_lemma(&lit, d)?;
            self.pool_if_ground(pos, implies(Formula::BoolVar(lit.clone()), d.clone()));
            bindings.push((def, lit, d.clone()));
        }
        let anchor = Formula::BoolVar(lit_whole);
        let literals: Vec<Formula> = bindings
            .iter()
            .map(|(_, l, _)| Formula::BoolVar(l.clone()))
            .collect();
        let mut lemmas = vec![implies(anchor.clone(), or_of(literals.clone()))];
        for l in &literals {
            lemmas.push(implies(complement(&anchor), complement(l)));
        }
        let mut dep_defs = vec![def_whole];
        for (def, _, _) in &bindings {
            if !dep_defs.contains(def) {
                dep_defs.push(*def);
            }
        }
        let ids = self.b.apply(
            Rule::RewriteOr,
            Deps {
                d: dep_defs,
                ..Deps::default()
            },
            lemmas.clone(),
            vec![],
            vec![],
        )?;
        for (rid, lemma) in ids.lemmas.iter().zip(&lemmas).skip(1) {
            self.pool_if_ground(*rid, lemma.clone());
        }
        let clause = or_of(literals);
        let cut = self.b.apply(
            Rule::Unit,
            Deps {
                r: vec![ids.lemmas[0], asserted.lemmas[0]],
                ..Deps::default()
            },
            vec![clause.clone()],
            vec![],
            vec![],
        )?;
        self.pool_if_ground(cut.lemmas[0], clause);
        Ok(bindings)
    }

    /// A defined existential disjunct: instantiate it once behind its
    /// guard, so the solver may open `l ⇒ ext(x°) ∧ p(x°)` if it ever
    /// commits to `l`.
    fn guarded_existential(&mut self, def: Id, lit: &str, f: &Formula) -> Result<(), String> {
        let Formula::Exists(binder, body) = f else {
            return Err("guarded existential on a non-existential".into());
        };
        let name = self.b.fresh_obj(&binder.var);
        let witnessed = and_of(vec![
            Formula::Ext(name.clone()),
            body.subst_obj(&binder.var, &name),
        ]);
        let lemmas = define_lemmas(lit, &witnessed);
        let ids = self.b.apply(
            Rule::ExistentialInst,
            Deps {
                d: vec![def],
                ..Deps::default()
            },
            lemmas.to_vec(),
            vec![],
            vec![SeoItem::Obj {
                name: name.clone(),
                class: binder.class.clone(),
            }],
        )?;
        self.objects.push((ids.seos[0], name, binder.class.clone()));
        for (rid, lemma) in ids.lemmas.iter().zip(lemmas) {
            self.pool_if_ground(*rid, lemma);
        }
        Ok(())
    }

    /// A defined negation disjunct: push the negation one level behind
    /// its guard.
    fn guarded_negation(&mut self, def: Id, lit: &str, f: &Formula) -> Result<(), String> {
        let Formula::Not(inner) = f else {
            return Err("guarded negation on a non-negation".into());
        };
        let Some(pushed) = crate::fol::neg_one_level(f) else {
            // A negated atom is already solver-ready; nothing to push.
            return Ok(());
        };
        let anchor = Formula::BoolVar(lit.to_string());
        let lemmas = vec![
            implies(anchor.clone(), pushed),
            implies(complement(&anchor), (**inner).clone()),
        ];
        let ids = self.b.apply(
            Rule::RewriteNeg,
            Deps {
                d: vec![def],
                ..Deps::default()
            },
            lemmas.clone(),
            vec![],
            vec![],
        )?;
        for (rid, lemma) in ids.lemmas.iter().zip(lemmas) {
            self.pool_if_ground(*rid, lemma);
        }
        Ok(())
    }

    /// Phase B: instantiate parked universals against every known object
    /// of the right class, each pair at most once across rounds.
    fn sweep_universals(&mut self) -> Result<(), String> {
        for ui in 0..self.universals.len() {
            for oi in 0..self.objects.len() {
                if self.objects[oi].2 != self.universals[ui].binder.class
                    || !self.pairs.insert((ui, oi))
                {
                    continue;
                }
                let (lemma, binder, body) = {
                    let u = &self.universals[ui];
                    (u.lemma, u.binder.clone(), u.body.clone())
                };
                let (obj_id, name) = (self.objects[oi].0, self.objects[oi].1.clone());
                let inst = implies(
                    Formula::Ext(name.clone()),
                    body.subst_obj(&binder.var, &name),
                );
                let ids = self.b.apply(
                    Rule::UniversalInstStar,
                    Deps {
                        r: vec![lemma],
                        d: vec![obj_id],
                        ..Deps::default()
                    },
                    vec![inst.clone()],
                    vec![],
                    vec![],
                )?;
                self.after_universal_inst(ids.lemmas[0], inst, &name)?;
            }
        }
        for gi in 0..self.guarded.len() {
            for oi in 0..self.objects.len() {
                if self.objects[oi].2 != self.guarded[gi].binder.class
                    || !self.guarded_pairs.insert((gi, oi))
                {
                    continue;
                }
                let (def, lit, binder, body) = {
                    let g = &self.guarded[gi];
                    (g.def, g.lit.clone(), g.binder.clone(), g.body.clone())
                };
                let (obj_id, name) = (self.objects[oi].0, self.objects[oi].1.clone());
                let guarded = implies(
                    Formula::BoolVar(lit),
                    implies(
                        Formula::Ext(name.clone()),
                        body.subst_obj(&binder.var, &name),
                    ),
                );
                let ids = self.b.apply(
                    Rule::UniversalInst,
                    Deps {
                        d: vec![def, obj_id],
                        ..Deps::default()
                    },
                    vec![guarded.clone()],
                    vec![],
                    vec![],
                )?;
                self.pool_if_ground(ids.lemmas[0], guarded);
            }
        }
        Ok(())
    }

    /// Route a fresh universal instance `ext(o) ⇒ p(o)`. When the body
    /// is still quantified and the object is known to exist, cut the
    /// guard immediately so the body keeps decomposing; otherwise route
    /// the instance as-is.
    fn after_universal_inst(&mut self, id: Id, inst: Formula, name: &str) -> Result<(), String> {
        if !inst.has_quantifier() {
            self.dispatch(id, inst);
            return Ok(());
        }
        let ext = Formula::Ext(name.to_string());
        if let Some(ext_id) = self.b.state().lemma_with(&ext) {
            if let Some(rest) = unit_resolve(&inst, &ext) {
                let ids = self.b.apply(
                    Rule::Unit,
                    Deps {
                        r: vec![id, ext_id],
                        ..Deps::default()
                    },
                    vec![rest.clone()],
                    vec![],
                    vec![],
                )?;
                self.dispatch(ids.lemmas[0], rest);
                return Ok(());
            }
        }
        self.dispatch(id, inst);
        Ok(())
    }

    /// Phase C: ask the theory solver about the pool; refute, report a
    /// model, or keep going.
    fn endgame(&mut self) -> Result<Option<ProveOutcome>, String> {
        let formulas: Vec<Formula> = self.pool.iter().map(|(_, f)| f.clone()).collect();
        match check_sat(&formulas, self.cfg.theory_budget) {
            TheoryVerdict::Unsat(_) => {
                let kept = minimize_core(&formulas, self.cfg.theory_budget);
                let core: Vec<(Id, Formula)> =
                    kept.iter().map(|&i| self.pool[i].clone()).collect();
                Ok(Some(ProveOutcome::Unsat(self.refute(core)?)))
            }
            TheoryVerdict::Sat(_) => Ok(self.probe()),
            TheoryVerdict::Unknown => {
                self.budget_hit = true;
                Ok(self.probe())
            }
        }
    }

    /// Close the proof: ship the unsat core across the theory boundary,
    /// derive falsum (unless the core already is falsum), and end with
    /// UNSAT. The finished step list is cleaned before returning.
    fn refute(&mut self, core: Vec<(Id, Formula)>) -> Result<Proof, String> {
        let facts: Vec<Formula> = core.iter().map(|(_, f)| f.clone()).collect();
        let deps: Vec<Id> = core.iter().map(|(id, _)| *id).collect();
        let shipped = self.b.apply(
            Rule::FolToT,
            Deps {
                r: deps,
                ..Deps::default()
            },
            vec![],
            facts.clone(),
            vec![],
        )?;
        let falsum = match facts.iter().position(|f| *f == Formula::False) {
            Some(i) => shipped.facts[i],
            None => {
                self.b
                    .apply(
                        Rule::TDerive,
                        Deps {
                            f: shipped.facts.clone(),
                            ..Deps::default()
                        },
                        vec![],
                        vec![Formula::False],
                        vec![],
                    )?
                    .facts[0]
            }
        };
        self.b.apply(
            Rule::Unsat,
            Deps {
                f: vec![falsum],
                ..Deps::default()
            },
            vec![],
            vec![],
            vec![],
        )?;
        Ok(Proof {
            steps: cleanup(self.b.steps()),
        })
    }

    /// Bounded model search over the original assertions, cached: the
    /// assertions never change, so neither does the answer.
    fn probe(&mut self) -> Option<ProveOutcome> {
        let problem = self.problem;
        let bounds = &self.cfg.sat_probe;
        let cached = self.probe.get_or_insert_with(|| {
            brute_force_sat(&problem.assertions, &problem.signature, bounds).unwrap_or(None)
        });
        cached.clone().map(ProveOutcome::Sat)
    }
}

/// Resolve `unit` against the first complementary element of `clause`,
/// returning the remaining disjunction.
fn unit_resolve(clause: &Formula, unit: &Formula) -> Option<Formula> {
    let Formula::Or(xs) = clause else {
        return None;
    };
    let i = xs.iter().position(|x| complement(x) == *unit)?;
    let rest: Vec<Formula> = xs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, x)| x.clone())
        .collect();
    Some(or_of(rest))
}
