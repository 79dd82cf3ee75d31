//! Macro expansion: each of the four shortcut rules unfolds into a
//! sequence of primitive steps with the same net effect.
//!
//! The expansion keeps the macro's declared resource ids and names for
//! everything the macro itself adds, and allocates bookkeeping resources
//! (definition literals, intermediate lemmas) from a [`TempAlloc`] whose
//! ids sit above every id in the surrounding proof and whose names avoid
//! every name the proof mentions. Replaying the expansion from the
//! macro's pre-state therefore reproduces the macro's post-state exactly,
//! restricted to the declared resources, and the two checking modes
//! accept the same proofs.
//!
//! Expansion first validates the macro step natively, so a macro that
//! would die in native checking also fails to expand, with the same
//! reason.

use std::collections::BTreeSet;

use crate::fol::{and_of, implies, Formula};
use crate::proof::{
    apply_step, check_step, define_lemmas, initial_state, renumber, substitute, Deps, Id, Proof,
    Rule, SeoItem, State, Step,
};

/// Allocates resource ids and literal names guaranteed not to collide
/// with anything the surrounding proof uses.
#[derive(Debug)]
pub struct TempAlloc {
    next_id: Id,
    counter: usize,
    pool: BTreeSet<String>,
}

impl TempAlloc {
    /// An allocator for expansions inside the given step list: ids start
    /// above the list's maximum and names avoid every name it mentions.
    pub fn for_steps(steps: &[Step]) -> TempAlloc {
        let mut pool = BTreeSet::new();
        let mut next_id = 0;
        for step in steps {
            for (id, f) in step.add_r.iter().chain(&step.add_f) {
                next_id = next_id.max(id + 1);
                f.all_names(&mut pool);
            }
            for (id, item) in &step.add_d {
                next_id = next_id.max(id + 1);
                match item {
                    SeoItem::Obj { name, .. } => {
                        pool.insert(name.clone());
                    }
                    SeoItem::Def { lit, formula } => {
                        pool.insert(lit.clone());
                        formula.all_names(&mut pool);
                    }
                }
            }
        }
        TempAlloc {
            next_id,
            counter: 1,
            pool,
        }
    }

    fn id(&mut self) -> Id {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn lit(&mut self) -> String {
        loop {
            let name = format!("m{}", self.counter);
            self.counter += 1;
            if self.pool.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// Expand one macro step into primitives, against the state it applies
/// to. The returned steps all carry the macro's step id, so a failure
/// while replaying them reports against the macro.
pub fn expand_macro(
    state: &State,
    step: &Step,
    alloc: &mut TempAlloc,
    theory_budget: u64,
) -> Result<Vec<Step>, String> {
    if !step.rule.is_macro() {
        return Err(format!("{} is not a macro", step.rule.name()));
    }
    check_step(state, step, theory_budget)?;
    let mut ex = Expander {
        state: state.clone(),
        alloc,
        out: Vec::new(),
        step_id: step.id,
        theory_budget,
    };
    match step.rule {
        Rule::ExistentialInstStar => ex.existential(step)?,
        Rule::UniversalInstStar => ex.universal(step)?,
        Rule::RewriteAndStar => ex.conjunction(step)?,
        Rule::RewriteOrStar => ex.disjunction(step)?,
        _ => unreachable!("is_macro covers exactly the four shortcut rules"),
    }
    Ok(ex.out)
}

/// Rewrite a proof to primitives only: macro steps are replaced by their
/// expansions, everything else is replayed unchanged, and the result is
/// densely renumbered. Errors carry the index of the offending step.
pub fn expand_proof(proof: &Proof, theory_budget: u64) -> Result<Proof, (usize, String)> {
    let mut alloc = TempAlloc::for_steps(&proof.steps);
    let mut state = initial_state();
    let mut out: Vec<Step> = Vec::new();
    for (idx, step) in proof.steps.iter().enumerate() {
        let prims = if step.rule.is_macro() {
            expand_macro(&state, step, &mut alloc, theory_budget).map_err(|e| (idx, e))?
        } else {
            vec![step.clone()]
        };
        for p in prims {
            state = apply_step(&state, &p, theory_budget);
            if let Some(dead) = &state.dead {
                return Err((idx, dead.reason.clone()));
            }
            out.push(p);
        }
    }
    Ok(Proof {
        steps: renumber(&out),
    })
}

/// Builds an expansion's primitive sequence against a scratch copy of the
/// pre-state, so definition reuse and freshness track what earlier
/// primitives of the same expansion added.
struct Expander<'a> {
    state: State,
    alloc: &'a mut TempAlloc,
    out: Vec<Step>,
    step_id: usize,
    theory_budget: u64,
}

impl Expander<'_> {
    fn emit(
        &mut self,
        rule: Rule,
        deps: Deps,
        add_r: Vec<(Id, Formula)>,
        add_f: Vec<(Id, Formula)>,
        add_d: Vec<(Id, SeoItem)>,
    ) -> Result<(), String> {
        let step = Step {
            id: self.step_id,
            rule,
            deps,
            add_r,
            add_f,
            add_d,
        };
        let next = apply_step(&self.state, &step, self.theory_budget);
        if let Some(dead) = next.dead {
            return Err(format!(
                "expansion step {} failed: {}",
                step.rule.name(),
                dead.reason
            ));
        }
        self.state = next;
        self.out.push(step);
        Ok(())
    }

    fn lemma(&self, id: Id) -> &Formula {
        &self.state.lemmas[&id]
    }

    /// The definition binding for `f`, emitting a bookkeeping Define step
    /// when no literal stands for `f` yet.
    fn def_get_or_define(&mut self, f: &Formula) -> Result<(Id, String), String> {
        if let Some(id) = self.state.def_of_formula(f) {
            let lit = match &self.state.seos[&id] {
                SeoItem::Def { lit, .. } => lit.clone(),
                SeoItem::Obj { .. } => unreachable!("definition ids always map to definitions"),
            };
            return Ok((id, lit));
        }
        let lit = self.alloc.lit();
        let [pos, neg] = define_lemmas(&lit, f);
        let (a, b, d) = (self.alloc.id(), self.alloc.id(), self.alloc.id());
        self.emit(
            Rule::Define,
            Deps::default(),
            vec![(a, pos), (b, neg)],
            vec![],
            vec![(
                d,
                SeoItem::Def {
                    lit: lit.clone(),
                    formula: f.clone(),
                },
            )],
        )?;
        Ok((d, lit))
    }

    /// Id of the lemma `lit ⇒ f`, which exists for every binding because
    /// each definition-creating rule adds it.
    fn positive_def_lemma(&self, lit: &str, f: &Formula) -> Result<Id, String> {
        let wanted = implies(Formula::BoolVar(lit.to_string()), f.clone());
        self.state
            .lemma_with(&wanted)
            .ok_or_else(|| format!("no positive definition lemma for `{lit}`"))
    }

    /// Derive the bare literal of `f`'s binding from `f` itself (a lemma
    /// with id `f_id`): the ApplyLemma bookkeeping step.
    fn apply_lemma(&mut self, f_id: Id, def_id: Id, lit: &str) -> Result<Id, String> {
        let id = self.alloc.id();
        self.emit(
            Rule::ApplyLemma,
            Deps {
                r: vec![f_id],
                f: vec![],
                d: vec![def_id],
            },
            vec![(id, Formula::BoolVar(lit.to_string()))],
            vec![],
            vec![],
        )?;
        Ok(id)
    }

    /// Resolve `clause_id` (an implication `lit ⇒ ψ`) with the bare
    /// literal lemma `lit_id`, yielding ψ under the caller's id.
    fn unit(&mut self, clause_id: Id, lit_id: Id, added: (Id, Formula)) -> Result<(), String> {
        self.emit(
            Rule::Unit,
            Deps {
                r: vec![clause_id, lit_id],
                f: vec![],
                d: vec![],
            },
            vec![added],
            vec![],
            vec![],
        )
    }

    /// ExistentialInst*: Define; ApplyLemma; ExistentialInst; Unit.
    fn existential(&mut self, step: &Step) -> Result<(), String> {
        let target_id = step.deps.r[0];
        let target = self.lemma(target_id).clone();
        let (binder, body) = match &target {
            Formula::Exists(b, body) => (b.clone(), (*body.clone())),
            _ => unreachable!("validated by the native check"),
        };
        let (obj_id, name, class) = match step.add_d.as_slice() {
            [(id, SeoItem::Obj { name, class })] => (*id, name.clone(), class.clone()),
            _ => unreachable!("validated by the native check"),
        };
        let (lemma_id, witnessed) = (step.add_r[0].0, step.add_r[0].1.clone());

        let (def_id, lit) = self.def_get_or_define(&target)?;
        let lit_id = self.apply_lemma(target_id, def_id, &lit)?;
        let conj = and_of(vec![
            Formula::Ext(name.clone()),
            body.subst_obj(&binder.var, &name),
        ]);
        let [pos, neg] = define_lemmas(&lit, &conj);
        let (a, b) = (self.alloc.id(), self.alloc.id());
        self.emit(
            Rule::ExistentialInst,
            Deps {
                r: vec![],
                f: vec![],
                d: vec![def_id],
            },
            vec![(a, pos), (b, neg)],
            vec![],
            vec![(obj_id, SeoItem::Obj { name, class })],
        )?;
        self.unit(a, lit_id, (lemma_id, witnessed))
    }

    /// UniversalInst*: Define; ApplyLemma; UniversalInst; Unit.
    fn universal(&mut self, step: &Step) -> Result<(), String> {
        let target_id = step.deps.r[0];
        let target = self.lemma(target_id).clone();
        let (binder, body) = match &target {
            Formula::Forall(b, body) => (b.clone(), (*body.clone())),
            _ => unreachable!("validated by the native check"),
        };
        let (lemma_id, added) = (step.add_r[0].0, step.add_r[0].1.clone());
        // The object dependency whose instantiation is the added lemma.
        let obj_dep = step
            .deps
            .d
            .iter()
            .find(|id| match &self.state.seos[id] {
                SeoItem::Obj { name, class } => {
                    *class == binder.class
                        && added
                            == implies(
                                Formula::Ext(name.clone()),
                                body.subst_obj(&binder.var, name),
                            )
                }
                SeoItem::Def { .. } => false,
            })
            .copied()
            .expect("validated by the native check");

        let (def_id, lit) = self.def_get_or_define(&target)?;
        let lit_id = self.apply_lemma(target_id, def_id, &lit)?;
        let guarded = implies(Formula::BoolVar(lit.clone()), added.clone());
        let a = self.alloc.id();
        self.emit(
            Rule::UniversalInst,
            Deps {
                r: vec![],
                f: vec![],
                d: vec![def_id, obj_dep],
            },
            vec![(a, guarded)],
            vec![],
            vec![],
        )?;
        self.unit(a, lit_id, (lemma_id, added))
    }

    /// RewriteAND*: Define the conjunction and its conjuncts; Subs to the
    /// literal image; ApplyLemma; Unit down to the literal conjunction;
    /// RewriteAnd extracts the needed literals; a Unit per extracted
    /// conjunct recovers it under the macro's ids.
    fn conjunction(&mut self, step: &Step) -> Result<(), String> {
        let target_id = step.deps.r[0];
        let target = self.lemma(target_id).clone();
        let conjuncts = match &target {
            Formula::And(cs) => cs.clone(),
            _ => unreachable!("validated by the native check"),
        };

        let (def_id, lit) = self.def_get_or_define(&target)?;
        let mut bindings: Vec<(Id, String, Formula)> = Vec::new();
        for c in &conjuncts {
            let (d, l) = self.def_get_or_define(c)?;
            if !bindings.iter().any(|(id, _, _)| *id == d) {
                bindings.push((d, l, c.clone()));
            }
        }
        // The image the precondition recomputes from the dependencies: the
        // conjunction with every conjunct replaced by its literal.
        let pairs: Vec<(String, Formula)> = bindings
            .iter()
            .map(|(_, l, f)| (l.clone(), f.clone()))
            .collect();
        let literal_image = substitute(&target, &pairs);
        let [pos, neg] = define_lemmas(&lit, &literal_image);
        let (a, b) = (self.alloc.id(), self.alloc.id());
        self.emit(
            Rule::Subs,
            Deps {
                r: vec![],
                f: vec![],
                d: std::iter::once(def_id)
                    .chain(bindings.iter().map(|(d, _, _)| *d))
                    .collect(),
            },
            vec![(a, pos), (b, neg)],
            vec![],
            vec![],
        )?;
        let lit_id = self.apply_lemma(target_id, def_id, &lit)?;
        let image_id = self.alloc.id();
        self.unit(a, lit_id, (image_id, literal_image))?;

        // Extract each needed literal once, then Unit each back to its
        // conjunct under the macro's ids.
        let mut extracted: Vec<(String, Id)> = Vec::new();
        let mut extraction: Vec<(Id, Formula)> = Vec::new();
        for (_, f) in &step.add_r {
            let (_, l, _) = bindings
                .iter()
                .find(|(_, _, g)| g == f)
                .expect("validated by the native check");
            if !extracted.iter().any(|(name, _)| name == l) {
                let id = self.alloc.id();
                extracted.push((l.clone(), id));
                extraction.push((id, Formula::BoolVar(l.clone())));
            }
        }
        self.emit(
            Rule::RewriteAnd,
            Deps {
                r: vec![image_id],
                f: vec![],
                d: vec![],
            },
            extraction,
            vec![],
            vec![],
        )?;
        for (native_id, f) in &step.add_r {
            let (_, l, _) = bindings
                .iter()
                .find(|(_, _, g)| g == f)
                .expect("validated by the native check");
            let clause = self.positive_def_lemma(l, f)?;
            let lit_lemma = extracted
                .iter()
                .find(|(name, _)| name == l)
                .map(|(_, id)| *id)
                .expect("extracted above");
            self.unit(clause, lit_lemma, (*native_id, f.clone()))?;
        }
        Ok(())
    }

    /// RewriteOR*: Define each disjunct under the macro's binding ids;
    /// Define the disjunction; ApplyLemma; Subs to the literal image; Unit
    /// down to the literal clause under the macro's id.
    fn disjunction(&mut self, step: &Step) -> Result<(), String> {
        let target_id = step.deps.r[0];
        let target = self.lemma(target_id).clone();
        let disjuncts = match &target {
            Formula::Or(cs) => cs.clone(),
            _ => unreachable!("validated by the native check"),
        };
        // add_r is the positive definition lemma per disjunct followed by
        // the literal clause; add_d binds the disjuncts in order.
        let clause = step.add_r.last().expect("validated by the native check");
        let mut def_ids = Vec::new();
        let mut lits = Vec::new();
        for (i, ((d_id, item), disjunct)) in step.add_d.iter().zip(&disjuncts).enumerate() {
            let lit = match item {
                SeoItem::Def { lit, .. } => lit.clone(),
                SeoItem::Obj { .. } => unreachable!("validated by the native check"),
            };
            let [pos, neg] = define_lemmas(&lit, disjunct);
            let neg_id = self.alloc.id();
            self.emit(
                Rule::Define,
                Deps::default(),
                vec![(step.add_r[i].0, pos), (neg_id, neg)],
                vec![],
                vec![(
                    *d_id,
                    SeoItem::Def {
                        lit: lit.clone(),
                        formula: disjunct.clone(),
                    },
                )],
            )?;
            def_ids.push(*d_id);
            lits.push(lit);
        }
        let (def_id, lit) = self.def_get_or_define(&target)?;
        let lit_id = self.apply_lemma(target_id, def_id, &lit)?;
        let pairs: Vec<(String, Formula)> = lits
            .iter()
            .cloned()
            .zip(disjuncts.iter().cloned())
            .collect();
        let literal_image = substitute(&target, &pairs);
        let [pos, neg] = define_lemmas(&lit, &literal_image);
        let (a, b) = (self.alloc.id(), self.alloc.id());
        self.emit(
            Rule::Subs,
            Deps {
                r: vec![],
                f: vec![],
                d: std::iter::once(def_id).chain(def_ids).collect(),
            },
            vec![(a, pos), (b, neg)],
            vec![],
            vec![],
        )?;
        self.unit(a, lit_id, (clause.0, clause.1.clone()))
    }
}
