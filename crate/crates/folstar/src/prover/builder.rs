//! Incremental proof construction.
//!
//! A [`ProofBuilder`] threads the proof state through successive step
//! applications, allocates dense resource ids, and hands out fresh
//! literal and object names. Every step goes through the ordinary
//! state-transition function, so the builder can only ever produce
//! replayable proofs — a dead end here is a construction bug and is
//! surfaced as an error instead of a corrupt proof.

use crate::fol::Formula;
use crate::proof::{
    apply_step, define_lemmas, initial_state, Deps, Id, Proof, Rule, SeoItem, State, Step,
};

/// Ids allocated for one applied step, split by resource kind.
#[derive(Debug, Clone, Default)]
pub struct Applied {
    pub lemmas: Vec<Id>,
    pub facts: Vec<Id>,
    pub seos: Vec<Id>,
}

/// Builds a proof one step at a time against a live state.
#[derive(Debug, Clone)]
pub struct ProofBuilder {
    steps: Vec<Step>,
    state: State,
    next_id: Id,
    name_counter: usize,
    theory_budget: u64,
}

impl ProofBuilder {
    pub fn new(theory_budget: u64) -> Self {
        ProofBuilder {
            steps: Vec::new(),
            state: initial_state(),
            next_id: 0,
            name_counter: 1,
            theory_budget,
        }
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }

    pub fn into_proof(self) -> Proof {
        Proof { steps: self.steps }
    }

    /// A literal name `l<k>` unused by the current state.
    pub fn fresh_lit(&mut self) -> String {
        loop {
            let name = format!("l{}", self.name_counter);
            self.name_counter += 1;
            if self.state.is_fresh_name(&name) {
                return name;
            }
        }
    }

    /// An object name `<var>_o<k>` unused by the current state.
    pub fn fresh_obj(&mut self, var: &str) -> String {
        loop {
            let name = format!("{var}_o{}", self.name_counter);
            self.name_counter += 1;
            if self.state.is_fresh_name(&name) {
                return name;
            }
        }
    }

    /// Append one step with the given additions, allocating their ids.
    /// Errors carry the dead-end reason and leave the builder unchanged.
    pub fn apply(
        &mut self,
        rule: Rule,
        deps: Deps,
        lemmas: Vec<Formula>,
        facts: Vec<Formula>,
        seos: Vec<SeoItem>,
    ) -> Result<Applied, String> {
        let mut ids = Applied::default();
        let mut next = self.next_id;
        let mut alloc = |n: usize| -> Vec<Id> {
            let ids: Vec<Id> = (next..next + n).collect();
            next += n;
            ids
        };
        ids.lemmas = alloc(lemmas.len());
        ids.facts = alloc(facts.len());
        ids.seos = alloc(seos.len());
        let step = Step {
            id: self.steps.len(),
            rule,
            deps,
            add_r: ids.lemmas.iter().copied().zip(lemmas).collect(),
            add_f: ids.facts.iter().copied().zip(facts).collect(),
            add_d: ids.seos.iter().copied().zip(seos).collect(),
        };
        let applied = apply_step(&self.state, &step, self.theory_budget);
        if let Some(dead) = &applied.dead {
            return Err(format!("cannot apply {}: {}", rule.name(), dead.reason));
        }
        self.state = applied;
        self.next_id = next;
        self.steps.push(step);
        Ok(ids)
    }

    /// The definition binding for `f`, creating it with a Define step if
    /// no literal stands for `f` yet. Returns the binding's id and literal.
    pub fn def_get_or_define(&mut self, f: &Formula) -> Result<(Id, String), String> {
        if let Some(id) = self.state.def_of_formula(f) {
            let lit = match &self.state.seos[&id] {
                SeoItem::Def { lit, .. } => lit.clone(),
                SeoItem::Obj { .. } => unreachable!("definition ids always map to definitions"),
            };
            return Ok((id, lit));
        }
        let lit = self.fresh_lit();
        let [pos, neg] = define_lemmas(&lit, f);
        let ids = self.apply(
            Rule::Define,
            Deps::default(),
            vec![pos, neg],
            vec![],
            vec![SeoItem::Def {
                lit: lit.clone(),
                formula: f.clone(),
            }],
        )?;
        Ok((ids.seos[0], lit))
    }

    /// Id of the lemma `lit ⇒ f` (the positive definition lemma of an
    /// existing binding). Present for every binding in a replayable state.
    pub fn positive_def_lemma(&self, lit: &str, f: &Formula) -> Result<Id, String> {
        let wanted = crate::fol::implies(Formula::BoolVar(lit.to_string()), f.clone());
        self.state
            .lemma_with(&wanted)
            .ok_or_else(|| format!("no positive definition lemma for `{lit}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_raw_formula;

    fn f(src: &str) -> Formula {
        parse_raw_formula(src).unwrap()
    }

    #[test]
    fn define_is_reused_not_duplicated() {
        let mut b = ProofBuilder::new(1_000);
        let (id1, lit1) = b.def_get_or_define(&f("(> x 0)")).unwrap();
        let (id2, lit2) = b.def_get_or_define(&f("(> x 0)")).unwrap();
        assert_eq!((id1, &lit1), (id2, &lit2));
        assert_eq!(b.steps().len(), 1);
    }

    #[test]
    fn fresh_names_skip_taken_ones() {
        let mut b = ProofBuilder::new(1_000);
        // `l1` appears in the input formula, so the namer must skip it.
        b.apply(
            Rule::Input,
            Deps::default(),
            vec![f("(and l1 (> x 0))")],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(b.fresh_lit(), "l2");
    }

    #[test]
    fn failed_application_leaves_builder_untouched() {
        let mut b = ProofBuilder::new(1_000);
        let err = b
            .apply(
                Rule::Unsat,
                Deps::default(),
                vec![],
                vec![],
                vec![],
            )
            .unwrap_err();
        assert!(err.contains("UNSAT"), "{err}");
        assert!(b.steps().is_empty());
    }
}
