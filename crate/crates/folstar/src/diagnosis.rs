//! Atom-level diagnosis of refuted inputs.
//!
//! A refutation rarely needs everything the input says. This module walks
//! the atoms of the input formulas — comparisons, `ext` literals, boolean
//! variables and constants, negated atoms, and quantifiers — and decides
//! for each one whether the proof actually used it:
//!
//! * a ground atom is **active** when its instantiated image is a lemma of
//!   the proof's final state, or occurs inside one of its facts;
//! * an atom under quantifiers is evaluated through the substitutions the
//!   proof's instantiation steps actually performed, so a bound object may
//!   only be replaced by a witness the derivation introduced for it;
//! * a quantifier is **active** when some recorded instantiation produced
//!   a witness object whose `ext` literal is itself active.
//!
//! [`diagnose`] then replaces every inactive atom with `true` (a negated
//! atom is replaced as a whole, so no contradiction is smuggled in under
//! the negation), producing weaker formulas that the same proof still
//! refutes: the part of the input that carries the contradiction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::fol::{and_of, implies, render, Formula, Problem};
use crate::lia::LinAtom;
use crate::proof::{inputs_match, replay, Id, Proof, Rule, SeoItem, State, Step};

/// Separator smuggled into placeholder object names for binders the proof
/// never instantiated. No parsed symbol can contain it, so an image built
/// from such a placeholder never matches a proof resource.
const UNBOUND: char = '\u{0}';

/// The syntactic species of an atom occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomKind {
    /// `true` or `false`.
    BooleanConstant,
    /// A free boolean variable.
    BooleanVariable,
    /// An `ext` literal of a relational object.
    ExtLiteral,
    /// An arithmetic comparison.
    Comparison,
    /// A negation applied directly to an atom; treated as one atom so
    /// slicing it away yields `true` rather than `(not true)`.
    NegatedAtom,
    /// A quantified subformula; its body is walked separately.
    Quantifier,
}

impl AtomKind {
    pub fn name(self) -> &'static str {
        match self {
            AtomKind::BooleanConstant => "boolean-constant",
            AtomKind::BooleanVariable => "boolean-variable",
            AtomKind::ExtLiteral => "ext-literal",
            AtomKind::Comparison => "comparison",
            AtomKind::NegatedAtom => "negated-atom",
            AtomKind::Quantifier => "quantifier",
        }
    }
}

/// A position in the input: which assertion, and the child-index path
/// from its root to the atom (quantifier bodies count as child 0).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AtomRef {
    pub assertion: usize,
    pub path: Vec<usize>,
    pub kind: AtomKind,
}

/// The verdict for one atom occurrence.
#[derive(Debug, Clone)]
pub struct AtomActivity {
    pub atom: AtomRef,
    /// The atom as written in the input (quantifiers elide their body).
    pub rendered: String,
    pub active: bool,
    /// Why the atom is active: the resource or instantiation witnessing it.
    pub witness: Option<String>,
    /// Fully instantiated images that were checked against the final
    /// state. Empty when no recorded instantiation grounds the atom.
    pub ground_images: Vec<Formula>,
    /// The atom in every degree of instantiation the walk passed
    /// through: as written first, then with each enclosing binder
    /// replaced by its recorded witness in turn. Proof formulas mention
    /// atoms at intermediate degrees, so rewriting a proof needs all of
    /// them, not just the ground images.
    pub forms: Vec<Formula>,
}

/// The result of a diagnosis: the input with inactive atoms rewritten to
/// `true`, plus the per-atom activity map that justifies the rewrite.
#[derive(Debug, Clone)]
pub struct Diagnosis {
    /// One formula per input assertion, same shape as the input but with
    /// every inactive atom replaced by `true` in place.
    pub formulas: Vec<Formula>,
    /// Activity of every atom of every assertion, in assertion-then-path
    /// order.
    pub activity: Vec<AtomActivity>,
}

impl Diagnosis {
    /// All rewritten assertions as one conjunction.
    pub fn formula(&self) -> Formula {
        and_of(self.formulas.clone())
    }

    /// The rewritten assertions with the introduced `true`s absorbed:
    /// `true` conjuncts are dropped and a `true` disjunct collapses its
    /// disjunction. Quantifiers are kept even over a `true` body.
    pub fn simplified(&self) -> Vec<Formula> {
        self.formulas.iter().map(absorb_true).collect()
    }

    /// All simplified assertions as one conjunction.
    pub fn simplified_formula(&self) -> Formula {
        and_of(self.simplified())
    }

    /// Every form of every inactive atom — as written and at each
    /// recorded degree of instantiation. Replacing these with `true`
    /// throughout a proof's formulas (see [`rewrite_with_true`]) turns a
    /// proof of the input into a proof of the diagnosis. Syntactically
    /// identical atoms at different positions share their forms, so an
    /// active twin of an inactive atom would be rewritten with it.
    pub fn inactive_images(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        for entry in &self.activity {
            if entry.active {
                continue;
            }
            for img in &entry.forms {
                if !out.contains(img) {
                    out.push(img.clone());
                }
            }
        }
        out
    }
}

/// Why a diagnosis could not be computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosisError {
    /// The proof's input steps do not reproduce the problem's assertions.
    InputMismatch(String),
    /// The proof does not end in the contradiction rule.
    NotARefutation,
    /// The proof does not replay against the problem.
    Replay { step: usize, reason: String },
}

impl fmt::Display for DiagnosisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosisError::InputMismatch(why) => write!(f, "{why}"),
            DiagnosisError::NotARefutation => {
                write!(f, "proof does not conclude UNSAT")
            }
            DiagnosisError::Replay { step, reason } => {
                write!(f, "step {step}: {reason}")
            }
        }
    }
}

impl std::error::Error for DiagnosisError {}

/// Output styles for [`render_diagnosis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosisFormat {
    /// The rewritten assertions verbatim, one s-expression per line, with
    /// the introduced `true`s kept in place.
    Sexpr,
    /// The simplified assertions, one s-expression per line.
    Text,
    /// The input with active atoms marked `[[…]]` and inactive atoms
    /// struck `~~…~~`, followed by one line per atom with its verdict.
    Annotated,
}

/// Compute the activity map alone (see [`diagnose`] for the contract).
pub fn compute_active_atoms(
    problem: &Problem,
    proof: &Proof,
    theory_budget: u64,
) -> Result<Vec<AtomActivity>, DiagnosisError> {
    run(problem, proof, theory_budget).map(|d| d.activity)
}

/// Diagnose a refutation: decide which atoms of `problem`'s assertions
/// the proof uses and rewrite the inactive ones to `true`.
///
/// The proof must replay against the problem and end in the
/// contradiction rule. Diagnosing a trimmed proof attributes activity
/// only to the steps that actually carry the contradiction; a proof with
/// redundant derivations can mark more atoms active.
pub fn diagnose(
    problem: &Problem,
    proof: &Proof,
    theory_budget: u64,
) -> Result<Diagnosis, DiagnosisError> {
    run(problem, proof, theory_budget)
}

fn run(
    problem: &Problem,
    proof: &Proof,
    theory_budget: u64,
) -> Result<Diagnosis, DiagnosisError> {
    inputs_match(problem, proof).map_err(DiagnosisError::InputMismatch)?;
    match proof.steps.last() {
        Some(step) if step.rule == Rule::Unsat => {}
        _ => return Err(DiagnosisError::NotARefutation),
    }
    let state = replay(&proof.steps, theory_budget);
    if let Some(dead) = &state.dead {
        return Err(DiagnosisError::Replay {
            step: dead.step,
            reason: dead.reason.clone(),
        });
    }
    let engine = Engine::build(&state, &proof.steps);
    let mut formulas = Vec::with_capacity(problem.assertions.len());
    let mut activity = Vec::new();
    for (idx, assertion) in problem.assertions.iter().enumerate() {
        let mut walker = Walker { engine: &engine, entries: BTreeMap::new() };
        walker.visit(assertion, &mut Vec::new(), &[]);
        let entries = walker.entries;
        formulas.push(rebuild(assertion, &mut Vec::new(), &entries, false));
        for (path, e) in entries {
            activity.push(AtomActivity {
                atom: AtomRef { assertion: idx, path, kind: e.kind },
                rendered: e.rendered,
                active: e.active,
                witness: e.witness,
                ground_images: e.images,
                forms: e.forms,
            });
        }
    }
    Ok(Diagnosis { formulas, activity })
}

/// Replace, anywhere inside `f`, each subformula matching one of `images`
/// (modulo arithmetic normalization) with `true`. This is the same
/// rewrite a diagnosis applies to the input, made available for proof
/// formulas so a rewritten proof can be replayed against the diagnosis.
pub fn rewrite_with_true(f: &Formula, images: &[Formula]) -> Formula {
    if images.iter().any(|img| same_formula(f, img)) {
        return Formula::True;
    }
    match f {
        Formula::Not(g) => Formula::Not(Box::new(rewrite_with_true(g, images))),
        Formula::And(fs) => {
            Formula::And(fs.iter().map(|g| rewrite_with_true(g, images)).collect())
        }
        Formula::Or(fs) => {
            Formula::Or(fs.iter().map(|g| rewrite_with_true(g, images)).collect())
        }
        Formula::Exists(b, body) => {
            Formula::Exists(b.clone(), Box::new(rewrite_with_true(body, images)))
        }
        Formula::Forall(b, body) => {
            Formula::Forall(b.clone(), Box::new(rewrite_with_true(body, images)))
        }
        _ => f.clone(),
    }
}

/// Render a diagnosis in one of the supported output styles. The result
/// ends with a newline and is deterministic for a given diagnosis.
pub fn render_diagnosis(d: &Diagnosis, format: DiagnosisFormat) -> String {
    match format {
        DiagnosisFormat::Sexpr => {
            let mut out = String::new();
            for f in &d.formulas {
                out.push_str(&render(f));
                out.push('\n');
            }
            out
        }
        DiagnosisFormat::Text => {
            let mut out = String::new();
            for f in &d.simplified() {
                out.push_str(&render(f));
                out.push('\n');
            }
            out
        }
        DiagnosisFormat::Annotated => render_annotated(d),
    }
}

// ---------------------------------------------------------------------
// Activity engine
// ---------------------------------------------------------------------

/// One instantiation the proof performed: `target` is the quantified
/// formula that was instantiated, `object` the witness it used.
struct Event {
    target: Formula,
    object: String,
}

/// The final-state resources and instantiation history a walk consults.
struct Engine<'a> {
    lemmas: Vec<(Id, &'a Formula)>,
    facts: Vec<(Id, &'a Formula)>,
    events: Vec<Event>,
}

impl<'a> Engine<'a> {
    fn build(state: &'a State, steps: &[Step]) -> Engine<'a> {
        let lemmas = state.lemmas.iter().map(|(i, f)| (*i, f)).collect();
        let facts = state.facts.iter().map(|(i, f)| (*i, f)).collect();
        Engine { lemmas, facts, events: collect_events(steps) }
    }

    /// Activity of a ground formula image: exact match against a lemma,
    /// or occurrence anywhere inside a fact.
    fn base_activity(&self, image: &Formula) -> (bool, Option<String>) {
        for (id, lemma) in &self.lemmas {
            if same_formula(lemma, image) {
                return (true, Some(format!("matches lemma r{id}")));
            }
        }
        for (id, fact) in &self.facts {
            if contains(fact, image) {
                return (true, Some(format!("occurs in fact f{id}")));
            }
        }
        (false, None)
    }

    /// Whether `ext` of the given object is active, and through what.
    fn ext_active(&self, object: &str) -> Option<String> {
        let (active, witness) = self.base_activity(&Formula::Ext(object.to_string()));
        if active {
            witness
        } else {
            None
        }
    }
}

/// Extract every instantiation the proof performed, resolving dependency
/// ids against the resources added by earlier steps. The proof has
/// already replayed, so each extraction mirrors a precondition that is
/// known to have held.
fn collect_events(steps: &[Step]) -> Vec<Event> {
    let mut lemmas: BTreeMap<Id, &Formula> = BTreeMap::new();
    let mut seos: BTreeMap<Id, &SeoItem> = BTreeMap::new();
    let mut seen: BTreeSet<(Formula, String)> = BTreeSet::new();
    let mut events = Vec::new();
    let push = |seen: &mut BTreeSet<(Formula, String)>,
                events: &mut Vec<Event>,
                target: &Formula,
                object: &str| {
        if seen.insert((target.clone(), object.to_string())) {
            events.push(Event { target: target.clone(), object: object.to_string() });
        }
    };
    for step in steps {
        match step.rule {
            Rule::ExistentialInstStar => {
                if let (Some(target), Some(object)) =
                    (step.deps.r.first().and_then(|i| lemmas.get(i)), added_object(step))
                {
                    push(&mut seen, &mut events, target, object);
                }
            }
            Rule::ExistentialInst => {
                if let (Some(target), Some(object)) =
                    (anchor_def(step, &seos), added_object(step))
                {
                    push(&mut seen, &mut events, target, object);
                }
            }
            Rule::UniversalInstStar => {
                let target = step.deps.r.first().and_then(|i| lemmas.get(i).copied());
                if let (Some(target @ Formula::Forall(b, body)), Some((_, added))) =
                    (target, step.add_r.first())
                {
                    for object in dep_objects(step, &seos) {
                        let inst = body.subst_obj(&b.var, object);
                        if *added == implies(Formula::Ext(object.to_string()), inst) {
                            push(&mut seen, &mut events, target, object);
                        }
                    }
                }
            }
            Rule::UniversalInst => {
                if let (Some(target), Some((_, added))) =
                    (anchor_def_with_lit(step, &seos), step.add_r.first())
                {
                    let (lit, formula) = target;
                    if let Formula::Forall(b, body) = formula {
                        for object in dep_objects(step, &seos) {
                            let inst = body.subst_obj(&b.var, object);
                            let expected = implies(
                                Formula::BoolVar(lit.to_string()),
                                implies(Formula::Ext(object.to_string()), inst),
                            );
                            if *added == expected {
                                push(&mut seen, &mut events, formula, object);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        for (id, f) in &step.add_r {
            lemmas.insert(*id, f);
        }
        for (id, item) in &step.add_d {
            seos.insert(*id, item);
        }
    }
    events
}

/// The object a step's additions introduce, if any.
fn added_object(step: &Step) -> Option<&str> {
    step.add_d.iter().find_map(|(_, item)| match item {
        SeoItem::Obj { name, .. } => Some(name.as_str()),
        SeoItem::Def { .. } => None,
    })
}

/// The formula bound by the first definition among a step's `D` deps.
fn anchor_def<'a>(step: &Step, seos: &BTreeMap<Id, &'a SeoItem>) -> Option<&'a Formula> {
    anchor_def_with_lit(step, seos).map(|(_, f)| f)
}

fn anchor_def_with_lit<'a>(
    step: &Step,
    seos: &BTreeMap<Id, &'a SeoItem>,
) -> Option<(&'a str, &'a Formula)> {
    step.deps.d.iter().find_map(|i| match seos.get(i) {
        Some(SeoItem::Def { lit, formula }) => Some((lit.as_str(), formula)),
        _ => None,
    })
}

/// The objects referenced by a step's `D` deps.
fn dep_objects<'a>(step: &Step, seos: &BTreeMap<Id, &'a SeoItem>) -> Vec<&'a str> {
    step.deps
        .d
        .iter()
        .filter_map(|i| match seos.get(i) {
            Some(SeoItem::Obj { name, .. }) => Some(name.as_str()),
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------
// The walk
// ---------------------------------------------------------------------

/// Accumulated verdict for one atom position. A position can be visited
/// once per recorded instantiation of its enclosing quantifiers; the atom
/// is active if any visit finds an active image.
struct Entry {
    kind: AtomKind,
    rendered: String,
    active: bool,
    witness: Option<String>,
    images: Vec<Formula>,
    forms: Vec<Formula>,
}

struct Walker<'e> {
    engine: &'e Engine<'e>,
    entries: BTreeMap<Vec<usize>, Entry>,
}

impl Walker<'_> {
    /// `sigma` maps each enclosing binder to its witness, outermost
    /// first; binders the proof never instantiated map to a placeholder.
    fn visit(&mut self, f: &Formula, path: &mut Vec<usize>, sigma: &[(String, String)]) {
        match f {
            Formula::True | Formula::False => {
                self.leaf(f, path, sigma, AtomKind::BooleanConstant);
            }
            Formula::BoolVar(_) => self.leaf(f, path, sigma, AtomKind::BooleanVariable),
            Formula::Ext(_) => self.leaf(f, path, sigma, AtomKind::ExtLiteral),
            Formula::Cmp(..) => self.leaf(f, path, sigma, AtomKind::Comparison),
            Formula::Not(inner) if is_atom_shape(inner) => {
                self.leaf(f, path, sigma, AtomKind::NegatedAtom);
            }
            Formula::Not(inner) => {
                path.push(0);
                self.visit(inner, path, sigma);
                path.pop();
            }
            Formula::And(fs) | Formula::Or(fs) => {
                for (i, child) in fs.iter().enumerate() {
                    path.push(i);
                    self.visit(child, path, sigma);
                    path.pop();
                }
            }
            Formula::Exists(b, body) | Formula::Forall(b, body) => {
                let forms = instantiation_forms(f, sigma);
                let image = apply_sigma(f, sigma);
                let witnesses: Vec<&Event> = self
                    .engine
                    .events
                    .iter()
                    .filter(|e| same_formula(&e.target, &image))
                    .collect();
                let mut active = false;
                let mut witness = None;
                for event in &witnesses {
                    if let Some(via) = self.engine.ext_active(&event.object) {
                        active = true;
                        witness = Some(format!(
                            "instantiated with object `{}`, whose ext {}",
                            event.object, via
                        ));
                        break;
                    }
                }
                let head = if matches!(f, Formula::Exists(..)) { "exists" } else { "forall" };
                let rendered = format!("({head} (({} {})) ...)", b.var, b.class);
                let images = if is_ground_image(&image) { vec![image] } else { vec![] };
                self.record(path, AtomKind::Quantifier, rendered, active, witness, images, forms);
                path.push(0);
                if witnesses.is_empty() {
                    // Keep walking so every atom gets a verdict, but bind
                    // the variable to an unmatchable placeholder: with no
                    // recorded instantiation there is no admissible image.
                    let mut inner = sigma.to_vec();
                    inner.push((b.var.clone(), format!("{}{}", b.var, UNBOUND)));
                    self.visit(body, path, &inner);
                } else {
                    let mut seen = BTreeSet::new();
                    for event in witnesses {
                        if seen.insert(event.object.clone()) {
                            let mut inner = sigma.to_vec();
                            inner.push((b.var.clone(), event.object.clone()));
                            self.visit(body, path, &inner);
                        }
                    }
                }
                path.pop();
            }
        }
    }

    fn leaf(
        &mut self,
        f: &Formula,
        path: &mut Vec<usize>,
        sigma: &[(String, String)],
        kind: AtomKind,
    ) {
        let forms = instantiation_forms(f, sigma);
        let image = apply_sigma(f, sigma);
        let (active, witness, images) = if is_ground_image(&image) {
            let (active, witness) = self.engine.base_activity(&image);
            (active, witness, vec![image])
        } else {
            (false, None, vec![])
        };
        self.record(path, kind, render(f), active, witness, images, forms);
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        path: &[usize],
        kind: AtomKind,
        rendered: String,
        active: bool,
        witness: Option<String>,
        images: Vec<Formula>,
        forms: Vec<Formula>,
    ) {
        let entry = self.entries.entry(path.to_vec()).or_insert(Entry {
            kind,
            rendered,
            active: false,
            witness: None,
            images: Vec::new(),
            forms: Vec::new(),
        });
        if active && !entry.active {
            entry.active = true;
            entry.witness = witness;
        }
        for img in images {
            if !entry.images.contains(&img) {
                entry.images.push(img);
            }
        }
        for form in forms {
            if !entry.forms.contains(&form) {
                entry.forms.push(form);
            }
        }
    }
}

/// The subformula at each degree of instantiation: as written, then with
/// each binder of `sigma` substituted in turn. Forms containing the
/// placeholder for an uninstantiated binder are dropped, as are
/// substitutions that change nothing.
fn instantiation_forms(f: &Formula, sigma: &[(String, String)]) -> Vec<Formula> {
    let mut forms = vec![f.clone()];
    for (var, object) in sigma {
        let next = forms.last().unwrap().subst_obj(var, object);
        if next != *forms.last().unwrap() {
            forms.push(next);
        }
    }
    forms.retain(is_ground_image);
    forms
}

/// Apply every binding of `sigma` to a whole subformula, placeholders
/// included — the image condition (2) admits, or fails to.
fn apply_sigma(f: &Formula, sigma: &[(String, String)]) -> Formula {
    sigma.iter().fold(f.clone(), |acc, (var, object)| acc.subst_obj(var, object))
}

/// Whether an image is free of placeholder names for uninstantiated
/// binders (declared objects and remaining bound variables are fine —
/// only the placeholder marks a reference that nothing can witness).
fn is_ground_image(f: &Formula) -> bool {
    !f.free_objects().iter().any(|o| o.contains(UNBOUND))
}

fn is_atom_shape(f: &Formula) -> bool {
    matches!(
        f,
        Formula::True | Formula::False | Formula::BoolVar(_) | Formula::Ext(_) | Formula::Cmp(..)
    )
}

// ---------------------------------------------------------------------
// Matching modulo arithmetic normalization
// ---------------------------------------------------------------------

/// Structural equality with comparisons compared by canonical linear
/// form, so `(> (+ x 1) 1)` matches `(> x 0)`. Binders must agree on
/// variable and class; connective arity and order are significant.
fn same_formula(a: &Formula, b: &Formula) -> bool {
    match (a, b) {
        (Formula::Cmp(op1, l1, r1), Formula::Cmp(op2, l2, r2)) => {
            LinAtom::from_cmp(*op1, l1, r1) == LinAtom::from_cmp(*op2, l2, r2)
        }
        (Formula::Not(x), Formula::Not(y)) => same_formula(x, y),
        (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| same_formula(x, y))
        }
        (Formula::Exists(b1, x), Formula::Exists(b2, y))
        | (Formula::Forall(b1, x), Formula::Forall(b2, y)) => b1 == b2 && same_formula(x, y),
        _ => a == b,
    }
}

/// Whether `needle` occurs in `hay` as a subformula, modulo the same
/// normalization as [`same_formula`].
fn contains(hay: &Formula, needle: &Formula) -> bool {
    if same_formula(hay, needle) {
        return true;
    }
    match hay {
        Formula::Not(g) => contains(g, needle),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|g| contains(g, needle)),
        Formula::Exists(_, body) | Formula::Forall(_, body) => contains(body, needle),
        _ => false,
    }
}

// ---------------------------------------------------------------------
// Rebuilding the diagnosed formulas
// ---------------------------------------------------------------------

/// Rewrite inactive atoms to `true`, in place. Only positions under an
/// even number of negations are rewritten — there, dropping an atom can
/// only weaken the formula. A compound negation whose atoms are all
/// inactive is dropped as a whole for the same reason.
fn rebuild(
    f: &Formula,
    path: &mut Vec<usize>,
    entries: &BTreeMap<Vec<usize>, Entry>,
    negated: bool,
) -> Formula {
    if let Some(entry) = entries.get(path.as_slice()) {
        if entry.kind == AtomKind::Quantifier {
            if !entry.active {
                return if negated { f.clone() } else { Formula::True };
            }
            let rebuilt = |body: &Formula, path: &mut Vec<usize>| {
                path.push(0);
                let out = rebuild(body, path, entries, negated);
                path.pop();
                out
            };
            return match f {
                Formula::Exists(b, body) => {
                    Formula::Exists(b.clone(), Box::new(rebuilt(body, path)))
                }
                Formula::Forall(b, body) => {
                    Formula::Forall(b.clone(), Box::new(rebuilt(body, path)))
                }
                _ => unreachable!("quantifier entry at a non-quantifier node"),
            };
        }
        if entry.active || negated {
            return f.clone();
        }
        return Formula::True;
    }
    match f {
        Formula::Not(inner) => {
            if !negated && subtree_inactive(path, entries) {
                return Formula::True;
            }
            path.push(0);
            let out = rebuild(inner, path, entries, !negated);
            path.pop();
            Formula::Not(Box::new(out))
        }
        Formula::And(fs) | Formula::Or(fs) => {
            let mut children = Vec::with_capacity(fs.len());
            for (i, child) in fs.iter().enumerate() {
                path.push(i);
                children.push(rebuild(child, path, entries, negated));
                path.pop();
            }
            match f {
                Formula::And(_) => Formula::And(children),
                _ => Formula::Or(children),
            }
        }
        _ => f.clone(),
    }
}

/// Whether every atom at or below `prefix` is inactive.
fn subtree_inactive(prefix: &[usize], entries: &BTreeMap<Vec<usize>, Entry>) -> bool {
    entries
        .iter()
        .filter(|(path, _)| path.len() >= prefix.len() && path[..prefix.len()] == *prefix)
        .all(|(_, e)| !e.active)
}

/// Drop `true` conjuncts, collapse disjunctions containing `true`, and
/// keep everything else — including quantifiers over a `true` body, so
/// the formula's binding structure stays visible.
fn absorb_true(f: &Formula) -> Formula {
    match f {
        Formula::And(fs) => {
            and_of(fs.iter().map(absorb_true).filter(|g| *g != Formula::True).collect())
        }
        Formula::Or(fs) => {
            let children: Vec<Formula> = fs.iter().map(absorb_true).collect();
            if children.contains(&Formula::True) {
                Formula::True
            } else {
                Formula::Or(children)
            }
        }
        Formula::Not(g) => Formula::Not(Box::new(absorb_true(g))),
        Formula::Exists(b, body) => Formula::Exists(b.clone(), Box::new(absorb_true(body))),
        Formula::Forall(b, body) => Formula::Forall(b.clone(), Box::new(absorb_true(body))),
        _ => f.clone(),
    }
}

// ---------------------------------------------------------------------
// Annotated rendering
// ---------------------------------------------------------------------

fn render_annotated(d: &Diagnosis) -> String {
    let mut by_assertion: BTreeMap<usize, BTreeMap<Vec<usize>, &AtomActivity>> = BTreeMap::new();
    for entry in &d.activity {
        by_assertion
            .entry(entry.atom.assertion)
            .or_default()
            .insert(entry.atom.path.clone(), entry);
    }
    let mut out = String::new();
    for (assertion, entries) in &by_assertion {
        out.push_str(&format!("assertion {assertion}: "));
        // The diagnosis keeps the input shape, so annotating the
        // rewritten formula at inactive positions shows the original
        // atom (its entry) rather than the `true` that replaced it.
        annotate(&d.formulas[*assertion], &mut Vec::new(), entries, &mut out);
        out.push('\n');
        for (path, entry) in entries {
            let verdict = if entry.active {
                format!("active — {}", entry.witness.as_deref().unwrap_or("active"))
            } else {
                "inactive — replaced by true".to_string()
            };
            let dotted = if path.is_empty() {
                "root".to_string()
            } else {
                path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
            };
            out.push_str(&format!(
                "  [{dotted}] {} {} — {verdict}\n",
                entry.atom.kind.name(),
                entry.rendered,
            ));
        }
    }
    out
}

fn annotate(
    f: &Formula,
    path: &mut Vec<usize>,
    entries: &BTreeMap<Vec<usize>, &AtomActivity>,
    out: &mut String,
) {
    if let Some(entry) = entries.get(path.as_slice()) {
        let (open, close) = if entry.active { ("[[", "]]") } else { ("~~", "~~") };
        if entry.atom.kind == AtomKind::Quantifier {
            if let Formula::Exists(b, body) | Formula::Forall(b, body) = f {
                let head = if matches!(f, Formula::Exists(..)) { "exists" } else { "forall" };
                out.push_str(open);
                out.push_str(&format!("({head} (({} {})) ", b.var, b.class));
                path.push(0);
                annotate(body, path, entries, out);
                path.pop();
                out.push(')');
                out.push_str(close);
                return;
            }
        }
        // Inactive atoms were rewritten to `true`; show the original.
        let shown =
            if entry.active { render(f) } else { entry.rendered.clone() };
        out.push_str(open);
        out.push_str(&shown);
        out.push_str(close);
        return;
    }
    match f {
        Formula::Not(g) => {
            out.push_str("(not ");
            path.push(0);
            annotate(g, path, entries, out);
            path.pop();
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for (i, child) in fs.iter().enumerate() {
                out.push(' ');
                path.push(i);
                annotate(child, path, entries, out);
                path.pop();
            }
            out.push(')');
        }
        _ => out.push_str(&render(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{parse_problem, parse_raw_formula};
    use crate::lia::DEFAULT_THEORY_BUDGET;
    use crate::proof::Deps;

    fn raw(src: &str) -> Formula {
        parse_raw_formula(src).unwrap()
    }

    fn input_step(problem: &Problem) -> Step {
        let formulas = problem.assertions.len();
        Step {
            id: 0,
            rule: Rule::Input,
            deps: Deps::default(),
            add_r: problem.assertions.iter().cloned().enumerate().collect(),
            add_f: vec![],
            add_d: problem
                .signature
                .objects
                .iter()
                .enumerate()
                .map(|(k, (name, class))| {
                    (formulas + k, SeoItem::Obj { name: name.clone(), class: class.clone() })
                })
                .collect(),
        }
    }

    /// `a.t > 0 ∧ ¬(a.t > 0)` refuted without touching the second
    /// conjunct `a.t = 5`, which is the only inactive atom.
    fn conjunct_problem_and_proof() -> (Problem, Proof) {
        let problem = parse_problem(
            "(class A (t Int)) (object a A) \
             (assert (and (> (attr a t) 0) (= (attr a t) 5))) \
             (assert (not (> (attr a t) 0)))",
        )
        .unwrap();
        let positive = raw("(> (attr a t) 0)");
        let steps = vec![
            input_step(&problem),
            Step {
                id: 1,
                rule: Rule::RewriteAnd,
                deps: Deps { r: vec![0], f: vec![], d: vec![] },
                add_r: vec![(4, positive.clone())],
                add_f: vec![],
                add_d: vec![],
            },
            Step {
                id: 2,
                rule: Rule::FolToT,
                deps: Deps { r: vec![4, 1], f: vec![], d: vec![] },
                add_r: vec![],
                add_f: vec![(5, positive), (6, raw("(not (> (attr a t) 0))"))],
                add_d: vec![],
            },
            Step {
                id: 3,
                rule: Rule::TDerive,
                deps: Deps { r: vec![], f: vec![5, 6], d: vec![] },
                add_r: vec![],
                add_f: vec![(7, Formula::False)],
                add_d: vec![],
            },
            Step {
                id: 4,
                rule: Rule::Unsat,
                deps: Deps { r: vec![], f: vec![7], d: vec![] },
                add_r: vec![],
                add_f: vec![],
                add_d: vec![],
            },
        ];
        (problem, Proof { steps })
    }

    #[test]
    fn unused_conjunct_is_sliced_to_true() {
        let (problem, proof) = conjunct_problem_and_proof();
        let d = diagnose(&problem, &proof, DEFAULT_THEORY_BUDGET).unwrap();
        assert_eq!(d.formulas[0], raw("(and (> (attr a t) 0) true)"));
        assert_eq!(d.formulas[1], raw("(not (> (attr a t) 0))"));
        assert_eq!(d.simplified()[0], raw("(> (attr a t) 0)"));
        let unused = d
            .activity
            .iter()
            .find(|e| e.atom.assertion == 0 && e.atom.path == vec![1])
            .unwrap();
        assert!(!unused.active);
        assert_eq!(unused.atom.kind, AtomKind::Comparison);
        assert_eq!(d.inactive_images(), vec![raw("(= (attr a t) 5)")]);
        let negated = d
            .activity
            .iter()
            .find(|e| e.atom.assertion == 1 && e.atom.path.is_empty())
            .unwrap();
        assert!(negated.active);
        assert_eq!(negated.atom.kind, AtomKind::NegatedAtom);
        // The declared object's existence assertion is an input lemma.
        let ext = d
            .activity
            .iter()
            .find(|e| e.atom.assertion == 2 && e.atom.path.is_empty())
            .unwrap();
        assert!(ext.active);
        assert_eq!(ext.atom.kind, AtomKind::ExtLiteral);
    }

    /// A quantified assertion the refutation never instantiates is
    /// inactive as a whole — including the atoms under the binder, which
    /// no recorded witness can ground.
    #[test]
    fn uninstantiated_quantifier_is_sliced_whole() {
        let problem = parse_problem(
            "(class A (t Int)) (object a A) \
             (assert (exists ((x A)) (> (attr x t) 0))) \
             (assert (> (attr a t) 0)) \
             (assert (not (> (attr a t) 0)))",
        )
        .unwrap();
        let steps = vec![
            input_step(&problem),
            Step {
                id: 1,
                rule: Rule::FolToT,
                deps: Deps { r: vec![1, 2], f: vec![], d: vec![] },
                add_r: vec![],
                add_f: vec![(5, raw("(> (attr a t) 0)")), (6, raw("(not (> (attr a t) 0))"))],
                add_d: vec![],
            },
            Step {
                id: 2,
                rule: Rule::TDerive,
                deps: Deps { r: vec![], f: vec![5, 6], d: vec![] },
                add_r: vec![],
                add_f: vec![(7, Formula::False)],
                add_d: vec![],
            },
            Step {
                id: 3,
                rule: Rule::Unsat,
                deps: Deps { r: vec![], f: vec![7], d: vec![] },
                add_r: vec![],
                add_f: vec![],
                add_d: vec![],
            },
        ];
        let proof = Proof { steps };
        let d = diagnose(&problem, &proof, DEFAULT_THEORY_BUDGET).unwrap();
        assert_eq!(d.formulas[0], Formula::True);
        assert_eq!(d.formulas[1], raw("(> (attr a t) 0)"));
        let quantifier = d
            .activity
            .iter()
            .find(|e| e.atom.assertion == 0 && e.atom.path.is_empty())
            .unwrap();
        assert!(!quantifier.active);
        assert_eq!(quantifier.atom.kind, AtomKind::Quantifier);
        let body = d
            .activity
            .iter()
            .find(|e| e.atom.assertion == 0 && e.atom.path == vec![0])
            .unwrap();
        assert!(!body.active);
        assert!(body.ground_images.is_empty());
    }

    #[test]
    fn comparisons_match_modulo_linear_normalization() {
        assert!(same_formula(&raw("(> (+ x 1) 1)"), &raw("(> x 0)")));
        assert!(same_formula(&raw("(= x y)"), &raw("(= y x)")));
        assert!(!same_formula(&raw("(> x 0)"), &raw("(> 0 x)")));
        assert!(contains(&raw("(and (or (> (+ x 1) 1) q) r)"), &raw("(> x 0)")));
        assert!(!contains(&raw("(and p q)"), &raw("r")));
    }

    #[test]
    fn rejects_proofs_that_do_not_refute() {
        let problem =
            parse_problem("(class A (t Int)) (object a A) (assert (> (attr a t) 0))").unwrap();
        let proof = Proof { steps: vec![input_step(&problem)] };
        assert!(matches!(
            diagnose(&problem, &proof, DEFAULT_THEORY_BUDGET),
            Err(DiagnosisError::NotARefutation)
        ));
    }

    #[test]
    fn renders_cover_all_three_formats() {
        let (problem, proof) = conjunct_problem_and_proof();
        let d = diagnose(&problem, &proof, DEFAULT_THEORY_BUDGET).unwrap();
        assert_eq!(
            render_diagnosis(&d, DiagnosisFormat::Sexpr),
            "(and (> (attr a t) 0) true)\n(not (> (attr a t) 0))\n(ext a)\n"
        );
        assert_eq!(
            render_diagnosis(&d, DiagnosisFormat::Text),
            "(> (attr a t) 0)\n(not (> (attr a t) 0))\n(ext a)\n"
        );
        let annotated = render_diagnosis(&d, DiagnosisFormat::Annotated);
        assert!(annotated.contains("(and [[(> (attr a t) 0)]] ~~(= (attr a t) 5)~~)"));
        assert!(annotated.contains("[[(not (> (attr a t) 0))]]"));
        assert!(annotated.contains("inactive — replaced by true"));
    }
}
