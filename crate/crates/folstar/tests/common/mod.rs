//! Shared fixtures for the corpus suites: seeded random generators for
//! problems and quantifier-free theory queries, a proof padder that
//! splices removable junk into valid refutations, hand-built refutations
//! that put every derivation rule on the path to the contradiction, and
//! the targeted corruptions the rejection suite feeds both checkers.

// Each suite pulls in its own slice of this module.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use folstar::checker::{backward_check, CheckReport};
use folstar::fol::{
    and_of, complement, evaluate, implies, or_of, parse_problem, Binder, CmpOp, Formula, Problem,
    Signature, Solution, Term, Valuation,
};
use folstar::lia::DEFAULT_THEORY_BUDGET;
use folstar::proof::{
    apply_step, define_lemmas, renumber, replay, substitute, Deps, Id, Proof, Rule, SeoItem,
    State, Step,
};
use folstar::prover::{forward_check, Applied, CheckMode, ProofBuilder};

/// A deterministic generator for `seed`.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The bundled matching example, parsed.
pub fn matching_problem() -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples/matching.fol");
    parse_problem(&fs::read_to_string(path).expect("example file is readable"))
        .expect("example file parses")
}

// ---------------------------------------------------------------------------
// Random problems

/// Quantifier budget per generated problem.
pub const MAX_QUANTIFIERS: usize = 3;

/// A random FOL* problem small enough for the brute-force oracle: one to
/// three single-attribute classes, at most one declared object, one to
/// three assertions with at most [`MAX_QUANTIFIERS`] quantifiers between
/// them, coefficients in [-5, 5] and constants in [-8, 8]. Roughly two in
/// five problems embed a known contradiction so the corpus exercises both
/// prover outcomes; the rest draw their assertions blind.
pub fn random_problem(r: &mut ChaCha8Rng) -> Problem {
    const CLASS_NAMES: [&str; 3] = ["A", "B", "C"];
    let n_classes = r.random_range(1..=3usize);
    let mut classes = BTreeMap::new();
    for name in &CLASS_NAMES[..n_classes] {
        classes.insert((*name).to_string(), vec!["v".to_string()]);
    }
    let mut objects: Vec<(String, String)> = Vec::new();
    if r.random_bool(0.45) {
        let class = CLASS_NAMES[r.random_range(0..n_classes)];
        objects.push(("a0".to_string(), class.to_string()));
    }
    let signature = Signature {
        classes,
        objects: objects.clone(),
    };

    let mut gen = FormulaGen {
        quantifiers_left: MAX_QUANTIFIERS,
        var_counter: 0,
    };
    let mut assertions: Vec<Formula> = Vec::new();
    if r.random_bool(0.4) {
        assertions.extend(contradiction(r, &signature, &mut gen));
    }
    let blind = if assertions.is_empty() {
        r.random_range(1..=2usize)
    } else {
        r.random_range(0..=1usize)
    };
    for _ in 0..blind {
        let depth = r.random_range(1..=2usize);
        assertions.push(gen.formula(r, &signature, &mut Vec::new(), depth));
    }
    // Mirror the input grammar: every declared object is asserted to exist.
    for (name, _) in &objects {
        assertions.push(Formula::Ext(name.clone()));
    }
    Problem {
        signature,
        assertions,
    }
}

struct FormulaGen {
    quantifiers_left: usize,
    var_counter: usize,
}

impl FormulaGen {
    fn class(&self, r: &mut ChaCha8Rng, sig: &Signature) -> String {
        let names: Vec<&String> = sig.classes.keys().collect();
        names[r.random_range(0..names.len())].clone()
    }

    /// Names usable in attribute accesses: bound variables, then declared
    /// objects.
    fn refs(&self, sig: &Signature, scope: &[(String, String)]) -> Vec<String> {
        scope
            .iter()
            .map(|(v, _)| v.clone())
            .chain(sig.objects.iter().map(|(o, _)| o.clone()))
            .collect()
    }

    fn linear_term(&self, r: &mut ChaCha8Rng, refs: &[String]) -> Term {
        if refs.is_empty() {
            return Term::Int(r.random_range(-8..=8));
        }
        let mut parts: Vec<Term> = Vec::new();
        for _ in 0..r.random_range(1..=2usize) {
            let name = refs[r.random_range(0..refs.len())].clone();
            let attr = Term::Attr(name, "v".to_string());
            let coeff = nonzero(r, 5);
            parts.push(if coeff == 1 {
                attr
            } else {
                Term::Mul(coeff, Box::new(attr))
            });
        }
        if r.random_bool(0.5) {
            parts.push(Term::Int(r.random_range(-8..=8)));
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Term::Add(parts)
        }
    }

    fn atom(&self, r: &mut ChaCha8Rng, sig: &Signature, scope: &[(String, String)]) -> Formula {
        let refs = self.refs(sig, scope);
        if !refs.is_empty() && r.random_bool(0.12) {
            return Formula::Ext(refs[r.random_range(0..refs.len())].clone());
        }
        let op = if r.random_bool(0.3) { CmpOp::Eq } else { CmpOp::Gt };
        let lhs = self.linear_term(r, &refs);
        let rhs = if r.random_bool(0.75) {
            Term::Int(r.random_range(-8..=8))
        } else {
            self.linear_term(r, &refs)
        };
        Formula::Cmp(op, lhs, rhs)
    }

    fn formula(
        &mut self,
        r: &mut ChaCha8Rng,
        sig: &Signature,
        scope: &mut Vec<(String, String)>,
        depth: usize,
    ) -> Formula {
        let roll = r.random_range(0..100u32);
        if depth == 0 || roll < 35 {
            return self.atom(r, sig, scope);
        }
        if self.quantifiers_left > 0 && roll < 65 {
            self.quantifiers_left -= 1;
            self.var_counter += 1;
            let var = format!("q{}", self.var_counter);
            let class = self.class(r, sig);
            scope.push((var.clone(), class.clone()));
            let body = self.formula(r, sig, scope, depth - 1);
            scope.pop();
            let binder = Binder { var, class };
            return if r.random_bool(0.5) {
                Formula::Exists(binder, Box::new(body))
            } else {
                Formula::Forall(binder, Box::new(body))
            };
        }
        match roll % 3 {
            0 => Formula::Not(Box::new(self.formula(r, sig, scope, depth - 1))),
            1 => and_of(vec![
                self.formula(r, sig, scope, depth - 1),
                self.formula(r, sig, scope, depth - 1),
            ]),
            _ => or_of(vec![
                self.formula(r, sig, scope, depth - 1),
                self.formula(r, sig, scope, depth - 1),
            ]),
        }
    }
}

fn nonzero(r: &mut ChaCha8Rng, bound: i64) -> i64 {
    loop {
        let c = r.random_range(-bound..=bound);
        if c != 0 {
            return c;
        }
    }
}

/// A small family of guaranteed-unsatisfiable assertion groups.
fn contradiction(r: &mut ChaCha8Rng, sig: &Signature, gen: &mut FormulaGen) -> Vec<Formula> {
    let class = gen.class(r, sig);
    let c = r.random_range(-5..=5i64);
    let attr = |name: &str| Term::Attr(name.to_string(), "v".to_string());
    match r.random_range(0..3u32) {
        // A ground atom and its negation on a declared object.
        0 if !sig.objects.is_empty() => {
            let (name, _) = &sig.objects[0];
            let a = Formula::Cmp(CmpOp::Gt, attr(name), Term::Int(c));
            vec![a.clone(), Formula::Not(Box::new(a))]
        }
        // An impossible band inside one witness: v > c and c + 1 > v.
        1 => {
            gen.quantifiers_left = gen.quantifiers_left.saturating_sub(1);
            gen.var_counter += 1;
            let var = format!("q{}", gen.var_counter);
            let body = and_of(vec![
                Formula::Cmp(CmpOp::Gt, attr(&var), Term::Int(c)),
                Formula::Cmp(CmpOp::Gt, Term::Int(c + 1), attr(&var)),
            ]);
            vec![Formula::Exists(Binder { var, class }, Box::new(body))]
        }
        // All objects above the bar, one witness at or below it.
        _ => {
            gen.quantifiers_left = gen.quantifiers_left.saturating_sub(2);
            gen.var_counter += 2;
            let v1 = format!("q{}", gen.var_counter - 1);
            let v2 = format!("q{}", gen.var_counter);
            vec![
                Formula::Forall(
                    Binder {
                        var: v1.clone(),
                        class: class.clone(),
                    },
                    Box::new(Formula::Cmp(CmpOp::Gt, attr(&v1), Term::Int(c))),
                ),
                Formula::Exists(
                    Binder {
                        var: v2.clone(),
                        class,
                    },
                    Box::new(Formula::Not(Box::new(Formula::Cmp(
                        CmpOp::Gt,
                        attr(&v2),
                        Term::Int(c),
                    )))),
                ),
            ]
        }
    }
}

// ---------------------------------------------------------------------------
// Random theory queries

/// One random quantifier-free query and the unknowns it may mention.
pub struct TheoryCase {
    pub conjuncts: Vec<Formula>,
    pub int_vars: Vec<String>,
    pub bool_vars: Vec<String>,
}

/// A random quantifier-free conjunction over at most four integer
/// unknowns and two boolean unknowns: coefficients in [-5, 5], constants
/// in [-10, 10], connective depth at most three per conjunct.
pub fn random_theory_case(r: &mut ChaCha8Rng) -> TheoryCase {
    let int_vars: Vec<String> = (0..r.random_range(1..=4usize))
        .map(|i| format!("x{i}"))
        .collect();
    let bool_vars: Vec<String> = (0..r.random_range(0..=2usize))
        .map(|i| format!("b{i}"))
        .collect();
    let conjuncts = (0..r.random_range(1..=4usize))
        .map(|_| {
            let depth = r.random_range(0..=3usize);
            qf_formula(r, &int_vars, &bool_vars, depth)
        })
        .collect();
    TheoryCase {
        conjuncts,
        int_vars,
        bool_vars,
    }
}

fn qf_atom(r: &mut ChaCha8Rng, ints: &[String], bools: &[String]) -> Formula {
    if !bools.is_empty() && r.random_bool(0.18) {
        return Formula::BoolVar(bools[r.random_range(0..bools.len())].clone());
    }
    let mut parts: Vec<Term> = Vec::new();
    for _ in 0..r.random_range(1..=2.min(ints.len())) {
        let v = Term::Var(ints[r.random_range(0..ints.len())].clone());
        let c = nonzero(r, 5);
        parts.push(if c == 1 { v } else { Term::Mul(c, Box::new(v)) });
    }
    let lhs = if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Term::Add(parts)
    };
    let op = if r.random_bool(0.35) { CmpOp::Eq } else { CmpOp::Gt };
    Formula::Cmp(op, lhs, Term::Int(r.random_range(-10..=10)))
}

fn qf_formula(r: &mut ChaCha8Rng, ints: &[String], bools: &[String], depth: usize) -> Formula {
    if depth == 0 || r.random_bool(0.45) {
        return qf_atom(r, ints, bools);
    }
    match r.random_range(0..3u32) {
        0 => Formula::Not(Box::new(qf_formula(r, ints, bools, depth - 1))),
        1 => and_of(vec![
            qf_formula(r, ints, bools, depth - 1),
            qf_formula(r, ints, bools, depth - 1),
        ]),
        _ => or_of(vec![
            qf_formula(r, ints, bools, depth - 1),
            qf_formula(r, ints, bools, depth - 1),
        ]),
    }
}

/// Exhaustively search the box `|xᵢ| ≤ bound` (crossed with every boolean
/// assignment) for a valuation satisfying all conjuncts. Theory cases
/// mention no objects, so the candidate solutions carry none.
pub fn box_model(case: &TheoryCase, bound: i64) -> Option<Solution> {
    let n = case.int_vars.len();
    let m = case.bool_vars.len();
    let width = (2 * bound + 1) as usize;
    let mut digits = vec![0usize; n];
    loop {
        for mask in 0..(1u32 << m) {
            let valuation = Valuation {
                bools: case
                    .bool_vars
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (b.clone(), mask >> i & 1 == 1))
                    .collect(),
                ints: case
                    .int_vars
                    .iter()
                    .zip(&digits)
                    .map(|(v, d)| (v.clone(), *d as i64 - bound))
                    .collect(),
            };
            let sol = Solution {
                objects: vec![],
                valuation,
            };
            if case
                .conjuncts
                .iter()
                .all(|f| matches!(evaluate(f, &sol), Ok(true)))
            {
                return Some(sol);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return None;
            }
            digits[i] += 1;
            if digits[i] < width {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Proof padding

/// Splice `k` junk steps into a valid refutation, immediately before its
/// final UNSAT step. Every junk step is validated on insertion, so the
/// padded proof still replays; none of them feeds the contradiction, so
/// trimming must remove at least `k` steps.
pub fn pad_with_junk(r: &mut ChaCha8Rng, proof: &Proof, k: usize, theory_budget: u64) -> Proof {
    let last = proof.steps.last().expect("refutations are nonempty");
    assert_eq!(last.rule, Rule::Unsat, "padding expects a refutation");
    let mut steps: Vec<Step> = proof.steps[..proof.steps.len() - 1].to_vec();
    let mut state = replay(&steps, theory_budget);
    assert!(state.dead.is_none(), "the base proof must replay");

    let mut next_id = max_id(proof) + 1;
    let mut fresh_counter = 0usize;
    let mut added = 0usize;
    while added < k {
        let step_id = steps.len();
        if let Some(step) = junk_step(r, &state, step_id, &mut next_id, &mut fresh_counter) {
            let after = apply_step(&state, &step, theory_budget);
            assert!(
                after.dead.is_none(),
                "junk must be valid: {:?}",
                after.dead
            );
            state = after;
            steps.push(step);
            added += 1;
        }
    }
    let mut end = last.clone();
    end.id = steps.len();
    steps.push(end);
    Proof {
        steps: renumber(&steps),
    }
}

/// The largest resource id a proof allocates.
pub fn max_id(proof: &Proof) -> Id {
    proof
        .steps
        .iter()
        .flat_map(|s| {
            s.add_r
                .iter()
                .map(|(id, _)| *id)
                .chain(s.add_f.iter().map(|(id, _)| *id))
                .chain(s.add_d.iter().map(|(id, _)| *id))
        })
        .max()
        .unwrap_or(0)
}

/// One random junk step valid in `state`: a definition of a fresh boolean
/// atom, a fact/lemma round trip, a re-extraction from an existing
/// conjunction, a trivially entailed `true` fact, or a redundant
/// universal instantiation. `None` when the drawn kind has no material in
/// this state (the caller redraws).
fn junk_step(
    r: &mut ChaCha8Rng,
    state: &State,
    step_id: usize,
    next_id: &mut Id,
    fresh: &mut usize,
) -> Option<Step> {
    let mut take = |n: usize| -> Vec<Id> {
        let ids: Vec<Id> = (*next_id..*next_id + n).collect();
        *next_id += n;
        ids
    };
    let step = |rule, deps, add_r, add_f, add_d| Step {
        id: step_id,
        rule,
        deps,
        add_r,
        add_f,
        add_d,
    };
    match r.random_range(0..6u32) {
        0 => {
            let (lit, var) = loop {
                *fresh += 1;
                let lit = format!("jl{fresh}");
                let var = format!("jv{fresh}");
                if state.is_fresh_name(&lit) && state.is_fresh_name(&var) {
                    break (lit, var);
                }
            };
            let formula = Formula::BoolVar(var);
            let [pos, neg] = define_lemmas(&lit, &formula);
            let ids = take(3);
            Some(step(
                Rule::Define,
                Deps::default(),
                vec![(ids[0], pos), (ids[1], neg)],
                vec![],
                vec![(ids[2], SeoItem::Def { lit, formula })],
            ))
        }
        1 => {
            let facts: Vec<(&Id, &Formula)> = state.facts.iter().collect();
            if facts.is_empty() {
                return None;
            }
            let (&id, f) = facts[r.random_range(0..facts.len())];
            let ids = take(1);
            Some(step(
                Rule::TToFol,
                Deps {
                    f: vec![id],
                    ..Deps::default()
                },
                vec![(ids[0], f.clone())],
                vec![],
                vec![],
            ))
        }
        2 => {
            let qf: Vec<(&Id, &Formula)> = state
                .lemmas
                .iter()
                .filter(|(_, f)| f.is_quantifier_free())
                .collect();
            if qf.is_empty() {
                return None;
            }
            let (&id, f) = qf[r.random_range(0..qf.len())];
            let ids = take(1);
            Some(step(
                Rule::FolToT,
                Deps {
                    r: vec![id],
                    ..Deps::default()
                },
                vec![],
                vec![(ids[0], f.clone())],
                vec![],
            ))
        }
        3 => {
            let ands: Vec<(&Id, &Vec<Formula>)> = state
                .lemmas
                .iter()
                .filter_map(|(id, f)| match f {
                    Formula::And(cs) => Some((id, cs)),
                    _ => None,
                })
                .collect();
            if ands.is_empty() {
                return None;
            }
            let (&id, cs) = ands[r.random_range(0..ands.len())];
            let conjunct = cs[r.random_range(0..cs.len())].clone();
            let ids = take(1);
            Some(step(
                Rule::RewriteAnd,
                Deps {
                    r: vec![id],
                    ..Deps::default()
                },
                vec![(ids[0], conjunct)],
                vec![],
                vec![],
            ))
        }
        4 => {
            // `true` is entailed by the empty fact set.
            let ids = take(1);
            Some(step(
                Rule::TDerive,
                Deps::default(),
                vec![],
                vec![(ids[0], Formula::True)],
                vec![],
            ))
        }
        _ => {
            let foralls: Vec<(Id, &Binder, &Formula)> = state
                .lemmas
                .iter()
                .filter_map(|(id, f)| match f {
                    Formula::Forall(b, body) => Some((*id, b, &**body)),
                    _ => None,
                })
                .collect();
            if foralls.is_empty() {
                return None;
            }
            let (fid, binder, body) = foralls[r.random_range(0..foralls.len())];
            let objects: Vec<(Id, &str)> = state
                .seos
                .iter()
                .filter_map(|(id, item)| match item {
                    SeoItem::Obj { name, class } if *class == binder.class => {
                        Some((*id, name.as_str()))
                    }
                    _ => None,
                })
                .collect();
            if objects.is_empty() {
                return None;
            }
            let (oid, name) = objects[r.random_range(0..objects.len())];
            let added = implies(
                Formula::Ext(name.to_string()),
                body.subst_obj(&binder.var, name),
            );
            let ids = take(1);
            Some(step(
                Rule::UniversalInstStar,
                Deps {
                    r: vec![fid],
                    d: vec![oid],
                    ..Deps::default()
                },
                vec![(ids[0], added)],
                vec![],
                vec![],
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Hand-built refutations

/// A problem with a valid refutation, used by the rule-soundness and
/// corruption suites.
pub struct Scenario {
    pub name: &'static str,
    pub problem: Problem,
    pub proof: Proof,
}

/// Append the Input step: the problem's assertions in order, its declared
/// objects as side-effect objects.
pub fn input_step(b: &mut ProofBuilder, problem: &Problem) -> Applied {
    let seos = problem
        .signature
        .objects
        .iter()
        .map(|(name, class)| SeoItem::Obj {
            name: name.clone(),
            class: class.clone(),
        })
        .collect();
    b.apply(
        Rule::Input,
        Deps::default(),
        problem.assertions.clone(),
        vec![],
        seos,
    )
    .expect("input step applies")
}

fn gt(a: Term, b: Term) -> Formula {
    Formula::Cmp(CmpOp::Gt, a, b)
}

fn eq(a: Term, b: Term) -> Formula {
    Formula::Cmp(CmpOp::Eq, a, b)
}

fn int(k: i64) -> Term {
    Term::Int(k)
}

fn attr(obj: &str, a: &str) -> Term {
    Term::Attr(obj.to_string(), a.to_string())
}

fn av() -> Term {
    attr("a", "v")
}

fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

fn bv(l: &str) -> Formula {
    Formula::BoolVar(l.to_string())
}

fn deps_r(r: Vec<Id>) -> Deps {
    Deps {
        r,
        ..Deps::default()
    }
}

fn deps_f(f: Vec<Id>) -> Deps {
    Deps {
        f,
        ..Deps::default()
    }
}

fn deps_d(d: Vec<Id>) -> Deps {
    Deps {
        d,
        ..Deps::default()
    }
}

/// A one-class problem over a single declared object `a` with attribute
/// `v`, with the declared object's existence appended as the grammar does.
pub fn single_object_problem(mut assertions: Vec<Formula>) -> Problem {
    assertions.push(Formula::Ext("a".to_string()));
    Problem {
        signature: Signature {
            classes: BTreeMap::from([("A".to_string(), vec!["v".to_string()])]),
            objects: vec![("a".to_string(), "A".to_string())],
        },
        assertions,
    }
}

/// A one-class problem with no declared objects.
pub fn quantified_problem(assertions: Vec<Formula>) -> Problem {
    Problem {
        signature: Signature {
            classes: BTreeMap::from([("A".to_string(), vec!["v".to_string()])]),
            objects: vec![],
        },
        assertions,
    }
}

/// Negation chain: Define the negated input, ApplyLemma, RewriteNeg, Unit
/// down to the pushed conjunction, RewriteAnd, then refute in the theory.
pub fn neg_chain() -> Scenario {
    let guard = not(Formula::Ext("a".to_string()));
    let pos = gt(av(), int(0));
    let body = Formula::Or(vec![guard.clone(), pos.clone()]);
    let phi = not(body.clone());
    let problem = single_object_problem(vec![phi.clone(), gt(av(), int(5))]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let (def, lit) = b.def_get_or_define(&phi).expect("define");
    let l = b
        .apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![0],
                d: vec![def],
                ..Deps::default()
            },
            vec![bv(&lit)],
            vec![],
            vec![],
        )
        .expect("apply lemma")
        .lemmas[0];
    // One push of the negation: ¬(g ∨ p) becomes ¬g ∧ ¬p, with no
    // double-negation collapse.
    let pushed = and_of(vec![not(guard.clone()), not(pos.clone())]);
    let shape = b
        .apply(
            Rule::RewriteNeg,
            deps_d(vec![def]),
            vec![
                implies(bv(&lit), pushed.clone()),
                implies(complement(&bv(&lit)), body.clone()),
            ],
            vec![],
            vec![],
        )
        .expect("rewrite neg")
        .lemmas;
    let conj = b
        .apply(
            Rule::Unit,
            deps_r(vec![shape[0], l]),
            vec![pushed.clone()],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let negpos = b
        .apply(
            Rule::RewriteAnd,
            deps_r(vec![conj]),
            vec![not(pos.clone())],
            vec![],
            vec![],
        )
        .expect("rewrite and")
        .lemmas[0];
    let facts = b
        .apply(
            Rule::FolToT,
            deps_r(vec![negpos, 1]),
            vec![],
            vec![not(pos.clone()), gt(av(), int(5))],
            vec![],
        )
        .expect("fol to t")
        .facts;
    let fls = b
        .apply(
            Rule::TDerive,
            deps_f(facts),
            vec![],
            vec![Formula::False],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    b.apply(Rule::Unsat, deps_f(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "negation-chain",
        problem,
        proof: b.into_proof(),
    }
}

/// Primitive disjunction split: Define the clause and both disjuncts,
/// RewriteOr, Unit to the literal clause, refute in the theory.
pub fn or_primitive() -> Scenario {
    let d1 = gt(av(), int(3));
    let d2 = gt(av(), int(5));
    let clause = Formula::Or(vec![d1.clone(), d2.clone()]);
    let nopos = not(gt(av(), int(0)));
    let problem = single_object_problem(vec![clause.clone(), nopos.clone()]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let (anchor, l1) = b.def_get_or_define(&clause).expect("define clause");
    let lbar = b
        .apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![0],
                d: vec![anchor],
                ..Deps::default()
            },
            vec![bv(&l1)],
            vec![],
            vec![],
        )
        .expect("apply lemma")
        .lemmas[0];
    let (b1, l2) = b.def_get_or_define(&d1).expect("define first disjunct");
    let (b2, l3) = b.def_get_or_define(&d2).expect("define second disjunct");
    let mut lemmas = vec![implies(bv(&l1), or_of(vec![bv(&l2), bv(&l3)]))];
    for lx in [&l2, &l3] {
        lemmas.push(implies(complement(&bv(&l1)), complement(&bv(lx))));
    }
    let rewritten = b
        .apply(
            Rule::RewriteOr,
            deps_d(vec![anchor, b1, b2]),
            lemmas,
            vec![],
            vec![],
        )
        .expect("rewrite or")
        .lemmas;
    let litclause = b
        .apply(
            Rule::Unit,
            deps_r(vec![rewritten[0], lbar]),
            vec![or_of(vec![bv(&l2), bv(&l3)])],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let p1 = b.positive_def_lemma(&l2, &d1).expect("positive lemma");
    let p2 = b.positive_def_lemma(&l3, &d2).expect("positive lemma");
    let facts = b
        .apply(
            Rule::FolToT,
            deps_r(vec![litclause, p1, p2, 1]),
            vec![],
            vec![
                or_of(vec![bv(&l2), bv(&l3)]),
                implies(bv(&l2), d1.clone()),
                implies(bv(&l3), d2.clone()),
                nopos.clone(),
            ],
            vec![],
        )
        .expect("fol to t")
        .facts;
    let fls = b
        .apply(
            Rule::TDerive,
            deps_f(facts),
            vec![],
            vec![Formula::False],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    b.apply(Rule::Unsat, deps_f(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "disjunction-primitive",
        problem,
        proof: b.into_proof(),
    }
}

/// Substitution chain: bind the conjunction and one conjunct, Subs to the
/// literal image, unfold it, refute.
pub fn subs_chain() -> Scenario {
    let c1 = gt(av(), int(0));
    let c2 = eq(av(), int(0));
    let conj = Formula::And(vec![c1.clone(), c2.clone()]);
    let problem = single_object_problem(vec![conj.clone()]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let (anchor, l1) = b.def_get_or_define(&conj).expect("define conjunction");
    let (binding, l2) = b.def_get_or_define(&c1).expect("define conjunct");
    let image = substitute(&conj, &[(l2.clone(), c1.clone())]);
    let [pos, neg] = define_lemmas(&l1, &image);
    let subs = b
        .apply(
            Rule::Subs,
            deps_d(vec![anchor, binding]),
            vec![pos, neg],
            vec![],
            vec![],
        )
        .expect("subs")
        .lemmas;
    let lbar = b
        .apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![0],
                d: vec![anchor],
                ..Deps::default()
            },
            vec![bv(&l1)],
            vec![],
            vec![],
        )
        .expect("apply lemma")
        .lemmas[0];
    let img = b
        .apply(
            Rule::Unit,
            deps_r(vec![subs[0], lbar]),
            vec![image.clone()],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let parts = b
        .apply(
            Rule::RewriteAnd,
            deps_r(vec![img]),
            vec![bv(&l2), c2.clone()],
            vec![],
            vec![],
        )
        .expect("rewrite and")
        .lemmas;
    let posdef = b.positive_def_lemma(&l2, &c1).expect("positive lemma");
    let facts = b
        .apply(
            Rule::FolToT,
            deps_r(vec![parts[0], parts[1], posdef]),
            vec![],
            vec![bv(&l2), c2.clone(), implies(bv(&l2), c1.clone())],
            vec![],
        )
        .expect("fol to t")
        .facts;
    let fls = b
        .apply(
            Rule::TDerive,
            deps_f(facts),
            vec![],
            vec![Formula::False],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    b.apply(Rule::Unsat, deps_f(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "substitution-chain",
        problem,
        proof: b.into_proof(),
    }
}

/// Theory-to-logic round trip: derive a theory consequence, lift it back,
/// resolve it against an input clause whose remainder is `false`.
pub fn t_to_fol_chain() -> Scenario {
    let pos = gt(av(), int(0));
    let clause = Formula::Or(vec![not(pos.clone()), Formula::False]);
    let problem = single_object_problem(vec![clause.clone(), gt(av(), int(5))]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let high = b
        .apply(
            Rule::FolToT,
            deps_r(vec![1]),
            vec![],
            vec![gt(av(), int(5))],
            vec![],
        )
        .expect("fol to t")
        .facts[0];
    let derived = b
        .apply(
            Rule::TDerive,
            deps_f(vec![high]),
            vec![],
            vec![pos.clone()],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    let lifted = b
        .apply(
            Rule::TToFol,
            deps_f(vec![derived]),
            vec![pos.clone()],
            vec![],
            vec![],
        )
        .expect("t to fol")
        .lemmas[0];
    let fls = b
        .apply(
            Rule::Unit,
            deps_r(vec![0, lifted]),
            vec![Formula::False],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    b.apply(Rule::Unsat, deps_r(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "theory-round-trip",
        problem,
        proof: b.into_proof(),
    }
}

/// Primitive quantifier instantiation: a witness from the existential
/// contradicts the universal bound.
pub fn ei_ui_chain() -> Scenario {
    let ex = Formula::Exists(
        Binder {
            var: "x".to_string(),
            class: "A".to_string(),
        },
        Box::new(gt(attr("x", "v"), int(2))),
    );
    let fa = Formula::Forall(
        Binder {
            var: "y".to_string(),
            class: "A".to_string(),
        },
        Box::new(not(gt(attr("y", "v"), int(1)))),
    );
    let problem = quantified_problem(vec![ex.clone(), fa.clone()]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let (d_ex, l1) = b.def_get_or_define(&ex).expect("define existential");
    let lbar1 = b
        .apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![0],
                d: vec![d_ex],
                ..Deps::default()
            },
            vec![bv(&l1)],
            vec![],
            vec![],
        )
        .expect("apply lemma")
        .lemmas[0];
    let w = b.fresh_obj("x");
    let witnessed = and_of(vec![
        Formula::Ext(w.clone()),
        gt(attr(&w, "v"), int(2)),
    ]);
    let [wpos, wneg] = define_lemmas(&l1, &witnessed);
    let ei = b
        .apply(
            Rule::ExistentialInst,
            deps_d(vec![d_ex]),
            vec![wpos, wneg],
            vec![],
            vec![SeoItem::Obj {
                name: w.clone(),
                class: "A".to_string(),
            }],
        )
        .expect("existential inst");
    let wand = b
        .apply(
            Rule::Unit,
            deps_r(vec![ei.lemmas[0], lbar1]),
            vec![witnessed.clone()],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let parts = b
        .apply(
            Rule::RewriteAnd,
            deps_r(vec![wand]),
            vec![Formula::Ext(w.clone()), gt(attr(&w, "v"), int(2))],
            vec![],
            vec![],
        )
        .expect("rewrite and")
        .lemmas;
    let (d_fa, l2) = b.def_get_or_define(&fa).expect("define universal");
    let lbar2 = b
        .apply(
            Rule::ApplyLemma,
            Deps {
                r: vec![1],
                d: vec![d_fa],
                ..Deps::default()
            },
            vec![bv(&l2)],
            vec![],
            vec![],
        )
        .expect("apply lemma")
        .lemmas[0];
    let grounded = implies(
        Formula::Ext(w.clone()),
        not(gt(attr(&w, "v"), int(1))),
    );
    let inst = b
        .apply(
            Rule::UniversalInst,
            deps_d(vec![d_fa, ei.seos[0]]),
            vec![implies(bv(&l2), grounded.clone())],
            vec![],
            vec![],
        )
        .expect("universal inst")
        .lemmas[0];
    let guard = b
        .apply(
            Rule::Unit,
            deps_r(vec![inst, lbar2]),
            vec![grounded.clone()],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let negv = b
        .apply(
            Rule::Unit,
            deps_r(vec![guard, parts[0]]),
            vec![not(gt(attr(&w, "v"), int(1)))],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let facts = b
        .apply(
            Rule::FolToT,
            deps_r(vec![parts[1], negv]),
            vec![],
            vec![gt(attr(&w, "v"), int(2)), not(gt(attr(&w, "v"), int(1)))],
            vec![],
        )
        .expect("fol to t")
        .facts;
    let fls = b
        .apply(
            Rule::TDerive,
            deps_f(facts),
            vec![],
            vec![Formula::False],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    b.apply(Rule::Unsat, deps_f(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "instantiation-primitive",
        problem,
        proof: b.into_proof(),
    }
}

/// The same contradiction as [`ei_ui_chain`], derived with the three
/// decomposition macros instead of the primitive chains.
pub fn star_chain() -> Scenario {
    let ex = Formula::Exists(
        Binder {
            var: "x".to_string(),
            class: "A".to_string(),
        },
        Box::new(gt(attr("x", "v"), int(2))),
    );
    let fa = Formula::Forall(
        Binder {
            var: "y".to_string(),
            class: "A".to_string(),
        },
        Box::new(not(gt(attr("y", "v"), int(1)))),
    );
    let problem = quantified_problem(vec![ex.clone(), fa.clone()]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let w = b.fresh_obj("x");
    let witnessed = and_of(vec![
        Formula::Ext(w.clone()),
        gt(attr(&w, "v"), int(2)),
    ]);
    let ei = b
        .apply(
            Rule::ExistentialInstStar,
            deps_r(vec![0]),
            vec![witnessed.clone()],
            vec![],
            vec![SeoItem::Obj {
                name: w.clone(),
                class: "A".to_string(),
            }],
        )
        .expect("existential inst macro");
    let parts = b
        .apply(
            Rule::RewriteAndStar,
            deps_r(vec![ei.lemmas[0]]),
            vec![Formula::Ext(w.clone()), gt(attr(&w, "v"), int(2))],
            vec![],
            vec![],
        )
        .expect("rewrite and macro")
        .lemmas;
    let grounded = implies(
        Formula::Ext(w.clone()),
        not(gt(attr(&w, "v"), int(1))),
    );
    let inst = b
        .apply(
            Rule::UniversalInstStar,
            Deps {
                r: vec![1],
                d: vec![ei.seos[0]],
                ..Deps::default()
            },
            vec![grounded.clone()],
            vec![],
            vec![],
        )
        .expect("universal inst macro")
        .lemmas[0];
    let negv = b
        .apply(
            Rule::Unit,
            deps_r(vec![inst, parts[0]]),
            vec![not(gt(attr(&w, "v"), int(1)))],
            vec![],
            vec![],
        )
        .expect("unit")
        .lemmas[0];
    let facts = b
        .apply(
            Rule::FolToT,
            deps_r(vec![parts[1], negv]),
            vec![],
            vec![gt(attr(&w, "v"), int(2)), not(gt(attr(&w, "v"), int(1)))],
            vec![],
        )
        .expect("fol to t")
        .facts;
    let fls = b
        .apply(
            Rule::TDerive,
            deps_f(facts),
            vec![],
            vec![Formula::False],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    b.apply(Rule::Unsat, deps_f(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "instantiation-macros",
        problem,
        proof: b.into_proof(),
    }
}

/// Disjunction split through the macro rule: one step defines both
/// disjuncts and yields the literal clause.
pub fn or_star() -> Scenario {
    let d1 = gt(av(), int(3));
    let d2 = gt(av(), int(5));
    let clause = Formula::Or(vec![d1.clone(), d2.clone()]);
    let nopos = not(gt(av(), int(0)));
    let problem = single_object_problem(vec![clause.clone(), nopos.clone()]);

    let mut b = ProofBuilder::new(DEFAULT_THEORY_BUDGET);
    input_step(&mut b, &problem);
    let l1 = b.fresh_lit();
    let l2 = b.fresh_lit();
    let split = b
        .apply(
            Rule::RewriteOrStar,
            deps_r(vec![0]),
            vec![
                implies(bv(&l1), d1.clone()),
                implies(bv(&l2), d2.clone()),
                or_of(vec![bv(&l1), bv(&l2)]),
            ],
            vec![],
            vec![
                SeoItem::Def {
                    lit: l1.clone(),
                    formula: d1.clone(),
                },
                SeoItem::Def {
                    lit: l2.clone(),
                    formula: d2.clone(),
                },
            ],
        )
        .expect("rewrite or macro");
    let facts = b
        .apply(
            Rule::FolToT,
            deps_r(vec![split.lemmas[2], split.lemmas[0], split.lemmas[1], 1]),
            vec![],
            vec![
                or_of(vec![bv(&l1), bv(&l2)]),
                implies(bv(&l1), d1.clone()),
                implies(bv(&l2), d2.clone()),
                nopos.clone(),
            ],
            vec![],
        )
        .expect("fol to t")
        .facts;
    let fls = b
        .apply(
            Rule::TDerive,
            deps_f(facts),
            vec![],
            vec![Formula::False],
            vec![],
        )
        .expect("t derive")
        .facts[0];
    b.apply(Rule::Unsat, deps_f(vec![fls]), vec![], vec![], vec![])
        .expect("unsat");
    Scenario {
        name: "disjunction-macro",
        problem,
        proof: b.into_proof(),
    }
}

/// Every hand-built refutation. Between them their steps use all
/// eighteen derivation rules.
pub fn scenarios() -> Vec<Scenario> {
    vec![
        neg_chain(),
        or_primitive(),
        subs_chain(),
        t_to_fol_chain(),
        ei_ui_chain(),
        star_chain(),
        or_star(),
    ]
}

// ---------------------------------------------------------------------------
// State semantics

/// The semantic reading of a proof state: the conjunction of its lemmas
/// and facts over the problem's signature extended with the objects the
/// proof introduced. Definitions contribute nothing directly — the
/// definitional lemmas added alongside them carry their meaning.
pub fn state_constraints(problem: &Problem, state: &State) -> (Vec<Formula>, Signature) {
    let mut formulas: Vec<Formula> = state.lemmas.values().cloned().collect();
    formulas.extend(state.facts.values().cloned());
    let mut signature = problem.signature.clone();
    for (name, class) in state.objects() {
        if !signature.objects.iter().any(|(n, _)| *n == name) {
            signature.objects.push((name, class));
        }
    }
    (formulas, signature)
}

// ---------------------------------------------------------------------------
// Targeted corruptions

/// Where a corruption must surface: at a specific step, or at the
/// input-correspondence check (which reports no step index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    AtStep(usize),
    InputLevel,
}

/// One corrupted proof and where checking must report the damage.
pub struct Corruption {
    pub scenario: &'static str,
    pub rule: Rule,
    pub kind: &'static str,
    pub proof: Proof,
    pub expect: Expected,
}

/// All applicable corruptions of `proof`, targeting the first occurrence
/// of every rule among the steps the backward walk re-checks (the core,
/// plus the input step). `report` must come from a passing backward check
/// of the same proof.
pub fn corruptions_for(
    scenario: &'static str,
    proof: &Proof,
    report: &CheckReport,
) -> Vec<Corruption> {
    assert!(report.valid, "corruptions start from a valid proof");
    let mut covered: BTreeSet<&'static str> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, step) in proof.steps.iter().enumerate() {
        let name = step.rule.name();
        if covered.contains(name) {
            continue;
        }
        if step.rule != Rule::Input && !report.core.contains(&i) {
            continue;
        }
        covered.insert(name);
        out.extend(dropped_dep(scenario, proof, report, i));
        out.extend(wrong_fresh_name(scenario, proof, i));
        out.push(extra_addition(scenario, proof, i));
        out.extend(flipped_literal(scenario, proof, i));
    }
    out
}

/// Re-anchor the step on its minimized dependencies and drop the first:
/// minimized sets are exactly what the precondition consumes, so the
/// remainder cannot satisfy it. Inapplicable to steps with no consumed
/// dependencies (Input, Define).
fn dropped_dep(
    scenario: &'static str,
    proof: &Proof,
    report: &CheckReport,
    i: usize,
) -> Option<Corruption> {
    let step = &proof.steps[i];
    if step.rule == Rule::Input {
        return None;
    }
    let min = report.minimized.get(&i)?;
    let mut deps = min.clone();
    if !deps.r.is_empty() {
        deps.r.remove(0);
    } else if !deps.f.is_empty() {
        deps.f.remove(0);
    } else if !deps.d.is_empty() {
        deps.d.remove(0);
    } else {
        return None;
    }
    let mut p = proof.clone();
    p.steps[i].deps = deps;
    Some(Corruption {
        scenario,
        rule: step.rule,
        kind: "dropped-dep",
        proof: p,
        expect: Expected::AtStep(i),
    })
}

/// Rename a freshly introduced literal or object to a name some earlier
/// step already introduced. Applicable to the name-introducing rules; on
/// the input step the rename makes the declared objects disagree with the
/// problem instead.
fn wrong_fresh_name(scenario: &'static str, proof: &Proof, i: usize) -> Option<Corruption> {
    let mut p = proof.clone();
    let step = &mut p.steps[i];
    let expect = match step.rule {
        Rule::Input => {
            let (_, item) = step.add_d.first_mut()?;
            match item {
                SeoItem::Obj { name, .. } => *name = "zz9".to_string(),
                SeoItem::Def { .. } => return None,
            }
            Expected::InputLevel
        }
        Rule::Define | Rule::RewriteOrStar => {
            let taken = earlier_name(proof, i)?;
            let (_, item) = p.steps[i].add_d.first_mut()?;
            match item {
                SeoItem::Def { lit, .. } => *lit = taken,
                SeoItem::Obj { .. } => return None,
            }
            Expected::AtStep(i)
        }
        Rule::ExistentialInst | Rule::ExistentialInstStar => {
            let taken = earlier_name(proof, i)?;
            let (_, item) = p.steps[i].add_d.first_mut()?;
            match item {
                SeoItem::Obj { name, .. } => *name = taken,
                SeoItem::Def { .. } => return None,
            }
            Expected::AtStep(i)
        }
        _ => return None,
    };
    Some(Corruption {
        scenario,
        rule: proof.steps[i].rule,
        kind: "wrong-fresh-name",
        proof: p,
        expect,
    })
}

/// A name introduced by some step before `i` (the same pool both checkers
/// consult for freshness).
fn earlier_name(proof: &Proof, i: usize) -> Option<String> {
    let mut names = BTreeSet::new();
    for step in &proof.steps[..i] {
        for (_, f) in &step.add_r {
            f.all_names(&mut names);
        }
        for (_, f) in &step.add_f {
            f.all_names(&mut names);
        }
        for (_, item) in &step.add_d {
            match item {
                SeoItem::Obj { name, .. } => {
                    names.insert(name.clone());
                }
                SeoItem::Def { lit, formula } => {
                    names.insert(lit.clone());
                    formula.all_names(&mut names);
                }
            }
        }
    }
    names.into_iter().next()
}

/// Append one spurious `true` resource to the step's additions. Every
/// rule constrains the exact number or membership of its additions, so
/// both checkers must reject the enlarged step.
fn extra_addition(scenario: &'static str, proof: &Proof, i: usize) -> Corruption {
    let mut p = proof.clone();
    let free_id = max_id(proof) + 1 + i;
    let step = &mut p.steps[i];
    match step.rule {
        Rule::TDerive | Rule::FolToT => step.add_f.push((free_id, Formula::True)),
        _ => step.add_r.push((free_id, Formula::True)),
    }
    let expect = if step.rule == Rule::Input {
        Expected::InputLevel
    } else {
        Expected::AtStep(i)
    };
    Corruption {
        scenario,
        rule: proof.steps[i].rule,
        kind: "extra-addition",
        proof: p,
        expect,
    }
}

/// Complement the step's first added formula. Shape-checked rules fail on
/// the spot; a flipped TDerive stays derivable (its fact dependencies are
/// jointly contradictory, so they entail the complement too) and the
/// damage surfaces at the consuming UNSAT step instead.
fn flipped_literal(scenario: &'static str, proof: &Proof, i: usize) -> Option<Corruption> {
    let mut p = proof.clone();
    let last = proof.steps.len() - 1;
    let step = &mut p.steps[i];
    let expect = match step.rule {
        Rule::Unsat => return None,
        Rule::TDerive => {
            let (_, f) = step.add_f.first_mut()?;
            *f = complement(f);
            Expected::AtStep(last)
        }
        Rule::FolToT => {
            let (_, f) = step.add_f.first_mut()?;
            *f = complement(f);
            Expected::AtStep(i)
        }
        Rule::Input => {
            let (_, f) = step.add_r.first_mut()?;
            *f = complement(f);
            Expected::InputLevel
        }
        _ => {
            let (_, f) = step.add_r.first_mut()?;
            *f = complement(f);
            Expected::AtStep(i)
        }
    };
    Some(Corruption {
        scenario,
        rule: proof.steps[i].rule,
        kind: "flipped-literal",
        proof: p,
        expect,
    })
}

/// Run both checkers over a corruption and demand rejection at the
/// expected place; macro-rule targets must additionally fail the
/// expanding forward check. `Err` describes the first discrepancy.
pub fn check_corruption(problem: &Problem, c: &Corruption) -> Result<(), String> {
    let label = format!("{} / {} / {}", c.scenario, c.rule.name(), c.kind);
    match forward_check(problem, &c.proof, DEFAULT_THEORY_BUDGET, CheckMode::Native) {
        Ok(()) => return Err(format!("{label}: forward check accepted the corruption")),
        Err(fail) => match c.expect {
            Expected::AtStep(i) if fail.step != Some(i) => {
                return Err(format!(
                    "{label}: forward check failed at {:?}, expected step {i} ({})",
                    fail.step, fail.reason
                ));
            }
            Expected::InputLevel if fail.step.is_some() => {
                return Err(format!(
                    "{label}: forward check blamed step {:?}, expected the input check",
                    fail.step
                ));
            }
            _ => {}
        },
    }
    let report = backward_check(problem, &c.proof, DEFAULT_THEORY_BUDGET);
    if report.valid {
        return Err(format!("{label}: backward check accepted the corruption"));
    }
    match c.expect {
        Expected::AtStep(i) => match &report.failing_step {
            Some((j, _)) if *j == i => {}
            other => {
                return Err(format!(
                    "{label}: backward check blamed {other:?}, expected step {i}"
                ));
            }
        },
        Expected::InputLevel => {
            if report.reason.is_none() || report.failing_step.is_some() {
                return Err(format!(
                    "{label}: backward check blamed {:?}, expected an input-level reason",
                    report.failing_step
                ));
            }
        }
    }
    if c.rule.is_macro()
        && forward_check(problem, &c.proof, DEFAULT_THEORY_BUDGET, CheckMode::Expand).is_ok()
    {
        return Err(format!(
            "{label}: expanding forward check accepted the corruption"
        ));
    }
    Ok(())
}
