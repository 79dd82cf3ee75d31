//! Satisfiability of ground formulas modulo linear integer arithmetic.
//!
//! Lazy theory integration: the boolean structure is abstracted into CNF
//! (one propositional variable per distinct atom), a DPLL loop enumerates
//! full assignments, and each candidate's arithmetic literals are checked
//! for integer feasibility (rational simplex plus branching on fractional
//! values and on disequalities). Infeasible combinations come back as
//! blocking clauses over the arithmetic literals.
//!
//! Every decision, theory check, simplex pivot, and branch node consumes
//! budget; exhaustion yields `Unknown`, never a wrong verdict.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::linear::{LinAtom, LinExpr};
use super::simplex::{self, RowBounds, SimplexOutcome};
use crate::fol::{CmpOp, Formula};

/// Default work budget; override per call or via the CLI.
pub const DEFAULT_THEORY_BUDGET: u64 = 500_000;

/// A satisfying assignment: object existence flags, boolean variables,
/// and integer values keyed by `o.attr` or variable name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub bools: BTreeMap<String, bool>,
    pub exts: BTreeMap<String, bool>,
    pub ints: BTreeMap<String, BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TheoryVerdict {
    Sat(Box<Model>),
    /// Indices into the input slice forming an unsatisfiable subset (not
    /// necessarily minimal; see `minimize_core`).
    Unsat(Vec<usize>),
    Unknown,
}

impl TheoryVerdict {
    pub fn is_unsat(&self) -> bool {
        matches!(self, TheoryVerdict::Unsat(_))
    }
}

/// Decide satisfiability of the conjunction of ground formulas.
/// Quantified input yields `Unknown` (the theory handles only ground
/// formulas; callers ground first).
pub fn check_sat(fs: &[Formula], budget: u64) -> TheoryVerdict {
    let mut budget = budget;
    let mut cnf = Cnf::default();
    for (i, f) in fs.iter().enumerate() {
        match cnf.translate(f) {
            None => return TheoryVerdict::Unknown,
            Some(TLit::Const(false)) => return TheoryVerdict::Unsat(vec![i]),
            Some(TLit::Const(true)) => {}
            Some(TLit::L(l)) => cnf.clauses.push(vec![l]),
        }
    }
    let all_indices: Vec<usize> = (0..fs.len()).collect();
    let mut dpll = Dpll {
        assign: vec![None; cnf.n_vars],
        trail: Vec::new(),
        decisions: Vec::new(),
        clauses: cnf.clauses,
    };
    match dpll.solve(&cnf.atoms, &mut budget) {
        DpllOutcome::Sat(model) => TheoryVerdict::Sat(Box::new(model)),
        DpllOutcome::Unsat => TheoryVerdict::Unsat(all_indices),
        DpllOutcome::Unknown => TheoryVerdict::Unknown,
    }
}

fn spend(budget: &mut u64) -> bool {
    if *budget == 0 {
        false
    } else {
        *budget -= 1;
        true
    }
}

// ---------------------------------------------------------------------
// Propositional abstraction
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Atom {
    Bool(String),
    Ext(String),
    Lin(LinAtom),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit {
    var: usize,
    pos: bool,
}

impl Lit {
    fn neg(self) -> Lit {
        Lit {
            var: self.var,
            pos: !self.pos,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum TLit {
    Const(bool),
    L(Lit),
}

#[derive(Default)]
struct Cnf {
    /// `(variable id, atom)` pairs; aux variables from the CNF encoding
    /// interleave in the id space, so the id is stored explicitly.
    atoms: Vec<(usize, Atom)>,
    index: HashMap<Atom, usize>,
    n_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    fn atom_lit(&mut self, a: Atom) -> TLit {
        if let Some(&v) = self.index.get(&a) {
            return TLit::L(Lit { var: v, pos: true });
        }
        let v = self.n_vars;
        self.n_vars += 1;
        self.atoms.push((v, a.clone()));
        self.index.insert(a, v);
        TLit::L(Lit { var: v, pos: true })
    }

    fn aux(&mut self) -> Lit {
        let v = self.n_vars;
        self.n_vars += 1;
        Lit { var: v, pos: true }
    }

    /// Returns `None` for formulas outside the ground fragment.
    fn translate(&mut self, f: &Formula) -> Option<TLit> {
        Some(match f {
            Formula::True => TLit::Const(true),
            Formula::False => TLit::Const(false),
            Formula::BoolVar(b) => self.atom_lit(Atom::Bool(b.clone())),
            Formula::Ext(o) => self.atom_lit(Atom::Ext(o.clone())),
            Formula::Cmp(op, a, b) => {
                let atom = LinAtom::from_cmp(*op, a, b);
                match atom.const_value() {
                    Some(v) => TLit::Const(v),
                    None => self.atom_lit(Atom::Lin(atom)),
                }
            }
            Formula::Not(g) => match self.translate(g)? {
                TLit::Const(v) => TLit::Const(!v),
                TLit::L(l) => TLit::L(l.neg()),
            },
            Formula::And(fs) | Formula::Or(fs) => {
                let conj = matches!(f, Formula::And(_));
                let mut lits = Vec::new();
                for g in fs {
                    match self.translate(g)? {
                        TLit::Const(v) if v == conj => {}
                        TLit::Const(_) => return Some(TLit::Const(!conj)),
                        TLit::L(l) => lits.push(l),
                    }
                }
                match lits.len() {
                    0 => TLit::Const(conj),
                    1 => TLit::L(lits[0]),
                    _ => {
                        let a = self.aux();
                        if conj {
                            // a ↔ l₁ ∧ … ∧ lₙ
                            let mut long = vec![a];
                            for l in &lits {
                                self.clauses.push(vec![a.neg(), *l]);
                                long.push(l.neg());
                            }
                            self.clauses.push(long);
                        } else {
                            // a ↔ l₁ ∨ … ∨ lₙ
                            let mut long = vec![a.neg()];
                            for l in &lits {
                                self.clauses.push(vec![a, l.neg()]);
                                long.push(*l);
                            }
                            self.clauses.push(long);
                        }
                        TLit::L(a)
                    }
                }
            }
            Formula::Exists(..) | Formula::Forall(..) => return None,
        })
    }
}

// ---------------------------------------------------------------------
// DPLL with chronological backtracking
// ---------------------------------------------------------------------

struct Dec {
    var: usize,
    trail_len: usize,
    flipped: bool,
}

struct Dpll {
    assign: Vec<Option<bool>>,
    trail: Vec<usize>,
    decisions: Vec<Dec>,
    clauses: Vec<Vec<Lit>>,
}

enum DpllOutcome {
    Sat(Model),
    Unsat,
    Unknown,
}

impl Dpll {
    fn solve(&mut self, atoms: &[(usize, Atom)], budget: &mut u64) -> DpllOutcome {
        loop {
            if self.propagate_conflicts() {
                if !self.backtrack() {
                    return DpllOutcome::Unsat;
                }
                continue;
            }
            if let Some(v) = self.assign.iter().position(Option::is_none) {
                if !spend(budget) {
                    return DpllOutcome::Unknown;
                }
                self.decisions.push(Dec {
                    var: v,
                    trail_len: self.trail.len(),
                    flipped: false,
                });
                self.set(v, true);
                continue;
            }
            // Full assignment: hand the arithmetic literals to the theory.
            if !spend(budget) {
                return DpllOutcome::Unknown;
            }
            let mut cons = Vec::new();
            let mut involved = Vec::new();
            for (v, atom) in atoms {
                if let Atom::Lin(la) = atom {
                    let value = self.assign[*v].unwrap();
                    cons.push(constraint_of(la, value));
                    involved.push(Lit { var: *v, pos: value });
                }
            }
            match int_feasible(cons, budget) {
                ThResult::Point(point) => {
                    return DpllOutcome::Sat(self.extract_model(atoms, &point))
                }
                ThResult::Budget => return DpllOutcome::Unknown,
                ThResult::Infeasible => {
                    self.clauses.push(involved.iter().map(|l| l.neg()).collect());
                    if !self.backtrack() {
                        return DpllOutcome::Unsat;
                    }
                }
            }
        }
    }

    fn set(&mut self, var: usize, value: bool) {
        self.assign[var] = Some(value);
        self.trail.push(var);
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var].map(|v| v == l.pos)
    }

    /// Unit propagation to fixpoint; `true` on conflict.
    fn propagate_conflicts(&mut self) -> bool {
        loop {
            let mut changed = false;
            for ci in 0..self.clauses.len() {
                let mut unassigned = None;
                let mut n_unassigned = 0;
                let mut satisfied = false;
                for &l in &self.clauses[ci] {
                    match self.lit_value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            n_unassigned += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match n_unassigned {
                    0 => return true,
                    1 => {
                        let l = unassigned.unwrap();
                        self.set(l.var, l.pos);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return false;
            }
        }
    }

    /// Undo to the most recent unflipped decision and try its other
    /// value; `false` when none is left (search space exhausted).
    fn backtrack(&mut self) -> bool {
        while let Some(d) = self.decisions.pop() {
            while self.trail.len() > d.trail_len {
                let v = self.trail.pop().unwrap();
                self.assign[v] = None;
            }
            if !d.flipped {
                self.decisions.push(Dec {
                    var: d.var,
                    trail_len: d.trail_len,
                    flipped: true,
                });
                self.set(d.var, false);
                return true;
            }
        }
        false
    }

    fn extract_model(&self, atoms: &[(usize, Atom)], point: &BTreeMap<String, BigRational>) -> Model {
        let mut model = Model::default();
        for (v, atom) in atoms {
            let value = self.assign[*v].unwrap();
            match atom {
                Atom::Bool(b) => {
                    model.bools.insert(b.clone(), value);
                }
                Atom::Ext(o) => {
                    model.exts.insert(o.clone(), value);
                }
                Atom::Lin(_) => {}
            }
        }
        for (name, q) in point {
            model.ints.insert(name.clone(), q.to_integer());
        }
        model
    }
}

// ---------------------------------------------------------------------
// Integer feasibility of a conjunction of arithmetic literals
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Con {
    /// expr ≥ 0
    Ge(LinExpr),
    /// expr = 0
    EqZ(LinExpr),
    /// expr ≠ 0
    Ne(LinExpr),
}

enum ThResult {
    Point(BTreeMap<String, BigRational>),
    Infeasible,
    Budget,
}

fn constraint_of(atom: &LinAtom, value: bool) -> Con {
    let e = &atom.expr;
    match (atom.op, value) {
        // e > 0 over integers is e − 1 ≥ 0.
        (CmpOp::Gt, true) => Con::Ge(shifted(e, -1)),
        (CmpOp::Gt, false) => Con::Ge(e.negated()),
        (CmpOp::Eq, true) => Con::EqZ(e.clone()),
        (CmpOp::Eq, false) => Con::Ne(e.clone()),
    }
}

fn shifted(e: &LinExpr, k: i64) -> LinExpr {
    let mut out = e.clone();
    out.constant += BigInt::from(k);
    out
}

fn int_feasible(cons: Vec<Con>, budget: &mut u64) -> ThResult {
    if !spend(budget) {
        return ThResult::Budget;
    }

    // Split the first disequality and recurse on both sides.
    if let Some(pos) = cons.iter().position(|c| matches!(c, Con::Ne(_))) {
        let Con::Ne(e) = cons[pos].clone() else {
            unreachable!()
        };
        let mut low = cons.clone();
        low[pos] = Con::Ge(shifted(&e.negated(), -1)); // e ≤ −1
        let mut high = cons;
        high[pos] = Con::Ge(shifted(&e, -1)); // e ≥ 1
        return match int_feasible(low, budget) {
            ThResult::Infeasible => int_feasible(high, budget),
            other => other,
        };
    }

    // An equality whose coefficient gcd does not divide its constant has
    // no integer solution even when rationally feasible.
    for c in &cons {
        if let Con::EqZ(e) = c {
            let mut g = BigInt::zero();
            for v in e.coeffs.values() {
                g = gcd(&g, v);
            }
            if g.is_zero() {
                if !e.constant.is_zero() {
                    return ThResult::Infeasible;
                }
            } else if (&e.constant % &g) != BigInt::zero() {
                return ThResult::Infeasible;
            }
        }
    }

    // Column layout (ids in name order) and merged row bounds.
    let mut names: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    for c in &cons {
        let e = match c {
            Con::Ge(e) | Con::EqZ(e) => e,
            Con::Ne(_) => unreachable!(),
        };
        names.extend(e.coeffs.keys().cloned());
    }
    let names: Vec<String> = names.into_iter().collect();
    let columns: BTreeMap<String, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let mut merged: BTreeMap<Vec<(usize, BigInt)>, RowBounds> = BTreeMap::new();
    for c in &cons {
        let (e, eq) = match c {
            Con::Ge(e) => (e, false),
            Con::EqZ(e) => (e, true),
            Con::Ne(_) => unreachable!(),
        };
        let key: Vec<(usize, BigInt)> = e
            .coeffs
            .iter()
            .map(|(n, v)| (columns[n], v.clone()))
            .collect();
        if key.is_empty() {
            // Constant constraint: decide immediately.
            let ok = if eq {
                e.constant.is_zero()
            } else {
                !e.constant.is_negative()
            };
            if !ok {
                return ThResult::Infeasible;
            }
            continue;
        }
        let lo = BigRational::from(-&e.constant);
        let entry = merged.entry(key).or_default();
        if entry.lower.as_ref().is_none_or(|l| *l < lo) {
            entry.lower = Some(lo.clone());
        }
        if eq && entry.upper.as_ref().is_none_or(|u| *u > lo) {
            entry.upper = Some(lo);
        }
        if let (Some(l), Some(u)) = (&entry.lower, &entry.upper) {
            if l > u {
                return ThResult::Infeasible;
            }
        }
    }

    let rows: Vec<(Vec<(usize, BigRational)>, RowBounds)> = merged
        .into_iter()
        .map(|(key, bounds)| {
            (
                key.into_iter()
                    .map(|(c, v)| (c, BigRational::from(v)))
                    .collect(),
                bounds,
            )
        })
        .collect();

    match simplex::solve(columns.len(), &rows, budget) {
        SimplexOutcome::Infeasible => ThResult::Infeasible,
        SimplexOutcome::BudgetExceeded => ThResult::Budget,
        SimplexOutcome::Feasible(point) => {
            // Branch on the first fractional coordinate, if any.
            for (i, q) in point.iter().enumerate() {
                if q.is_integer() {
                    continue;
                }
                let name = names[i].clone();
                let mut le = LinExpr::zero();
                le.coeffs.insert(name.clone(), BigInt::from(-1));
                le.constant = q.floor().to_integer();
                let mut low = cons.clone();
                low.push(Con::Ge(le)); // x ≤ ⌊q⌋
                let mut ge = LinExpr::zero();
                ge.coeffs.insert(name, BigInt::from(1));
                ge.constant = -q.ceil().to_integer();
                let mut high = cons;
                high.push(Con::Ge(ge)); // x ≥ ⌈q⌉
                return match int_feasible(low, budget) {
                    ThResult::Infeasible => int_feasible(high, budget),
                    other => other,
                };
            }
            ThResult::Point(names.into_iter().zip(point).collect())
        }
    }
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = &a % &b;
        a = std::mem::replace(&mut b, r);
    }
    a.abs()
}
