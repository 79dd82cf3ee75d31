//! Core AST: terms, formulas, signatures.

use std::collections::{BTreeMap, BTreeSet};

/// A signature: classes with their (integer) attribute names, plus free
/// relational objects pre-populated in every domain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    /// Class name → ordered attribute names. Every attribute is an integer;
    /// the boolean `ext` attribute is implicit on every class.
    pub classes: BTreeMap<String, Vec<String>>,
    /// Free object name → class name (declaration order preserved).
    pub objects: Vec<(String, String)>,
}

impl Signature {
    /// Attribute list of `class`, if declared.
    pub fn attrs(&self, class: &str) -> Option<&[String]> {
        self.classes.get(class).map(|v| v.as_slice())
    }

    /// Class of a declared free object.
    pub fn object_class(&self, name: &str) -> Option<&str> {
        self.objects
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }
}

/// A parsed problem: signature plus the asserted formulas, in file order.
/// Each declared free object contributes a trailing `(ext o)` assertion so
/// that "declared objects exist" is an ordinary input resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub signature: Signature,
    pub assertions: Vec<Formula>,
}

/// Integer terms. Subtraction and unary minus are parser sugar for
/// `(* -1 t)`; only the forms below exist after parsing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Integer constant.
    Int(i64),
    /// Free integer variable. Not producible from the input grammar; used
    /// by the theory layer and its tests.
    Var(String),
    /// Attribute access `o.x`, where `o` is a bound quantifier variable or
    /// an object name.
    Attr(String, String),
    /// n-ary sum.
    Add(Vec<Term>),
    /// Scalar multiple `c × t`.
    Mul(i64, Box<Term>),
}

/// Comparison operators of the core grammar. `>=`, `<`, `<=` desugar at
/// parse time (see the parser), so rule pattern matching only ever sees
/// these two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Gt,
}

/// A quantifier binder: variable name and the class it ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binder {
    pub var: String,
    pub class: String,
}

/// FOL* formulas. `And`/`Or` are n-ary and kept associativity-spliced by
/// the [`and_of`]/[`or_of`] constructors; implications are encoded as
/// `Or[complement(antecedent), consequent…]` with the antecedent first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    /// Boolean variable (a definition literal introduced by proofs).
    BoolVar(String),
    /// Existence atom `o.ext`.
    Ext(String),
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Binder, Box<Formula>),
    Forall(Binder, Box<Formula>),
}

/// n-ary conjunction with associative splicing: nested `And` children are
/// flattened, a single child collapses, an empty list is `true`.
pub fn and_of(children: Vec<Formula>) -> Formula {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        match c {
            Formula::And(cs) => out.extend(cs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Formula::True,
        1 => out.pop().unwrap(),
        _ => Formula::And(out),
    }
}

/// n-ary disjunction with associative splicing (dual of [`and_of`]).
pub fn or_of(children: Vec<Formula>) -> Formula {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        match c {
            Formula::Or(cs) => out.extend(cs),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => Formula::False,
        1 => out.pop().unwrap(),
        _ => Formula::Or(out),
    }
}

/// Logical complement of a formula *as a literal*: strips one `Not` if
/// present, otherwise wraps one. No normal-form rewriting.
pub fn complement(f: &Formula) -> Formula {
    match f {
        Formula::Not(inner) => (**inner).clone(),
        other => Formula::Not(Box::new(other.clone())),
    }
}

/// Implication `a ⇒ b`, encoded as a disjunction with the complemented
/// antecedent first: `Or[¬a, b…]` (`b`'s own disjuncts are spliced).
pub fn implies(antecedent: Formula, consequent: Formula) -> Formula {
    let mut children = vec![complement(&antecedent)];
    match consequent {
        Formula::Or(cs) => children.extend(cs),
        other => children.push(other),
    }
    or_of(children)
}

impl Term {
    /// Object/variable names referenced by attribute accesses.
    pub fn obj_refs(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Int(_) | Term::Var(_) => {}
            Term::Attr(o, _) => {
                out.insert(o.clone());
            }
            Term::Add(ts) => ts.iter().for_each(|t| t.obj_refs(out)),
            Term::Mul(_, t) => t.obj_refs(out),
        }
    }

    /// Replace attribute accesses on `var` by accesses on `target`.
    pub fn subst_obj(&self, var: &str, target: &str) -> Term {
        match self {
            Term::Int(_) | Term::Var(_) => self.clone(),
            Term::Attr(o, a) if o == var => Term::Attr(target.to_string(), a.clone()),
            Term::Attr(_, _) => self.clone(),
            Term::Add(ts) => Term::Add(ts.iter().map(|t| t.subst_obj(var, target)).collect()),
            Term::Mul(c, t) => Term::Mul(*c, Box::new(t.subst_obj(var, target))),
        }
    }

    /// Free integer variables (`Term::Var`) occurring in the term.
    pub fn int_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Int(_) | Term::Attr(_, _) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(ts) => ts.iter().for_each(|t| t.int_vars(out)),
            Term::Mul(_, t) => t.int_vars(out),
        }
    }
}

impl Formula {
    /// True if the formula contains a quantifier anywhere.
    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) | Formula::Ext(_) => false,
            Formula::Cmp(_, _, _) => false,
            Formula::Not(f) => f.has_quantifier(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.has_quantifier()),
            Formula::Exists(_, _) | Formula::Forall(_, _) => true,
        }
    }

    /// Object names referenced but not bound by an enclosing quantifier.
    pub fn free_objects(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::True | Formula::False | Formula::BoolVar(_) => {}
                Formula::Ext(o) => {
                    if !bound.iter().any(|b| b == o) {
                        out.insert(o.clone());
                    }
                }
                Formula::Cmp(_, a, b) => {
                    let mut refs = BTreeSet::new();
                    a.obj_refs(&mut refs);
                    b.obj_refs(&mut refs);
                    for r in refs {
                        if !bound.iter().any(|b| *b == r) {
                            out.insert(r);
                        }
                    }
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(gs) | Formula::Or(gs) => {
                    gs.iter().for_each(|g| walk(g, bound, out))
                }
                Formula::Exists(b, body) | Formula::Forall(b, body) => {
                    bound.push(b.var.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// True if the formula is quantifier-free. Groundness with respect to
    /// a set of real objects additionally requires every object reference
    /// to denote a domain object, which callers check against their state.
    pub fn is_quantifier_free(&self) -> bool {
        !self.has_quantifier()
    }

    /// Substitute object `target` for the bound variable `var`, respecting
    /// shadowing: descent stops at a quantifier that re-binds `var`.
    pub fn subst_obj(&self, var: &str, target: &str) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) => self.clone(),
            Formula::Ext(o) if o == var => Formula::Ext(target.to_string()),
            Formula::Ext(_) => self.clone(),
            Formula::Cmp(op, a, b) => {
                Formula::Cmp(*op, a.subst_obj(var, target), b.subst_obj(var, target))
            }
            Formula::Not(f) => Formula::Not(Box::new(f.subst_obj(var, target))),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.subst_obj(var, target)).collect())
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst_obj(var, target)).collect()),
            Formula::Exists(b, body) => {
                if b.var == var {
                    self.clone()
                } else {
                    Formula::Exists(b.clone(), Box::new(body.subst_obj(var, target)))
                }
            }
            Formula::Forall(b, body) => {
                if b.var == var {
                    self.clone()
                } else {
                    Formula::Forall(b.clone(), Box::new(body.subst_obj(var, target)))
                }
            }
        }
    }

    /// All names occurring anywhere: object references, binder variables,
    /// and boolean variables. Used to keep fresh names globally fresh.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::BoolVar(v) => {
                out.insert(v.clone());
            }
            Formula::Ext(o) => {
                out.insert(o.clone());
            }
            Formula::Cmp(_, a, b) => {
                let mut refs = BTreeSet::new();
                a.obj_refs(&mut refs);
                b.obj_refs(&mut refs);
                a.int_vars(&mut refs);
                b.int_vars(&mut refs);
                out.extend(refs);
            }
            Formula::Not(f) => f.all_names(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.all_names(out)),
            Formula::Exists(b, body) | Formula::Forall(b, body) => {
                out.insert(b.var.clone());
                body.all_names(out);
            }
        }
    }

    /// Conjunct list view: the children of a top-level `And`, or the
    /// formula itself as a singleton.
    pub fn conjuncts(&self) -> Vec<Formula> {
        match self {
            Formula::And(fs) => fs.clone(),
            other => vec![other.clone()],
        }
    }

    /// Disjunct list view, dual of [`Formula::conjuncts`].
    pub fn disjuncts(&self) -> Vec<Formula> {
        match self {
            Formula::Or(fs) => fs.clone(),
            other => vec![other.clone()],
        }
    }
}
