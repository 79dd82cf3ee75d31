//! Evaluation of formulas against finite candidate solutions.
//!
//! A solution lists concrete objects (each with a class, an existence
//! flag, and integer attribute values) plus values for any free boolean
//! or integer variables. Quantifiers range over the *existing* objects of
//! their class, matching the guarded expansion used by grounding.

use std::collections::BTreeMap;

use thiserror::Error;

use super::syntax::{CmpOp, Formula, Term};

/// One concrete object in a candidate solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainObject {
    pub name: String,
    pub class: String,
    pub ext: bool,
    pub attrs: BTreeMap<String, i64>,
}

/// Values for free boolean and integer variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    pub bools: BTreeMap<String, bool>,
    pub ints: BTreeMap<String, i64>,
}

/// A finite candidate solution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    pub objects: Vec<DomainObject>,
    pub valuation: Valuation,
}

impl Solution {
    pub fn object(&self, name: &str) -> Option<&DomainObject> {
        self.objects.iter().find(|o| o.name == name)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("object `{0}` has no attribute `{1}`")]
    UnknownAttribute(String, String),
    #[error("unbound integer variable `{0}`")]
    UnboundIntVar(String),
    #[error("unbound boolean variable `{0}`")]
    UnboundBoolVar(String),
}

/// Evaluate a closed formula (bound variables aside) in `solution`.
pub fn evaluate(f: &Formula, solution: &Solution) -> Result<bool, EvalError> {
    let mut env = Vec::new();
    eval_fml(f, solution, &mut env)
}

/// Binder environment: innermost binding last, mapping a variable to the
/// index of the object it currently denotes.
type Env = Vec<(String, usize)>;

fn resolve<'a>(
    name: &str,
    solution: &'a Solution,
    env: &Env,
) -> Result<&'a DomainObject, EvalError> {
    if let Some((_, idx)) = env.iter().rev().find(|(v, _)| v == name) {
        return Ok(&solution.objects[*idx]);
    }
    solution
        .object(name)
        .ok_or_else(|| EvalError::UnknownObject(name.to_string()))
}

fn eval_fml(f: &Formula, solution: &Solution, env: &mut Env) -> Result<bool, EvalError> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::BoolVar(b) => solution
            .valuation
            .bools
            .get(b)
            .copied()
            .ok_or_else(|| EvalError::UnboundBoolVar(b.clone())),
        Formula::Ext(o) => Ok(resolve(o, solution, env)?.ext),
        Formula::Cmp(op, a, b) => {
            let a = eval_term(a, solution, env)?;
            let b = eval_term(b, solution, env)?;
            Ok(match op {
                CmpOp::Eq => a == b,
                CmpOp::Gt => a > b,
            })
        }
        Formula::Not(inner) => Ok(!eval_fml(inner, solution, env)?),
        Formula::And(fs) => {
            for g in fs {
                if !eval_fml(g, solution, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_fml(g, solution, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Exists(binder, body) => {
            for idx in 0..solution.objects.len() {
                let o = &solution.objects[idx];
                if o.class != binder.class || !o.ext {
                    continue;
                }
                env.push((binder.var.clone(), idx));
                let hit = eval_fml(body, solution, env)?;
                env.pop();
                if hit {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Forall(binder, body) => {
            for idx in 0..solution.objects.len() {
                let o = &solution.objects[idx];
                if o.class != binder.class || !o.ext {
                    continue;
                }
                env.push((binder.var.clone(), idx));
                let holds = eval_fml(body, solution, env)?;
                env.pop();
                if !holds {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn eval_term(t: &Term, solution: &Solution, env: &Env) -> Result<i64, EvalError> {
    match t {
        Term::Int(k) => Ok(*k),
        Term::Var(v) => solution
            .valuation
            .ints
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::UnboundIntVar(v.clone())),
        Term::Attr(o, x) => {
            let obj = resolve(o, solution, env)?;
            obj.attrs
                .get(x)
                .copied()
                .ok_or_else(|| EvalError::UnknownAttribute(o.clone(), x.clone()))
        }
        Term::Add(ts) => {
            let mut sum = 0i64;
            for t in ts {
                sum += eval_term(t, solution, env)?;
            }
            Ok(sum)
        }
        Term::Mul(c, t) => Ok(c * eval_term(t, solution, env)?),
    }
}
