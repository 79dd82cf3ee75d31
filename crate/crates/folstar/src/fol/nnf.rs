//! Negation normal form: negations sit directly on atoms only.

use super::syntax::{and_of, or_of, Formula};

/// Is `f` in negation normal form? `not` may wrap only atoms
/// (comparisons, `ext`, boolean variables).
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::BoolVar(_) | Formula::Ext(_) | Formula::Cmp(..) => {
            true
        }
        Formula::Not(inner) => matches!(
            **inner,
            Formula::BoolVar(_) | Formula::Ext(_) | Formula::Cmp(..)
        ),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().all(is_nnf),
        Formula::Exists(_, body) | Formula::Forall(_, body) => is_nnf(body),
    }
}

/// One step of negation rewriting: `not` applied to a *compound* formula
/// is pushed through a single connective. Returns `None` when `f` is not
/// a negation or the negation already sits on an atom.
pub fn neg_one_level(f: &Formula) -> Option<Formula> {
    let inner = match f {
        Formula::Not(inner) => &**inner,
        _ => return None,
    };
    Some(match inner {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => (**g).clone(),
        Formula::And(fs) => or_of(fs.iter().map(negate).collect()),
        Formula::Or(fs) => and_of(fs.iter().map(negate).collect()),
        Formula::Exists(b, body) => Formula::Forall(b.clone(), Box::new(negate(body))),
        Formula::Forall(b, body) => Formula::Exists(b.clone(), Box::new(negate(body))),
        Formula::BoolVar(_) | Formula::Ext(_) | Formula::Cmp(..) => return None,
    })
}

fn negate(f: &Formula) -> Formula {
    Formula::Not(Box::new(f.clone()))
}

/// Full conversion to negation normal form.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::True
        | Formula::False
        | Formula::BoolVar(_)
        | Formula::Ext(_)
        | Formula::Cmp(..) => f.clone(),
        Formula::Not(inner) => neg_nnf(inner),
        Formula::And(fs) => and_of(fs.iter().map(to_nnf).collect()),
        Formula::Or(fs) => or_of(fs.iter().map(to_nnf).collect()),
        Formula::Exists(b, body) => Formula::Exists(b.clone(), Box::new(to_nnf(body))),
        Formula::Forall(b, body) => Formula::Forall(b.clone(), Box::new(to_nnf(body))),
    }
}

fn neg_nnf(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::BoolVar(_) | Formula::Ext(_) | Formula::Cmp(..) => negate(f),
        Formula::Not(inner) => to_nnf(inner),
        Formula::And(fs) => or_of(fs.iter().map(neg_nnf).collect()),
        Formula::Or(fs) => and_of(fs.iter().map(neg_nnf).collect()),
        Formula::Exists(b, body) => Formula::Forall(b.clone(), Box::new(neg_nnf(body))),
        Formula::Forall(b, body) => Formula::Exists(b.clone(), Box::new(neg_nnf(body))),
    }
}
