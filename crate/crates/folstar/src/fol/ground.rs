//! Quantifier expansion over a fixed object universe.
//!
//! `∃o:C · φ` becomes the disjunction of `o′.ext ∧ φ[o ↦ o′]` over the
//! universe's objects `o′` of class `C`, and `∀o:C · φ` the conjunction of
//! the guarded implications — exactly the semantics `evaluate` gives
//! quantifiers, so grounding then evaluating agrees with evaluating
//! directly.

use thiserror::Error;

use super::syntax::{and_of, implies, or_of, Formula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    /// Substituting `object` into the body would be captured by an inner
    /// quantifier binding the same name. Object names and binder
    /// variables normally live in disjoint namespaces; rather than
    /// alpha-rename silently, report the clash.
    #[error("object `{object}` is shadowed by a quantifier inside the body")]
    WouldCapture { object: String },
}

/// Expand every quantifier in `f` over `universe`, a list of
/// `(object, class)` pairs. A quantifier over a class with no objects
/// collapses to its unit (`false` for ∃, `true` for ∀).
pub fn ground(f: &Formula, universe: &[(String, String)]) -> Result<Formula, GroundError> {
    Ok(match f {
        Formula::True
        | Formula::False
        | Formula::BoolVar(_)
        | Formula::Ext(_)
        | Formula::Cmp(..) => f.clone(),
        Formula::Not(inner) => Formula::Not(Box::new(ground(inner, universe)?)),
        Formula::And(fs) => and_of(
            fs.iter()
                .map(|g| ground(g, universe))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Formula::Or(fs) => or_of(
            fs.iter()
                .map(|g| ground(g, universe))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Formula::Exists(binder, body) => {
            let mut disjuncts = Vec::new();
            for name in class_members(universe, &binder.class) {
                let inst = instantiate(body, &binder.var, name)?;
                disjuncts.push(and_of(vec![
                    Formula::Ext(name.to_string()),
                    ground(&inst, universe)?,
                ]));
            }
            or_of(disjuncts)
        }
        Formula::Forall(binder, body) => {
            let mut conjuncts = Vec::new();
            for name in class_members(universe, &binder.class) {
                let inst = instantiate(body, &binder.var, name)?;
                conjuncts.push(implies(
                    Formula::Ext(name.to_string()),
                    ground(&inst, universe)?,
                ));
            }
            and_of(conjuncts)
        }
    })
}

fn class_members<'a>(universe: &'a [(String, String)], class: &str) -> Vec<&'a str> {
    universe
        .iter()
        .filter(|(_, c)| c == class)
        .map(|(n, _)| n.as_str())
        .collect()
}

fn instantiate(body: &Formula, var: &str, object: &str) -> Result<Formula, GroundError> {
    if binds_name(body, object) {
        return Err(GroundError::WouldCapture {
            object: object.to_string(),
        });
    }
    Ok(body.subst_obj(var, object))
}

fn binds_name(f: &Formula, name: &str) -> bool {
    match f {
        Formula::True
        | Formula::False
        | Formula::BoolVar(_)
        | Formula::Ext(_)
        | Formula::Cmp(..) => false,
        Formula::Not(inner) => binds_name(inner, name),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|g| binds_name(g, name)),
        Formula::Exists(b, body) | Formula::Forall(b, body) => {
            b.var == name || binds_name(body, name)
        }
    }
}
