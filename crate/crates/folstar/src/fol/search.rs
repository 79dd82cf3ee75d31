//! Bounded brute-force model search.
//!
//! Enumerates candidate solutions up to a volume bound (number of
//! existing objects) and a value bound (attribute and variable magnitudes)
//! and returns the first one satisfying every formula. The enumeration
//! order is deterministic, so the witness is reproducible.
//!
//! Anonymous objects (those not declared by name) are only ever created
//! with `ext = true`: an undeclared object that does not exist cannot be
//! referenced by any formula and is skipped by quantifiers, so it can
//! never influence satisfaction.

use std::collections::BTreeSet;

use super::eval::{evaluate, DomainObject, EvalError, Solution, Valuation};
use super::syntax::{Formula, Signature};

/// Caps for the search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    /// Maximum number of existing objects in a candidate solution.
    pub max_volume: usize,
    /// Attribute values and free integer variables range over
    /// `[-value_bound, value_bound]`.
    pub value_bound: i64,
}

/// Number of existing objects in a solution.
pub fn solution_volume(sol: &Solution) -> usize {
    sol.objects.iter().filter(|o| o.ext).count()
}

/// Search for a solution of the conjunction of `fs` within `bounds`.
///
/// Returns the first satisfying candidate in enumeration order, `None`
/// when the bounded space holds no model, or an error if a formula
/// references an object missing from `sig`.
pub fn brute_force_sat(
    fs: &[Formula],
    sig: &Signature,
    bounds: &SearchBounds,
) -> Result<Option<Solution>, EvalError> {
    let mut bools = BTreeSet::new();
    let mut int_vars = BTreeSet::new();
    for f in fs {
        for o in f.free_objects() {
            if sig.object_class(&o).is_none() {
                return Err(EvalError::UnknownObject(o));
            }
        }
        collect_vars(f, &mut bools, &mut int_vars);
    }

    let values: Vec<i64> = (-bounds.value_bound..=bounds.value_bound).collect();
    let classes: Vec<(&String, &Vec<String>)> = sig.classes.iter().collect();
    let bools: Vec<&String> = bools.iter().collect();
    let int_vars: Vec<&String> = int_vars.iter().collect();

    // Quantifier-free formulas cannot observe anonymous objects.
    let max_anon = if fs.iter().any(|f| f.has_quantifier()) {
        bounds.max_volume
    } else {
        0
    };

    for anon_total in 0..=max_anon {
        for counts in compositions(anon_total, classes.len()) {
            let mut anon_choices: Vec<Vec<Vec<Vec<i64>>>> = Vec::new();
            for (i, (_, attrs)) in classes.iter().enumerate() {
                anon_choices.push(multisets(counts[i], attrs.len(), &values));
            }
            let mut pick = vec![0usize; classes.len()];
            loop {
                let mut anon_objs = Vec::new();
                for (i, (class, attrs)) in classes.iter().enumerate() {
                    for (j, vector) in anon_choices[i][pick[i]].iter().enumerate() {
                        anon_objs.push(DomainObject {
                            name: format!("_{class}{j}"),
                            class: (*class).clone(),
                            ext: true,
                            attrs: attrs
                                .iter()
                                .cloned()
                                .zip(vector.iter().copied())
                                .collect(),
                        });
                    }
                }
                if let Some(sol) =
                    search_declared(fs, sig, &values, &anon_objs, anon_total, bounds, &bools, &int_vars)?
                {
                    return Ok(Some(sol));
                }
                if !advance(&mut pick, &anon_choices.iter().map(Vec::len).collect::<Vec<_>>()) {
                    break;
                }
            }
        }
    }
    Ok(None)
}

/// Enumerate declared-object configurations (existence flags and attribute
/// values) plus variable valuations on top of a fixed anonymous part.
#[allow(clippy::too_many_arguments)]
fn search_declared(
    fs: &[Formula],
    sig: &Signature,
    values: &[i64],
    anon_objs: &[DomainObject],
    anon_total: usize,
    bounds: &SearchBounds,
    bools: &[&String],
    int_vars: &[&String],
) -> Result<Option<Solution>, EvalError> {
    let declared = &sig.objects;
    for ext_mask in 0u64..(1u64 << declared.len()) {
        let existing = anon_total + ext_mask.count_ones() as usize;
        if existing > bounds.max_volume {
            continue;
        }
        // One slot per declared-object attribute, flattened.
        let slots: Vec<usize> = declared
            .iter()
            .map(|(_, c)| sig.attrs(c).map_or(0, <[String]>::len))
            .collect();
        let total_slots: usize = slots.iter().sum();
        let mut attr_idx = vec![0usize; total_slots];
        loop {
            let mut objects = Vec::new();
            let mut cursor = 0;
            for (i, (name, class)) in declared.iter().enumerate() {
                let attrs = sig.attrs(class).unwrap_or(&[]);
                let mut map = std::collections::BTreeMap::new();
                for a in attrs {
                    map.insert(a.clone(), values[attr_idx[cursor]]);
                    cursor += 1;
                }
                objects.push(DomainObject {
                    name: name.clone(),
                    class: class.clone(),
                    ext: (ext_mask >> i) & 1 == 1,
                    attrs: map,
                });
            }
            objects.extend(anon_objs.iter().cloned());

            for bool_mask in 0u64..(1u64 << bools.len()) {
                let mut int_idx = vec![0usize; int_vars.len()];
                loop {
                    let valuation = Valuation {
                        bools: bools
                            .iter()
                            .enumerate()
                            .map(|(i, b)| ((*b).clone(), (bool_mask >> i) & 1 == 1))
                            .collect(),
                        ints: int_vars
                            .iter()
                            .zip(&int_idx)
                            .map(|(v, i)| ((*v).clone(), values[*i]))
                            .collect(),
                    };
                    let sol = Solution {
                        objects: objects.clone(),
                        valuation,
                    };
                    let mut ok = true;
                    for f in fs {
                        if !evaluate(f, &sol)? {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        return Ok(Some(sol));
                    }
                    if !advance_radix(&mut int_idx, values.len()) {
                        break;
                    }
                }
            }
            if !advance_radix(&mut attr_idx, values.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn collect_vars(f: &Formula, bools: &mut BTreeSet<String>, ints: &mut BTreeSet<String>) {
    match f {
        Formula::BoolVar(b) => {
            bools.insert(b.clone());
        }
        Formula::Cmp(_, a, b) => {
            a.int_vars(ints);
            b.int_vars(ints);
        }
        Formula::Not(g) => collect_vars(g, bools, ints),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                collect_vars(g, bools, ints);
            }
        }
        Formula::Exists(_, body) | Formula::Forall(_, body) => collect_vars(body, bools, ints),
        Formula::True | Formula::False | Formula::Ext(_) => {}
    }
}

/// All ways to split `total` into `parts` non-negative summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Multisets of size `count` of attribute vectors (arity `k` over
/// `values`), represented as lexicographically non-decreasing sequences.
fn multisets(count: usize, k: usize, values: &[i64]) -> Vec<Vec<Vec<i64>>> {
    let mut vectors = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        vectors.push(idx.iter().map(|i| values[*i]).collect::<Vec<i64>>());
        if !advance_radix(&mut idx, values.len()) {
            break;
        }
    }
    let mut out = Vec::new();
    let mut choice = Vec::new();
    pick_multisets(&vectors, count, 0, &mut choice, &mut out);
    out
}

fn pick_multisets(
    vectors: &[Vec<i64>],
    remaining: usize,
    from: usize,
    choice: &mut Vec<Vec<i64>>,
    out: &mut Vec<Vec<Vec<i64>>>,
) {
    if remaining == 0 {
        out.push(choice.clone());
        return;
    }
    for i in from..vectors.len() {
        choice.push(vectors[i].clone());
        pick_multisets(vectors, remaining - 1, i, choice, out);
        choice.pop();
    }
}

/// Mixed-radix increment; `false` once the counter wraps to all zeros.
fn advance_radix(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Increment `pick` where each position has its own radix.
fn advance(pick: &mut [usize], radices: &[usize]) -> bool {
    for (d, r) in pick.iter_mut().zip(radices) {
        *d += 1;
        if *d < *r {
            return true;
        }
        *d = 0;
    }
    false
}
