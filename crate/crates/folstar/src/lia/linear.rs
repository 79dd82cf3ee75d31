//! Canonical linear forms for arithmetic atoms.
//!
//! A comparison `a ⋈ b` is normalized to `e ⋈ 0` where `e = a − b` is a
//! linear expression over named integer unknowns (object attributes
//! `o.x` and free variables). Coefficients are arbitrary-precision so
//! adversarial proof files cannot overflow the checker.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::fol::{CmpOp, Term};

/// `Σ coeffs[v]·v + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, BigInt>,
    pub constant: BigInt,
}

/// Key naming a term-level unknown: `o.x` for attributes, the bare name
/// for free integer variables.
pub fn attr_key(obj: &str, attr: &str) -> String {
    format!("{obj}.{attr}")
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: BigInt::zero(),
        }
    }

    pub fn from_term(t: &Term) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(t, &BigInt::from(1));
        e
    }

    fn add_term(&mut self, t: &Term, scale: &BigInt) {
        match t {
            Term::Int(k) => self.constant += scale * BigInt::from(*k),
            Term::Var(v) => self.add_coeff(v.clone(), scale.clone()),
            Term::Attr(o, x) => self.add_coeff(attr_key(o, x), scale.clone()),
            Term::Add(ts) => {
                for t in ts {
                    self.add_term(t, scale);
                }
            }
            Term::Mul(c, t) => self.add_term(t, &(scale * BigInt::from(*c))),
        }
    }

    fn add_coeff(&mut self, key: String, delta: BigInt) {
        let entry = self.coeffs.entry(key.clone()).or_insert_with(BigInt::zero);
        *entry += delta;
        // Keep the map free of zero entries so equality is canonical.
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_coeff(k.clone(), -v.clone());
        }
        out.constant -= &other.constant;
        out
    }

    pub fn negated(&self) -> LinExpr {
        LinExpr {
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            constant: -&self.constant,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Divide everything by the positive gcd of all coefficients and the
    /// constant. Safe for both `= 0` and `> 0` readings.
    fn normalized(mut self) -> Self {
        let mut g = self.constant.abs();
        for v in self.coeffs.values() {
            g = num_integer_gcd(&g, &v.abs());
        }
        if !g.is_zero() && g != BigInt::from(1) {
            for v in self.coeffs.values_mut() {
                *v /= &g;
            }
            self.constant /= &g;
        }
        self
    }
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = &a % &b;
        a = std::mem::replace(&mut b, r);
    }
    a.abs()
}

/// A canonical arithmetic atom `expr ⋈ 0` with `⋈ ∈ {=, >}`.
///
/// Canonicalization divides out the gcd and, for equalities, fixes the
/// sign of the leading coefficient, so syntactic variants of the same
/// comparison collapse to one atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinAtom {
    pub op: CmpOp,
    pub expr: LinExpr,
}

impl LinAtom {
    pub fn from_cmp(op: CmpOp, a: &Term, b: &Term) -> LinAtom {
        let expr = LinExpr::from_term(a).sub(&LinExpr::from_term(b)).normalized();
        let expr = match op {
            CmpOp::Eq => {
                let leading_negative = expr
                    .coeffs
                    .values()
                    .next()
                    .map_or_else(|| expr.constant.is_negative(), Signed::is_negative);
                if leading_negative {
                    expr.negated()
                } else {
                    expr
                }
            }
            CmpOp::Gt => expr,
        };
        LinAtom { op, expr }
    }

    /// Truth value when the atom has no unknowns.
    pub fn const_value(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        Some(match self.op {
            CmpOp::Eq => self.expr.constant.is_zero(),
            CmpOp::Gt => self.expr.constant.is_positive(),
        })
    }
}
