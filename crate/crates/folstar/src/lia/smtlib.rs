//! SMT-LIB 2 export of ground formula sets (logic QF_LIA).
//!
//! Attribute unknowns become piped symbols `|o.x|`, existence flags
//! become Bool constants `|o.ext|`, and free variables keep their names.
//! The script asserts each formula and ends with `(check-sat)`, ready for
//! an external solver to cross-check a verdict.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::fol::{CmpOp, Formula, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmtlibError {
    #[error("formula {0} is not ground; only quantifier-free formulas can be exported")]
    NotGround(usize),
    #[error("symbol `{0}` cannot be written as an SMT-LIB symbol")]
    BadSymbol(String),
}

/// Render `fs` as a complete SMT-LIB 2 script.
pub fn export_smtlib(fs: &[Formula]) -> Result<String, SmtlibError> {
    let mut ints = BTreeSet::new();
    let mut bools = BTreeSet::new();
    for (i, f) in fs.iter().enumerate() {
        if f.has_quantifier() {
            return Err(SmtlibError::NotGround(i));
        }
        collect(f, &mut ints, &mut bools);
    }
    let mut out = String::new();
    out.push_str("(set-logic QF_LIA)\n");
    for b in &bools {
        writeln!(out, "(declare-const {} Bool)", symbol(b)?).unwrap();
    }
    for v in &ints {
        writeln!(out, "(declare-const {} Int)", symbol(v)?).unwrap();
    }
    for f in fs {
        writeln!(out, "(assert {})", fml(f)?).unwrap();
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}

fn collect(f: &Formula, ints: &mut BTreeSet<String>, bools: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::BoolVar(b) => {
            bools.insert(b.clone());
        }
        Formula::Ext(o) => {
            bools.insert(format!("{o}.ext"));
        }
        Formula::Cmp(_, a, b) => {
            collect_term(a, ints);
            collect_term(b, ints);
        }
        Formula::Not(g) => collect(g, ints, bools),
        Formula::And(gs) | Formula::Or(gs) => {
            for g in gs {
                collect(g, ints, bools);
            }
        }
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("checked ground"),
    }
}

fn collect_term(t: &Term, ints: &mut BTreeSet<String>) {
    match t {
        Term::Int(_) => {}
        Term::Var(v) => {
            ints.insert(v.clone());
        }
        Term::Attr(o, x) => {
            ints.insert(format!("{o}.{x}"));
        }
        Term::Add(ts) => {
            for t in ts {
                collect_term(t, ints);
            }
        }
        Term::Mul(_, t) => collect_term(t, ints),
    }
}

fn fml(f: &Formula) -> Result<String, SmtlibError> {
    Ok(match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::BoolVar(b) => symbol(b)?,
        Formula::Ext(o) => symbol(&format!("{o}.ext"))?,
        Formula::Cmp(op, a, b) => {
            let op = match op {
                CmpOp::Eq => "=",
                CmpOp::Gt => ">",
            };
            format!("({op} {} {})", term(a)?, term(b)?)
        }
        Formula::Not(g) => format!("(not {})", fml(g)?),
        Formula::And(gs) | Formula::Or(gs) => {
            let head = if matches!(f, Formula::And(_)) { "and" } else { "or" };
            let parts = gs.iter().map(fml).collect::<Result<Vec<_>, _>>()?;
            format!("({head} {})", parts.join(" "))
        }
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("checked ground"),
    })
}

fn term(t: &Term) -> Result<String, SmtlibError> {
    Ok(match t {
        Term::Int(k) => int(*k),
        Term::Var(v) => symbol(v)?,
        Term::Attr(o, x) => symbol(&format!("{o}.{x}"))?,
        Term::Add(ts) => {
            let parts = ts.iter().map(term).collect::<Result<Vec<_>, _>>()?;
            format!("(+ {})", parts.join(" "))
        }
        Term::Mul(c, t) => format!("(* {} {})", int(*c), term(t)?),
    })
}

/// SMT-LIB numerals are unsigned; negative constants use unary minus.
fn int(k: i64) -> String {
    if k < 0 {
        format!("(- {})", k.unsigned_abs())
    } else {
        k.to_string()
    }
}

fn symbol(s: &str) -> Result<String, SmtlibError> {
    let simple = !s.is_empty()
        && !s.as_bytes()[0].is_ascii_digit()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>?/".contains(c));
    if simple {
        return Ok(s.to_string());
    }
    if s.contains('|') || s.contains('\\') {
        return Err(SmtlibError::BadSymbol(s.to_string()));
    }
    Ok(format!("|{s}|"))
}
