//! Canonical s-expression rendering. `parse_raw_formula(render(f)) == f`
//! for every AST the engine constructs.

use std::fmt::Write;

use super::syntax::{CmpOp, Formula, Term};

/// Render a formula as a canonical s-expression (single line, one space
/// between tokens).
pub fn render(f: &Formula) -> String {
    let mut s = String::new();
    fml(f, &mut s);
    s
}

fn fml(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::BoolVar(v) => out.push_str(v),
        Formula::Ext(o) => {
            out.push_str("(ext ");
            out.push_str(o);
            out.push(')');
        }
        Formula::Cmp(op, a, b) => {
            out.push_str(match op {
                CmpOp::Eq => "(= ",
                CmpOp::Gt => "(> ",
            });
            term(a, out);
            out.push(' ');
            term(b, out);
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            fml(g, out);
            out.push(')');
        }
        Formula::And(fs) => nary("and", fs, out),
        Formula::Or(fs) => nary("or", fs, out),
        Formula::Exists(b, body) => quant("exists", &b.var, &b.class, body, out),
        Formula::Forall(b, body) => quant("forall", &b.var, &b.class, body, out),
    }
}

fn nary(head: &str, fs: &[Formula], out: &mut String) {
    out.push('(');
    out.push_str(head);
    for f in fs {
        out.push(' ');
        fml(f, out);
    }
    out.push(')');
}

fn quant(head: &str, var: &str, class: &str, body: &Formula, out: &mut String) {
    let _ = write!(out, "({head} (({var} {class})) ");
    fml(body, out);
    out.push(')');
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Int(k) => {
            let _ = write!(out, "{k}");
        }
        Term::Var(v) => out.push_str(v),
        Term::Attr(o, a) => {
            let _ = write!(out, "(attr {o} {a})");
        }
        Term::Add(ts) => {
            out.push_str("(+");
            for t in ts {
                out.push(' ');
                term(t, out);
            }
            out.push(')');
        }
        Term::Mul(c, t) => {
            let _ = write!(out, "(* {c} ");
            term(t, out);
            out.push(')');
        }
    }
}
