//! S-expression reader for problems, formulas, and terms.
//!
//! Comparison sugar (`>=`, `<`, `<=`), implication (`=>`), and
//! subtraction/unary minus desugar here, so the rest of the engine only
//! pattern-matches the core grammar (`=`, `>`, `not`, `and`, `or`,
//! quantifiers; sums and scalar multiples).


use thiserror::Error;

use super::syntax::{and_of, implies, or_of, Binder, CmpOp, Formula, Problem, Signature, Term};

/// Parse failure, with a byte offset into the source text.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {offset}: {msg}")]
pub struct ParseError {
    pub offset: usize,
    pub msg: String,
}

fn err<T>(offset: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        msg: msg.into(),
    })
}

// ---------------------------------------------------------------------
// Tokenizer and generic s-expression reader
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Sym(usize, String),
    Int(usize, i64),
    List(usize, Vec<Sexp>),
}

impl Sexp {
    fn offset(&self) -> usize {
        match self {
            Sexp::Sym(o, _) | Sexp::Int(o, _) | Sexp::List(o, _) => *o,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, String)>, ParseError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == ';' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if c == '(' || c == ')' {
            toks.push((i, c.to_string()));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() {
                let d = bytes[i] as char;
                if d.is_whitespace() || d == '(' || d == ')' || d == ';' {
                    break;
                }
                i += 1;
            }
            toks.push((start, text[start..i].to_string()));
        }
    }
    Ok(toks)
}

fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let toks = tokenize(text)?;
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < toks.len() {
        let (sexp, next) = read_one(&toks, pos)?;
        out.push(sexp);
        pos = next;
    }
    Ok(out)
}

fn read_one(toks: &[(usize, String)], pos: usize) -> Result<(Sexp, usize), ParseError> {
    let (off, tok) = match toks.get(pos) {
        Some(t) => t,
        None => return err(usize::MAX, "unexpected end of input"),
    };
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            let mut p = pos + 1;
            loop {
                match toks.get(p) {
                    None => return err(*off, "unclosed parenthesis"),
                    Some((_, t)) if t == ")" => return Ok((Sexp::List(*off, items), p + 1)),
                    Some(_) => {
                        let (item, next) = read_one(toks, p)?;
                        items.push(item);
                        p = next;
                    }
                }
            }
        }
        ")" => err(*off, "unexpected ')'"),
        s => {
            if let Ok(k) = s.parse::<i64>() {
                Ok((Sexp::Int(*off, k), pos + 1))
            } else {
                Ok((Sexp::Sym(*off, s.to_string()), pos + 1))
            }
        }
    }
}

// ---------------------------------------------------------------------
// Formula conversion
// ---------------------------------------------------------------------

struct Ctx<'a> {
    /// When present, object references and attributes are validated
    /// against this signature; when absent, parsing is syntax-only.
    sig: Option<&'a Signature>,
    /// Innermost-last stack of quantifier binders.
    bound: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn class_of_ref(&self, name: &str) -> Option<String> {
        if let Some((_, class)) = self.bound.iter().rev().find(|(v, _)| v == name) {
            return Some(class.clone());
        }
        self.sig
            .and_then(|s| s.object_class(name).map(|c| c.to_string()))
    }

    fn check_obj_ref(&self, off: usize, name: &str) -> Result<Option<String>, ParseError> {
        match self.class_of_ref(name) {
            Some(c) => Ok(Some(c)),
            None if self.sig.is_some() => err(
                off,
                format!("unknown object or variable `{name}`"),
            ),
            None => Ok(None),
        }
    }
}

fn fml(sexp: &Sexp, ctx: &mut Ctx) -> Result<Formula, ParseError> {
    match sexp {
        Sexp::Int(off, _) => err(*off, "expected a formula, found an integer"),
        Sexp::Sym(off, s) => match s.as_str() {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            name if ctx.sig.is_none() => Ok(Formula::BoolVar(name.to_string())),
            name => err(*off, format!("unknown formula symbol `{name}`")),
        },
        Sexp::List(off, items) => {
            let head = match items.first() {
                Some(Sexp::Sym(_, h)) => h.as_str(),
                _ => return err(*off, "expected an operator symbol"),
            };
            let args = &items[1..];
            match head {
                "ext" => {
                    let name = sym_arg(args, 0, *off, "ext")?;
                    ctx.check_obj_ref(*off, &name)?;
                    arity(args, 1, *off, "ext")?;
                    Ok(Formula::Ext(name))
                }
                "=" | ">" | ">=" | "<" | "<=" => {
                    arity(args, 2, *off, head)?;
                    let a = term(&args[0], ctx)?;
                    let b = term(&args[1], ctx)?;
                    Ok(match head {
                        "=" => Formula::Cmp(CmpOp::Eq, a, b),
                        ">" => Formula::Cmp(CmpOp::Gt, a, b),
                        "<" => Formula::Cmp(CmpOp::Gt, b, a),
                        ">=" => Formula::Not(Box::new(Formula::Cmp(CmpOp::Gt, b, a))),
                        _ => Formula::Not(Box::new(Formula::Cmp(CmpOp::Gt, a, b))),
                    })
                }
                "not" => {
                    arity(args, 1, *off, "not")?;
                    Ok(Formula::Not(Box::new(fml(&args[0], ctx)?)))
                }
                "and" | "or" => {
                    if args.len() < 2 {
                        return err(*off, format!("`{head}` takes at least two operands"));
                    }
                    let fs = args
                        .iter()
                        .map(|a| fml(a, ctx))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if head == "and" { and_of(fs) } else { or_of(fs) })
                }
                "=>" => {
                    arity(args, 2, *off, "=>")?;
                    let a = fml(&args[0], ctx)?;
                    let b = fml(&args[1], ctx)?;
                    Ok(implies(a, b))
                }
                "exists" | "forall" => {
                    arity(args, 2, *off, head)?;
                    let binder = binder(&args[0], ctx)?;
                    ctx.bound.push((binder.var.clone(), binder.class.clone()));
                    let body = fml(&args[1], ctx);
                    ctx.bound.pop();
                    let body = Box::new(body?);
                    Ok(if head == "exists" {
                        Formula::Exists(binder, body)
                    } else {
                        Formula::Forall(binder, body)
                    })
                }
                other => err(*off, format!("unknown formula operator `{other}`")),
            }
        }
    }
}

fn binder(sexp: &Sexp, ctx: &Ctx) -> Result<Binder, ParseError> {
    let off = sexp.offset();
    let pairs = match sexp {
        Sexp::List(_, items) => items,
        _ => return err(off, "expected a binder list `((var Class))`"),
    };
    if pairs.len() != 1 {
        return err(off, "quantifiers bind exactly one variable");
    }
    let (var, class) = match &pairs[0] {
        Sexp::List(_, vc) if vc.len() == 2 => match (&vc[0], &vc[1]) {
            (Sexp::Sym(_, v), Sexp::Sym(_, c)) => (v.clone(), c.clone()),
            _ => return err(off, "binder must be `(var Class)`"),
        },
        _ => return err(off, "binder must be `(var Class)`"),
    };
    if let Some(sig) = ctx.sig {
        if !sig.classes.contains_key(&class) {
            return err(
                off,
                format!("quantifier ranges over `{class}`, which is not a declared class"),
            );
        }
    }
    Ok(Binder { var, class })
}

fn term(sexp: &Sexp, ctx: &mut Ctx) -> Result<Term, ParseError> {
    match sexp {
        Sexp::Int(_, k) => Ok(Term::Int(*k)),
        Sexp::Sym(off, s) => {
            if ctx.sig.is_some() {
                err(*off, format!("bare symbol `{s}` is not a term"))
            } else {
                Ok(Term::Var(s.clone()))
            }
        }
        Sexp::List(off, items) => {
            let head = match items.first() {
                Some(Sexp::Sym(_, h)) => h.as_str(),
                _ => return err(*off, "expected a term operator"),
            };
            let args = &items[1..];
            match head {
                "attr" => {
                    arity(args, 2, *off, "attr")?;
                    let obj = sym_arg(args, 0, *off, "attr")?;
                    let attr = sym_arg(args, 1, *off, "attr")?;
                    let class = ctx.check_obj_ref(*off, &obj)?;
                    if let (Some(class), Some(sig)) = (class, ctx.sig) {
                        let attrs = sig.attrs(&class).unwrap_or(&[]);
                        if !attrs.iter().any(|a| *a == attr) {
                            return err(
                                *off,
                                format!("class `{class}` has no attribute `{attr}`"),
                            );
                        }
                    }
                    Ok(Term::Attr(obj, attr))
                }
                "+" => {
                    if args.len() < 2 {
                        return err(*off, "`+` takes at least two operands");
                    }
                    let mut ts = Vec::new();
                    for a in args {
                        match term(a, ctx)? {
                            Term::Add(inner) => ts.extend(inner),
                            t => ts.push(t),
                        }
                    }
                    Ok(Term::Add(ts))
                }
                "*" => {
                    arity(args, 2, *off, "*")?;
                    let c = match &args[0] {
                        Sexp::Int(_, k) => *k,
                        other => {
                            return err(other.offset(), "`*` needs an integer coefficient first")
                        }
                    };
                    Ok(Term::Mul(c, Box::new(term(&args[1], ctx)?)))
                }
                "-" => match args.len() {
                    1 => Ok(Term::Mul(-1, Box::new(term(&args[0], ctx)?))),
                    2 => {
                        let a = term(&args[0], ctx)?;
                        let b = term(&args[1], ctx)?;
                        let neg = Term::Mul(-1, Box::new(b));
                        Ok(match a {
                            Term::Add(mut ts) => {
                                ts.push(neg);
                                Term::Add(ts)
                            }
                            t => Term::Add(vec![t, neg]),
                        })
                    }
                    _ => err(*off, "`-` takes one or two operands"),
                },
                other => err(*off, format!("unknown term operator `{other}`")),
            }
        }
    }
}

fn arity(args: &[Sexp], n: usize, off: usize, head: &str) -> Result<(), ParseError> {
    if args.len() != n {
        err(off, format!("`{head}` takes {n} operand(s), got {}", args.len()))
    } else {
        Ok(())
    }
}

fn sym_arg(args: &[Sexp], idx: usize, off: usize, head: &str) -> Result<String, ParseError> {
    match args.get(idx) {
        Some(Sexp::Sym(_, s)) => Ok(s.clone()),
        _ => err(off, format!("`{head}` expects a symbol at position {idx}")),
    }
}

// ---------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------

/// Parse a full problem file: `(class …)`, `(object …)`, `(assert …)`
/// forms in any interleaving (declarations must precede use). Every
/// declared free object contributes a trailing `(ext o)` assertion, so
/// the loaded assertion set states that declared objects exist.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let forms = read_all(text)?;
    let mut sig = Signature::default();
    let mut assertions = Vec::new();
    for form in &forms {
        let (off, items) = match form {
            Sexp::List(off, items) => (*off, items),
            other => {
                return err(
                    other.offset(),
                    "top-level forms must be (class …), (object …), or (assert …)",
                )
            }
        };
        let head = match items.first() {
            Some(Sexp::Sym(_, h)) => h.as_str(),
            _ => return err(off, "expected a top-level form"),
        };
        let args = &items[1..];
        match head {
            "class" => {
                let name = sym_arg(args, 0, off, "class")?;
                if sig.classes.contains_key(&name) {
                    return err(off, format!("class `{name}` declared twice"));
                }
                let mut attrs: Vec<String> = Vec::new();
                for decl in &args[1..] {
                    match decl {
                        Sexp::List(doff, pair) if pair.len() == 2 => {
                            match (&pair[0], &pair[1]) {
                                (Sexp::Sym(_, a), Sexp::Sym(_, ty)) if ty == "Int" => {
                                    if attrs.iter().any(|x| x == a) {
                                        return err(
                                            *doff,
                                            format!("attribute `{a}` declared twice"),
                                        );
                                    }
                                    attrs.push(a.clone());
                                }
                                _ => return err(*doff, "attributes must be `(name Int)`"),
                            }
                        }
                        other => return err(other.offset(), "attributes must be `(name Int)`"),
                    }
                }
                sig.classes.insert(name, attrs);
            }
            "object" => {
                arity(args, 2, off, "object")?;
                let name = sym_arg(args, 0, off, "object")?;
                let class = sym_arg(args, 1, off, "object")?;
                if !sig.classes.contains_key(&class) {
                    return err(off, format!("object of undeclared class `{class}`"));
                }
                if sig.objects.iter().any(|(n, _)| *n == name) {
                    return err(off, format!("object `{name}` declared twice"));
                }
                sig.objects.push((name, class));
            }
            "assert" => {
                arity(args, 1, off, "assert")?;
                let mut ctx = Ctx {
                    sig: Some(&sig),
                    bound: Vec::new(),
                };
                assertions.push(fml(&args[0], &mut ctx)?);
            }
            other => return err(off, format!("unknown top-level form `{other}`")),
        }
    }
    for (name, _) in &sig.objects {
        assertions.push(Formula::Ext(name.clone()));
    }
    Ok(Problem {
        signature: sig,
        assertions,
    })
}

/// Parse a single formula, validating object references and attribute
/// names against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let forms = read_all(text)?;
    single(&forms, |sexp| {
        let mut ctx = Ctx {
            sig: Some(sig),
            bound: Vec::new(),
        };
        fml(sexp, &mut ctx)
    })
}

/// Parse a single formula without signature validation: unknown symbols in
/// formula position become boolean variables, in term position integer
/// variables. Used for proof files, whose objects are declared by the
/// proof itself and validated during replay.
pub fn parse_raw_formula(text: &str) -> Result<Formula, ParseError> {
    let forms = read_all(text)?;
    single(&forms, |sexp| {
        let mut ctx = Ctx {
            sig: None,
            bound: Vec::new(),
        };
        fml(sexp, &mut ctx)
    })
}

fn single<T>(
    forms: &[Sexp],
    parse: impl FnOnce(&Sexp) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    match forms {
        [one] => parse(one),
        [] => err(0, "empty input"),
        [_, second, ..] => err(second.offset(), "expected exactly one form"),
    }
}
