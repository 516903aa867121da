use std::fmt::{self, Write};

use super::term::Term;
use super::ty::Ty;

const BINDER: u8 = 0;
const SUM: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;

fn level(t: &Term) -> u8 {
    match t {
        Term::Abs(..) | Term::Let { .. } => BINDER,
        Term::Plus(..) => SUM,
        Term::App(..)
        | Term::Fix(_)
        | Term::Succ(..)
        | Term::Pred(..)
        | Term::Diff(_)
        | Term::Proj(..)
        | Term::Inj(..)
        | Term::Sum(..)
        | Term::Flip(..) => APP,
        Term::Var(_) | Term::Num(_) | Term::If { .. } | Term::Zero(_) => ATOM,
    }
}

fn ann(out: &mut String, t: &Ty) -> fmt::Result {
    match t {
        Ty::Arrow(..) => write!(out, ":({t})"),
        Ty::Ground(_) => write!(out, ":{t}"),
    }
}

fn go(out: &mut String, t: &Term, min: u8) -> fmt::Result {
    let paren = level(t) < min;
    if paren {
        out.push('(');
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Num(n) => write!(out, "{n}")?,
        Term::Abs(x, a, m) => {
            match a {
                Ty::Arrow(..) => write!(out, "\\{x}:({a}). ")?,
                Ty::Ground(_) => write!(out, "\\{x}:{a}. ")?,
            }
            go(out, m, BINDER)?;
        }
        Term::App(m, n) => {
            go(out, m, APP)?;
            out.push(' ');
            go(out, n, ATOM)?;
        }
        Term::Plus(m, n) => {
            go(out, m, SUM)?;
            out.push_str(" + ");
            go(out, n, APP)?;
        }
        Term::Fix(m) => prefix(out, "fix", m)?,
        Term::Diff(m) => prefix(out, "D", m)?,
        Term::Succ(d, m) => prefix(out, &format!("succ[{d}]"), m)?,
        Term::Pred(d, m) => prefix(out, &format!("pred[{d}]"), m)?,
        Term::Proj(i, d, m) => prefix(out, &format!("proj[{i},{d}]"), m)?,
        Term::Inj(i, d, m) => prefix(out, &format!("inj[{i},{d}]"), m)?,
        Term::Sum(d, m) => prefix(out, &format!("sum[{d}]"), m)?,
        Term::Flip(d, l, m) => prefix(out, &format!("flip[{d},{l}]"), m)?,
        Term::Zero(a) => {
            out.push_str("zero");
            ann(out, a)?;
        }
        Term::If {
            ann: a,
            depth,
            cond,
            then,
            els,
        } => {
            write!(out, "if[{depth}](")?;
            go(out, cond, BINDER)?;
            out.push_str(", ");
            go(out, then, BINDER)?;
            out.push_str(", ");
            go(out, els, BINDER)?;
            out.push(')');
            if let Some(a) = a {
                ann(out, a)?;
            }
        }
        Term::Let {
            ann: a,
            depth,
            var,
            bound,
            body,
        } => {
            write!(out, "let[{depth}]({var} = ")?;
            go(out, bound, BINDER)?;
            out.push(')');
            if let Some(a) = a {
                ann(out, a)?;
            }
            out.push(' ');
            go(out, body, BINDER)?;
        }
    }
    if paren {
        out.push(')');
    }
    Ok(())
}

fn prefix(out: &mut String, op: &str, m: &Term) -> fmt::Result {
    out.push_str(op);
    out.push(' ');
    go(out, m, ATOM)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        go(&mut s, self, BINDER)?;
        f.write_str(&s)
    }
}
