//! Syntax-directed simple typing.

use std::rc::Rc;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Multiset, Name, Path, Term, Ty};

/// Typing context; later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TyCtx(Vec<(Name, Ty)>);

impl TyCtx {
    pub fn new() -> TyCtx {
        TyCtx(Vec::new())
    }

    pub fn with(mut self, x: &str, a: Ty) -> TyCtx {
        self.0.push((x.to_string(), a));
        self
    }

    pub fn push(&mut self, x: &str, a: Ty) {
        self.0.push((x.to_string(), a));
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    pub fn lookup(&self, x: &str) -> Option<&Ty> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, a)| a)
    }

    pub fn entries(&self) -> &[(Name, Ty)] {
        &self.0
    }
}

impl fmt::Display for TyCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}:{a}")?;
        }
        Ok(())
    }
}

/// Renders a path as dotted child indices, `ε` for the root.
pub fn show_path(p: &[usize]) -> String {
    if p.is_empty() {
        "ε".to_string()
    } else {
        p.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable {name} at {}", show_path(.path))]
    UnboundVariable { name: Name, path: Path },
    #[error("type mismatch at {}: expected {expected}, found {found}", show_path(.path))]
    TypeMismatch { expected: Ty, found: Ty, path: Path },
    #[error("expected a function at {}, found {found}", show_path(.path))]
    NotAFunction { found: Ty, path: Path },
    #[error("depth too shallow at {}: need at least {needed} D, found {found}", show_path(.path))]
    DepthTooShallow { needed: usize, found: Ty, path: Path },
    #[error("sum at {} outside the simplicit fragment", show_path(.path))]
    NotSimplicit { path: Path },
}

/// Infers the type of `m` under `ctx`.
pub fn infer(ctx: &TyCtx, m: &Term) -> Result<Ty, TypeError> {
    let mut ctx = ctx.clone();
    elab(&mut ctx, m, &mut Vec::new(), false).map(|(_, a)| a)
}

/// Like [`infer`] but also types `M0 + M1` when both summands share a
/// type. Used for bookkeeping on reducts, which may contain sums.
pub fn infer_with_sums(ctx: &TyCtx, m: &Term) -> Result<Ty, TypeError> {
    let mut ctx = ctx.clone();
    elab(&mut ctx, m, &mut Vec::new(), true).map(|(_, a)| a)
}

/// Type-checks `m` and fills in every missing `If`/`Let` decoration.
pub fn annotate(ctx: &TyCtx, m: &Term) -> Result<(Term, Ty), TypeError> {
    let mut ctx = ctx.clone();
    elab(&mut ctx, m, &mut Vec::new(), false)
}

fn mismatch(expected: Ty, found: Ty, path: &Path) -> TypeError {
    TypeError::TypeMismatch {
        expected,
        found,
        path: path.clone(),
    }
}

fn need_depth(a: &Ty, needed: usize, path: &Path) -> Result<(), TypeError> {
    if a.depth() >= needed {
        Ok(())
    } else {
        Err(TypeError::DepthTooShallow {
            needed,
            found: a.clone(),
            path: path.clone(),
        })
    }
}

fn child(
    ctx: &mut TyCtx,
    m: &Term,
    path: &mut Path,
    i: usize,
    sums: bool,
) -> Result<(Term, Ty), TypeError> {
    path.push(i);
    let r = elab(ctx, m, path, sums);
    path.pop();
    r
}

fn elab(ctx: &mut TyCtx, m: &Term, path: &mut Path, sums: bool) -> Result<(Term, Ty), TypeError> {
    use Term::*;
    match m {
        Var(x) => match ctx.lookup(x) {
            Some(a) => Ok((m.clone(), a.clone())),
            None => Err(TypeError::UnboundVariable {
                name: x.clone(),
                path: path.clone(),
            }),
        },
        Num(_) => Ok((m.clone(), Ty::nat())),
        Zero(a) => Ok((m.clone(), a.clone())),
        Plus(p, q) if sums => {
            let (p, tp) = child(ctx, p, path, 0, sums)?;
            let (q, tq) = child(ctx, q, path, 1, sums)?;
            if tp != tq {
                path.push(1);
                let e = mismatch(tp, tq, path);
                path.pop();
                return Err(e);
            }
            Ok((Plus(Rc::new(p), Rc::new(q)), tp))
        }
        Plus(..) => Err(TypeError::NotSimplicit { path: path.clone() }),
        Abs(x, a, body) => {
            ctx.push(x, a.clone());
            let r = child(ctx, body, path, 0, sums);
            ctx.pop();
            let (body, b) = r?;
            Ok((Abs(x.clone(), a.clone(), Rc::new(body)), Ty::arrow(a.clone(), b)))
        }
        App(f, n) => {
            let (f, tf) = child(ctx, f, path, 0, sums)?;
            let (n, tn) = child(ctx, n, path, 1, sums)?;
            match tf {
                Ty::Arrow(a, b) if *a == tn => Ok((App(Rc::new(f), Rc::new(n)), *b)),
                Ty::Arrow(a, _) => {
                    path.push(1);
                    let e = mismatch(*a, tn, path);
                    path.pop();
                    Err(e)
                }
                other => Err(TypeError::NotAFunction {
                    found: other,
                    path: path.clone(),
                }),
            }
        }
        Fix(f) => {
            let (f, tf) = child(ctx, f, path, 0, sums)?;
            match tf {
                Ty::Arrow(a, b) if a == b => Ok((Fix(Rc::new(f)), *a)),
                Ty::Arrow(a, b) => Err(mismatch(Ty::Arrow(a.clone(), a.clone()), Ty::Arrow(a, b), path)),
                other => Err(TypeError::NotAFunction {
                    found: other,
                    path: path.clone(),
                }),
            }
        }
        Succ(d, n) | Pred(d, n) => {
            let (n, tn) = child(ctx, n, path, 0, sums)?;
            if tn != Ty::Ground(*d) {
                path.push(0);
                let e = mismatch(Ty::Ground(*d), tn, path);
                path.pop();
                return Err(e);
            }
            let out = match m {
                Succ(..) => Succ(*d, Rc::new(n)),
                _ => Pred(*d, Rc::new(n)),
            };
            Ok((out, Ty::Ground(*d)))
        }
        If {
            ann,
            depth,
            cond,
            then,
            els,
        } => {
            let (c, tc) = child(ctx, cond, path, 0, sums)?;
            if tc != Ty::Ground(*depth) {
                path.push(0);
                let e = mismatch(Ty::Ground(*depth), tc, path);
                path.pop();
                return Err(e);
            }
            let (p, tp) = child(ctx, then, path, 1, sums)?;
            let (q, tq) = child(ctx, els, path, 2, sums)?;
            if tp != tq {
                path.push(2);
                let e = mismatch(tp, tq, path);
                path.pop();
                return Err(e);
            }
            if let Some(a) = ann {
                if *a != tp {
                    return Err(mismatch(a.clone(), tp, path));
                }
            }
            let out = If {
                ann: Some(tp.clone()),
                depth: *depth,
                cond: Rc::new(c),
                then: Rc::new(p),
                els: Rc::new(q),
            };
            Ok((out, tp.d_n(*depth)))
        }
        Let {
            ann,
            depth,
            var,
            bound,
            body,
        } => {
            let (n, tn) = child(ctx, bound, path, 0, sums)?;
            if tn != Ty::Ground(*depth) {
                path.push(0);
                let e = mismatch(Ty::Ground(*depth), tn, path);
                path.pop();
                return Err(e);
            }
            ctx.push(var, Ty::nat());
            let r = child(ctx, body, path, 1, sums);
            ctx.pop();
            let (b, tb) = r?;
            if let Some(a) = ann {
                if *a != tb {
                    return Err(mismatch(a.clone(), tb, path));
                }
            }
            let out = Let {
                ann: Some(tb.clone()),
                depth: *depth,
                var: var.clone(),
                bound: Rc::new(n),
                body: Rc::new(b),
            };
            Ok((out, tb.d_n(*depth)))
        }
        Diff(f) => {
            let (f, tf) = child(ctx, f, path, 0, sums)?;
            match tf {
                Ty::Arrow(a, b) => Ok((Diff(Rc::new(f)), Ty::arrow(a.d(), b.d()))),
                other => Err(TypeError::NotAFunction {
                    found: other,
                    path: path.clone(),
                }),
            }
        }
        Proj(i, d, n) => {
            let (n, tn) = child(ctx, n, path, 0, sums)?;
            need_depth(&tn, d + 1, path)?;
            let out = tn.undo_d().expect("depth checked");
            Ok((Proj(*i, *d, Rc::new(n)), out))
        }
        Inj(i, d, n) => {
            let (n, tn) = child(ctx, n, path, 0, sums)?;
            need_depth(&tn, *d, path)?;
            Ok((Inj(*i, *d, Rc::new(n)), tn.d()))
        }
        Sum(d, n) => {
            let (n, tn) = child(ctx, n, path, 0, sums)?;
            need_depth(&tn, d + 2, path)?;
            let out = tn.undo_d().expect("depth checked");
            Ok((Sum(*d, Rc::new(n)), out))
        }
        Flip(d, l, n) => {
            let (n, tn) = child(ctx, n, path, 0, sums)?;
            need_depth(&tn, d + l + 2, path)?;
            Ok((Flip(*d, *l, Rc::new(n)), tn))
        }
    }
}

/// Checks that every element of a term multiset has type `a`. Elements
/// may contain sums anywhere. Reports the first failure.
pub fn check_multiset(ctx: &TyCtx, s: &Multiset<Term>, a: &Ty) -> Result<(), (Term, TypeError)> {
    for m in s.support() {
        for part in m.summands() {
            match infer_with_sums(ctx, part) {
                Ok(b) if b == *a => {}
                Ok(b) => return Err((m.clone(), mismatch(a.clone(), b, &Vec::new()))),
                Err(e) => return Err((m.clone(), e)),
            }
        }
    }
    Ok(())
}
