//! The syntactic differential `∂(x)M` of a term with respect to a
//! variable, its extension to linear contexts, and the `dlin`/`lin` sugar.

use std::rc::Rc;
use std::collections::BTreeSet;

use crate::syntax::term::{self, fresh_name, Name, Term};
use crate::syntax::{Bit, Ty};

/// `∂(x)M`. When `Γ, x:A ⊢ M : B` then `Γ, x:DA ⊢ ∂(x)M : DB`.
pub fn dlet(x: &str, m: &Term) -> Term {
    use Term::*;
    let go = |n: &Term| Rc::new(dlet(x, n));
    match m {
        Var(y) if y == x => m.clone(),
        Var(_) | Num(_) => term::inj(Bit::Zero, 0, m.clone()),
        Abs(y, b, p) => {
            let (y, p) = away_from(x, y, p);
            Abs(y, b.clone(), go(&p))
        }
        App(p, q) => App(Rc::new(term::sum(0, term::diff(dlet(x, p)))), go(q)),
        Fix(p) => term::fix(term::sum(0, term::diff(dlet(x, p)))),
        Succ(d, p) => Succ(d + 1, go(p)),
        Pred(d, p) => Pred(d + 1, go(p)),
        If {
            ann,
            depth,
            cond,
            then,
            els,
        } => term::sum(
            0,
            term::flip(
                0,
                *depth,
                If {
                    ann: ann.as_ref().map(Ty::d),
                    depth: depth + 1,
                    cond: go(cond),
                    then: go(then),
                    els: go(els),
                },
            ),
        ),
        Let {
            ann,
            depth,
            var,
            bound,
            body,
        } => {
            let (var, body) = away_from(x, var, body);
            term::sum(
                0,
                term::flip(
                    0,
                    *depth,
                    Let {
                        ann: ann.as_ref().map(Ty::d),
                        depth: depth + 1,
                        var,
                        bound: go(bound),
                        body: go(&body),
                    },
                ),
            )
        }
        Diff(p) => term::flip(0, 0, term::diff(dlet(x, p))),
        Proj(i, d, p) => Proj(*i, d + 1, go(p)),
        Inj(i, d, p) => Inj(*i, d + 1, go(p)),
        Sum(d, p) => Sum(d + 1, go(p)),
        Flip(d, l, p) => Flip(d + 1, *l, go(p)),
        Zero(a) => Zero(a.d()),
        Plus(p, q) => Plus(go(p), go(q)),
    }
}

/// Renames binder `y` of `body` when it coincides with `x`.
fn away_from(x: &str, y: &Name, body: &Term) -> (Name, Term) {
    if y != x {
        return (y.clone(), body.clone());
    }
    let mut avoid: BTreeSet<Name> = body.free_vars();
    avoid.insert(x.to_string());
    let y2 = fresh_name(y, &avoid);
    let body = body.rename(y, &y2);
    (y2, body)
}

/// One layer of a linear context: the hole sits in the position that is
/// linear for the constructor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinFrame {
    Abs(Name, Ty),
    AppFun(Term),
    Succ(usize),
    Pred(usize),
    IfCond { ann: Option<Ty>, depth: usize, then: Term, els: Term },
    LetBound { ann: Option<Ty>, depth: usize, var: Name, body: Term },
    Diff,
    Proj(Bit, usize),
    Inj(Bit, usize),
    Sum(usize),
    Flip(usize, usize),
}

/// A linear context, outermost frame first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinCtx(pub Vec<LinFrame>);

impl LinFrame {
    pub fn plug(&self, m: Term) -> Term {
        let m = Rc::new(m);
        match self.clone() {
            LinFrame::Abs(x, a) => Term::Abs(x, a, m),
            LinFrame::AppFun(n) => Term::App(m, Rc::new(n)),
            LinFrame::Succ(d) => Term::Succ(d, m),
            LinFrame::Pred(d) => Term::Pred(d, m),
            LinFrame::IfCond {
                ann,
                depth,
                then,
                els,
            } => Term::If {
                ann,
                depth,
                cond: m,
                then: Rc::new(then),
                els: Rc::new(els),
            },
            LinFrame::LetBound {
                ann,
                depth,
                var,
                body,
            } => Term::Let {
                ann,
                depth,
                var,
                bound: m,
                body: Rc::new(body),
            },
            LinFrame::Diff => Term::Diff(m),
            LinFrame::Proj(i, d) => Term::Proj(i, d, m),
            LinFrame::Inj(i, d) => Term::Inj(i, d, m),
            LinFrame::Sum(d) => Term::Sum(d, m),
            LinFrame::Flip(d, l) => Term::Flip(d, l, m),
        }
    }

    /// Splits `t` as this kind of frame around its linear child.
    pub fn split(t: &Term) -> Option<(LinFrame, &Term)> {
        Some(match t {
            Term::Abs(x, a, m) => (LinFrame::Abs(x.clone(), a.clone()), m),
            Term::App(m, n) => (LinFrame::AppFun((**n).clone()), m),
            Term::Succ(d, m) => (LinFrame::Succ(*d), m),
            Term::Pred(d, m) => (LinFrame::Pred(*d), m),
            Term::If {
                ann,
                depth,
                cond,
                then,
                els,
            } => (
                LinFrame::IfCond {
                    ann: ann.clone(),
                    depth: *depth,
                    then: (**then).clone(),
                    els: (**els).clone(),
                },
                cond,
            ),
            Term::Let {
                ann,
                depth,
                var,
                bound,
                body,
            } => (
                LinFrame::LetBound {
                    ann: ann.clone(),
                    depth: *depth,
                    var: var.clone(),
                    body: (**body).clone(),
                },
                bound,
            ),
            Term::Diff(m) => (LinFrame::Diff, m),
            Term::Proj(i, d, m) => (LinFrame::Proj(*i, *d), m),
            Term::Inj(i, d, m) => (LinFrame::Inj(*i, *d), m),
            Term::Sum(d, m) => (LinFrame::Sum(*d), m),
            Term::Flip(d, l, m) => (LinFrame::Flip(*d, *l), m),
            _ => return None,
        })
    }

    /// Type of the plugged term given the type of the hole; `None` when
    /// the frame does not record enough to tell.
    pub fn result_type(&self, hole: &Ty) -> Option<Ty> {
        Some(match self {
            LinFrame::Abs(_, a) => Ty::arrow(a.clone(), hole.clone()),
            LinFrame::AppFun(_) => hole.as_arrow()?.1.clone(),
            LinFrame::Succ(_) | LinFrame::Pred(_) | LinFrame::Flip(..) => hole.clone(),
            LinFrame::IfCond { ann, depth, .. } | LinFrame::LetBound { ann, depth, .. } => {
                ann.as_ref()?.d_n(*depth)
            }
            LinFrame::Diff => {
                let (a, b) = hole.as_arrow()?;
                Ty::arrow(a.d(), b.d())
            }
            LinFrame::Proj(..) | LinFrame::Sum(_) => hole.undo_d()?,
            LinFrame::Inj(..) => hole.d(),
        })
    }
}

impl LinCtx {
    pub fn plug(&self, m: Term) -> Term {
        self.0.iter().rev().fold(m, |acc, f| f.plug(acc))
    }

    pub fn height(&self) -> usize {
        self.0.len()
    }

    pub fn binds(&self, x: &str) -> bool {
        self.0.iter().any(|f| match f {
            LinFrame::Abs(y, _) => y == x,
            _ => false,
        })
    }
}

/// The differential of a linear context, so that
/// `∂(x)(L[M]) = (dlet_ctx(x, L))[∂(x)M]`. Returns `None` when `L` binds
/// `x` above its hole.
pub fn dlet_ctx(x: &str, l: &LinCtx) -> Option<LinCtx> {
    if l.binds(x) {
        return None;
    }
    let mut out = Vec::new();
    for f in &l.0 {
        match f {
            LinFrame::Abs(..) => out.push(f.clone()),
            LinFrame::AppFun(n) => {
                out.push(LinFrame::AppFun(dlet(x, n)));
                out.push(LinFrame::Sum(0));
                out.push(LinFrame::Diff);
            }
            LinFrame::Succ(d) => out.push(LinFrame::Succ(d + 1)),
            LinFrame::Pred(d) => out.push(LinFrame::Pred(d + 1)),
            LinFrame::IfCond {
                ann,
                depth,
                then,
                els,
            } => {
                out.push(LinFrame::Sum(0));
                out.push(LinFrame::Flip(0, *depth));
                out.push(LinFrame::IfCond {
                    ann: ann.as_ref().map(Ty::d),
                    depth: depth + 1,
                    then: dlet(x, then),
                    els: dlet(x, els),
                });
            }
            LinFrame::LetBound {
                ann,
                depth,
                var,
                body,
            } => {
                let (var, body) = away_from(x, var, body);
                out.push(LinFrame::Sum(0));
                out.push(LinFrame::Flip(0, *depth));
                out.push(LinFrame::LetBound {
                    ann: ann.as_ref().map(Ty::d),
                    depth: depth + 1,
                    var,
                    body: dlet(x, &body),
                });
            }
            LinFrame::Diff => {
                out.push(LinFrame::Flip(0, 0));
                out.push(LinFrame::Diff);
            }
            LinFrame::Proj(i, d) => out.push(LinFrame::Proj(*i, d + 1)),
            LinFrame::Inj(i, d) => out.push(LinFrame::Inj(*i, d + 1)),
            LinFrame::Sum(d) => out.push(LinFrame::Sum(d + 1)),
            LinFrame::Flip(d, l) => out.push(LinFrame::Flip(d + 1, *l)),
        }
    }
    Some(LinCtx(out))
}

/// `dlin M = π¹₀(D M)`: the derivative of `M : A → B`, typed `DA → B`.
pub fn ldiffd(m: Term) -> Term {
    term::proj(Bit::One, 0, term::diff(m))
}

/// `lin M N = (dlin M)(ι¹₀ N)`: `M` applied linearly to `N`.
pub fn linapp(m: Term, n: Term) -> Term {
    term::app(ldiffd(m), term::inj(Bit::One, 0, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::typing::{infer, TyCtx};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn variable_clauses() {
        assert_eq!(dlet("x", &p("x")), p("x"));
        assert_eq!(dlet("x", &p("y")), p("inj[0,0] y"));
        assert_eq!(dlet("x", &p("3")), p("inj[0,0] 3"));
    }

    #[test]
    fn application_and_successor() {
        assert_eq!(dlet("x", &p("f x")), p("sum[0] (D (inj[0,0] f)) x"));
        assert_eq!(dlet("x", &p("succ[0] x")), p("succ[1] x"));
    }

    #[test]
    fn twice_body() {
        let body = p("\\x:Nat. f (f x)");
        assert_eq!(
            dlet("f", &body),
            p("\\x:Nat. sum[0] (D f) (sum[0] (D f) (inj[0,0] x))")
        );
    }

    #[test]
    fn conditional_wraps_in_flip_and_sum() {
        assert_eq!(
            dlet("x", &p("if[1](c, x, 4):Nat")),
            p("sum[0] (flip[0,1] (if[2](inj[0,0] c, x, inj[0,0] 4):D Nat))")
        );
    }

    #[test]
    fn binder_named_like_the_variable_is_renamed() {
        let m = p("\\x:Nat. x");
        let r = dlet("x", &m);
        assert!(r.alpha_eq(&p("\\y:Nat. inj[0,0] y")));
    }

    #[test]
    fn differential_is_well_typed() {
        let ctx = TyCtx::new().with("f", Ty::arrow(Ty::nat(), Ty::nat()));
        let m = p("\\x:Nat. let[0](y = f x) if[0](y, D f, D (\\z:Nat. succ[0] z))");
        let b = infer(&ctx, &m).unwrap();
        let dctx = TyCtx::new().with("f", Ty::arrow(Ty::nat(), Ty::nat()).d());
        assert_eq!(infer(&dctx, &dlet("f", &m)).unwrap(), b.d());
    }

    #[test]
    fn context_differential_commutes_with_plugging() {
        let l = LinCtx(vec![
            LinFrame::Proj(Bit::One, 0),
            LinFrame::AppFun(p("y")),
            LinFrame::Diff,
            LinFrame::Abs("z".into(), Ty::nat()),
        ]);
        let m = p("succ[0] x");
        let dl = dlet_ctx("x", &l).unwrap();
        assert_eq!(dlet("x", &l.plug(m.clone())), dl.plug(dlet("x", &m)));
        let binding = LinCtx(vec![LinFrame::Abs("x".into(), Ty::nat())]);
        assert_eq!(dlet_ctx("x", &binding), None);
    }

    #[test]
    fn sugar() {
        assert_eq!(ldiffd(p("f")), p("proj[1,0] (D f)"));
        assert_eq!(linapp(p("f"), p("x")), p("proj[1,0] (D f) (inj[1,0] x)"));
    }
}
