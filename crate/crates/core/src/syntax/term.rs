use std::rc::Rc;
use std::collections::BTreeSet;

use super::ty::Ty;
use super::word::Bit;

pub type Name = String;

/// Terms of the language. Superscripts `d` (depth) and `l` (flip width)
/// are plain naturals; indices `i` are bits.
///
/// The annotation on `If`/`Let` is the type of the branches (resp. the
/// body); it may be omitted in source and filled by
/// [`crate::typing::annotate`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Abs(Name, Ty, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    Fix(Rc<Term>),
    Num(u64),
    Succ(usize, Rc<Term>),
    Pred(usize, Rc<Term>),
    If {
        ann: Option<Ty>,
        depth: usize,
        cond: Rc<Term>,
        then: Rc<Term>,
        els: Rc<Term>,
    },
    Let {
        ann: Option<Ty>,
        depth: usize,
        var: Name,
        bound: Rc<Term>,
        body: Rc<Term>,
    },
    Diff(Rc<Term>),
    Proj(Bit, usize, Rc<Term>),
    Inj(Bit, usize, Rc<Term>),
    Sum(usize, Rc<Term>),
    Flip(usize, usize, Rc<Term>),
    Zero(Ty),
    Plus(Rc<Term>, Rc<Term>),
}

/// Position of a subterm: the sequence of child indices from the root.
pub type Path = Vec<usize>;

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn abs(x: &str, a: Ty, body: Term) -> Term {
    Term::Abs(x.to_string(), a, Rc::new(body))
}

pub fn app(m: Term, n: Term) -> Term {
    Term::App(Rc::new(m), Rc::new(n))
}

pub fn fix(m: Term) -> Term {
    Term::Fix(Rc::new(m))
}

pub fn succ(d: usize, m: Term) -> Term {
    Term::Succ(d, Rc::new(m))
}

pub fn pred(d: usize, m: Term) -> Term {
    Term::Pred(d, Rc::new(m))
}

pub fn ifz(ann: Option<Ty>, depth: usize, cond: Term, then: Term, els: Term) -> Term {
    Term::If {
        ann,
        depth,
        cond: Rc::new(cond),
        then: Rc::new(then),
        els: Rc::new(els),
    }
}

pub fn let_in(ann: Option<Ty>, depth: usize, x: &str, bound: Term, body: Term) -> Term {
    Term::Let {
        ann,
        depth,
        var: x.to_string(),
        bound: Rc::new(bound),
        body: Rc::new(body),
    }
}

pub fn diff(m: Term) -> Term {
    Term::Diff(Rc::new(m))
}

pub fn proj(i: Bit, d: usize, m: Term) -> Term {
    Term::Proj(i, d, Rc::new(m))
}

pub fn inj(i: Bit, d: usize, m: Term) -> Term {
    Term::Inj(i, d, Rc::new(m))
}

pub fn sum(d: usize, m: Term) -> Term {
    Term::Sum(d, Rc::new(m))
}

pub fn flip(d: usize, l: usize, m: Term) -> Term {
    Term::Flip(d, l, Rc::new(m))
}

pub fn plus(m: Term, n: Term) -> Term {
    Term::Plus(Rc::new(m), Rc::new(n))
}

/// A variant of `base` that does not occur in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply of names")
}

impl Term {
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Num(_) | Term::Zero(_) => vec![],
            Term::Abs(_, _, m)
            | Term::Fix(m)
            | Term::Succ(_, m)
            | Term::Pred(_, m)
            | Term::Diff(m)
            | Term::Proj(_, _, m)
            | Term::Inj(_, _, m)
            | Term::Sum(_, m)
            | Term::Flip(_, _, m) => vec![m],
            Term::App(m, n) | Term::Plus(m, n) => vec![m, n],
            Term::If { cond, then, els, .. } => vec![cond, then, els],
            Term::Let { bound, body, .. } => vec![bound, body],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Term> {
        match self {
            Term::Var(_) | Term::Num(_) | Term::Zero(_) => vec![],
            Term::Abs(_, _, m)
            | Term::Fix(m)
            | Term::Succ(_, m)
            | Term::Pred(_, m)
            | Term::Diff(m)
            | Term::Proj(_, _, m)
            | Term::Inj(_, _, m)
            | Term::Sum(_, m)
            | Term::Flip(_, _, m) => vec![Rc::make_mut(m)],
            Term::App(m, n) | Term::Plus(m, n) => vec![Rc::make_mut(m), Rc::make_mut(n)],
            Term::If { cond, then, els, .. } => {
                vec![Rc::make_mut(cond), Rc::make_mut(then), Rc::make_mut(els)]
            }
            Term::Let { bound, body, .. } => vec![Rc::make_mut(bound), Rc::make_mut(body)],
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// True when the term contains neither `Zero` nor `Plus`.
    pub fn is_simplicit(&self) -> bool {
        match self {
            Term::Zero(_) | Term::Plus(..) => false,
            t => t.children().iter().all(|c| c.is_simplicit()),
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i)?.at(rest),
        }
    }

    /// Replaces the subterm at `path`; panics on an invalid path.
    pub fn replace_at(&self, path: &[usize], new: Term) -> Term {
        let mut out = self.clone();
        *out.at_mut(path).expect("valid path") = new;
        out
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children_mut().into_iter().nth(i)?.at_mut(rest),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(&x.as_str()) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(x, _, m) => {
                bound.push(x);
                m.collect_free(bound, out);
                bound.pop();
            }
            Term::Let {
                var, bound: b, body, ..
            } => {
                b.collect_free(bound, out);
                bound.push(var);
                body.collect_free(bound, out);
                bound.pop();
            }
            t => {
                for c in t.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => x == y,
            Term::Abs(y, _, m) => y != x && m.is_free(x),
            Term::Let {
                var, bound, body, ..
            } => bound.is_free(x) || (var != x && body.is_free(x)),
            t => t.children().iter().any(|c| c.is_free(x)),
        }
    }

    /// Capture-avoiding substitution `self[n/x]`.
    pub fn subst(&self, x: &str, n: &Term) -> Term {
        let fv = n.free_vars();
        self.subst_with(x, n, &fv)
    }

    fn subst_with(&self, x: &str, n: &Term, fv_n: &BTreeSet<Name>) -> Term {
        match self {
            Term::Var(y) if y == x => n.clone(),
            Term::Var(_) | Term::Num(_) | Term::Zero(_) => self.clone(),
            Term::Abs(y, a, body) => {
                let (y, body) = subst_binder(y, body, x, n, fv_n);
                Term::Abs(y, a.clone(), Rc::new(body))
            }
            Term::Let {
                ann,
                depth,
                var,
                bound,
                body,
            } => {
                let (var, body) = subst_binder(var, body, x, n, fv_n);
                Term::Let {
                    ann: ann.clone(),
                    depth: *depth,
                    var,
                    bound: Rc::new(bound.subst_with(x, n, fv_n)),
                    body: Rc::new(body),
                }
            }
            t => {
                let mut out = t.clone();
                for c in out.children_mut() {
                    *c = c.subst_with(x, n, fv_n);
                }
                out
            }
        }
    }

    /// Renames the free variable `x` to `y`.
    pub fn rename(&self, x: &str, y: &str) -> Term {
        self.subst(x, &Term::Var(y.to_string()))
    }

    /// α-equivalence. The optional decorations on `If`/`Let` are ignored,
    /// every other annotation and superscript is significant.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Representative of the α-class: bound variables are renamed by
    /// binding depth and `If`/`Let` decorations are erased. Two terms are
    /// α-equivalent iff their canonical forms are equal.
    pub fn canonical(&self) -> Term {
        let mut t = self.clone();
        t.canon(&mut Vec::new());
        t
    }

    fn canon(&mut self, env: &mut Vec<(String, String)>) {
        match self {
            Term::Var(x) => {
                if let Some((_, c)) = env.iter().rev().find(|(a, _)| a == x) {
                    *x = c.clone();
                }
            }
            Term::Abs(x, _, m) => {
                let c = format!("#{}", env.len());
                env.push((std::mem::replace(x, c.clone()), c));
                Rc::make_mut(m).canon(env);
                env.pop();
            }
            Term::Let {
                ann,
                var,
                bound,
                body,
                ..
            } => {
                *ann = None;
                Rc::make_mut(bound).canon(env);
                let c = format!("#{}", env.len());
                env.push((std::mem::replace(var, c.clone()), c));
                Rc::make_mut(body).canon(env);
                env.pop();
            }
            Term::If { ann, .. } => {
                *ann = None;
                for c in self.children_mut() {
                    c.canon(env);
                }
            }
            _ => {
                for c in self.children_mut() {
                    c.canon(env);
                }
            }
        }
    }

    /// Summands of a tree of `Plus` nodes, left to right.
    pub fn summands(&self) -> Vec<&Term> {
        match self {
            Term::Plus(a, b) => {
                let mut v = a.summands();
                v.extend(b.summands());
                v
            }
            t => vec![t],
        }
    }
}

fn subst_binder(y: &Name, body: &Term, x: &str, n: &Term, fv_n: &BTreeSet<Name>) -> (Name, Term) {
    if y == x || !body.is_free(x) {
        return (y.clone(), body.clone());
    }
    if fv_n.contains(y) {
        let mut avoid = fv_n.clone();
        avoid.extend(body.free_vars());
        avoid.insert(x.to_string());
        let y2 = fresh_name(y, &avoid);
        let body = body.rename(y, &y2);
        let body = body.subst_with(x, n, fv_n);
        (y2, body)
    } else {
        (y.clone(), body.subst_with(x, n, fv_n))
    }
}

fn alpha<'a>(a: &'a Term, b: &'a Term, ea: &mut Vec<&'a str>, eb: &mut Vec<&'a str>) -> bool {
    let pos = |env: &Vec<&str>, x: &str| env.iter().rposition(|y| *y == x);
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match (pos(ea, x), pos(eb, y)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        },
        (Term::Abs(x, ta, ma), Term::Abs(y, tb, mb)) => {
            if ta != tb {
                return false;
            }
            ea.push(x);
            eb.push(y);
            let r = alpha(ma, mb, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (
            Term::Let {
                depth: da,
                var: xa,
                bound: ba,
                body: ma,
                ..
            },
            Term::Let {
                depth: db,
                var: xb,
                bound: bb,
                body: mb,
                ..
            },
        ) => {
            if da != db || !alpha(ba, bb, ea, eb) {
                return false;
            }
            ea.push(xa);
            eb.push(xb);
            let r = alpha(ma, mb, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (Term::If { depth: da, .. }, Term::If { depth: db, .. }) => {
            da == db
                && a
                    .children()
                    .iter()
                    .zip(b.children())
                    .all(|(x, y)| alpha(x, y, ea, eb))
        }
        _ => {
            if !same_head(a, b) {
                return false;
            }
            a.children()
                .iter()
                .zip(b.children())
                .all(|(x, y)| alpha(x, y, ea, eb))
        }
    }
}

/// Same constructor with the same superscripts and annotations.
fn same_head(a: &Term, b: &Term) -> bool {
    use Term::*;
    match (a, b) {
        (App(..), App(..)) | (Fix(_), Fix(_)) | (Diff(_), Diff(_)) | (Plus(..), Plus(..)) => true,
        (Num(x), Num(y)) => x == y,
        (Succ(x, _), Succ(y, _)) | (Pred(x, _), Pred(y, _)) | (Sum(x, _), Sum(y, _)) => x == y,
        (Proj(i, d, _), Proj(j, e, _)) | (Inj(i, d, _), Inj(j, e, _)) => i == j && d == e,
        (Flip(d, l, _), Flip(e, k, _)) => d == e && l == k,
        (Zero(s), Zero(t)) => s == t,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> Ty {
        Ty::nat()
    }

    #[test]
    fn subst_replaces_variable() {
        assert_eq!(var("x").subst("x", &Term::Num(3)), Term::Num(3));
        assert_eq!(
            app(var("x"), var("x")).subst("x", &Term::Num(2)),
            app(Term::Num(2), Term::Num(2))
        );
    }

    #[test]
    fn subst_avoids_capture() {
        let m = abs("y", nat(), var("x"));
        let r = m.subst("x", &var("y"));
        match &r {
            Term::Abs(y2, _, body) => {
                assert_ne!(y2, "y");
                assert_eq!(**body, var("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subst_stops_at_shadowing_binder() {
        let m = abs("x", nat(), var("x"));
        assert_eq!(m.subst("x", &Term::Num(1)), m);
        let l = let_in(None, 0, "x", var("x"), var("x"));
        assert_eq!(
            l.subst("x", &Term::Num(1)),
            let_in(None, 0, "x", Term::Num(1), var("x"))
        );
    }

    #[test]
    fn alpha_equivalence_examples() {
        assert!(abs("x", nat(), var("x")).alpha_eq(&abs("y", nat(), var("y"))));
        assert!(!abs("x", nat(), var("x")).alpha_eq(&abs("x", nat(), Term::Num(0))));
        assert!(!flip(0, 0, var("m")).alpha_eq(&flip(0, 1, var("m"))));
        assert!(!abs("x", nat(), var("y")).alpha_eq(&abs("y", nat(), var("y"))));
    }

    #[test]
    fn canonical_agrees_with_alpha() {
        let a = abs("x", nat(), abs("y", nat(), app(var("x"), var("z"))));
        let b = abs("u", nat(), abs("x", nat(), app(var("u"), var("z"))));
        assert!(a.alpha_eq(&b));
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn fresh_names_skip_taken_ones() {
        let avoid: BTreeSet<Name> = ["y", "y1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh_name("y", &avoid), "y2");
        assert_eq!(fresh_name("z", &avoid), "z");
    }

    #[test]
    fn paths_address_children() {
        let m = app(var("f"), succ(0, var("x")));
        assert_eq!(m.at(&[1, 0]), Some(&var("x")));
        assert_eq!(m.replace_at(&[1, 0], Term::Num(4)), app(var("f"), succ(0, Term::Num(4))));
    }
}
