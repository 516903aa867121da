//! Krivine-style abstract machines over access words.
//!
//! A state `⟨δ | M | s⟩` holds an access word, the code and a stack. The
//! transitions that do not inspect the letters of the word are shared by
//! the nondeterministic machine ([`krivine`]) and the deterministic one
//! ([`det`]), which differ only on injections and sums.

pub mod det;
pub mod krivine;

use std::rc::Rc;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Bit, Name, Term};

/// Letters of access words.
pub trait Letter: Clone + Eq + fmt::Debug + fmt::Display {
    fn from_bit(b: Bit) -> Self;
}

impl Letter for Bit {
    fn from_bit(b: Bit) -> Self {
        b
    }
}

pub fn show_word<L: Letter>(w: &[L]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.iter().map(|l| l.to_string()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Frame<L> {
    Arg(Term),
    Succ,
    Pred,
    If(Vec<L>, Term, Term),
    /// Saved word, bound variable and body of a `let`.
    Let(Vec<L>, Name, Term),
    Diff(L),
}

/// A stack of frames; the last element is the top.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stack<L>(pub Vec<Frame<L>>);

impl<L> Stack<L> {
    pub fn empty() -> Self {
        Stack(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn top(&self) -> Option<&Frame<L>> {
        self.0.last()
    }

    pub fn push(mut self, f: Frame<L>) -> Self {
        self.0.push(f);
        self
    }

    fn popped(&self) -> Self
    where
        L: Clone,
    {
        let mut v = self.0.clone();
        v.pop();
        Stack(v)
    }
}

impl<L: Letter> fmt::Display for Frame<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Arg(m) => write!(f, "arg({m})"),
            Frame::Succ => write!(f, "succ"),
            Frame::Pred => write!(f, "pred"),
            Frame::If(w, p, q) => write!(f, "if({}, {p}, {q})", show_word(w)),
            Frame::Let(w, x, m) => write!(f, "let({}, {x}, {m})", show_word(w)),
            Frame::Diff(l) => write!(f, "diff({l})"),
        }
    }
}

impl<L: Letter> fmt::Display for Stack<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (k, fr) in self.0.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " · ")?;
            }
            write!(f, "{fr}")?;
        }
        Ok(())
    }
}

/// A machine state `⟨access | code | stack⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State<L> {
    pub access: Vec<L>,
    pub code: Term,
    pub stack: Stack<L>,
}

impl<L: Letter> State<L> {
    pub fn new(access: Vec<L>, code: Term, stack: Stack<L>) -> Self {
        State {
            access,
            code,
            stack,
        }
    }

    pub fn initial(code: Term) -> Self {
        State::new(Vec::new(), code, Stack::empty())
    }
}

impl<L: Letter> fmt::Display for State<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "⟨{} | {} | {}⟩",
            show_word(&self.access),
            self.code,
            self.stack
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MachineRule {
    App,
    Beta,
    DiffPush,
    DiffAbs,
    Fix,
    SuccPush,
    PredPush,
    NumSucc,
    NumPredZero,
    NumPredSucc,
    IfPush,
    NumIfZero,
    NumIfSucc,
    LetPush,
    NumLet,
    InjMatch,
    InjMismatch,
    InjCellKeep,
    InjCellWrite,
    Flip,
    Proj,
    SumZero,
    SumOne,
    SumCell,
}

impl MachineRule {
    pub fn name(self) -> &'static str {
        use MachineRule::*;
        match self {
            App => "app",
            Beta => "beta",
            DiffPush => "diff-push",
            DiffAbs => "diff-abs",
            Fix => "fix",
            SuccPush => "succ-push",
            PredPush => "pred-push",
            NumSucc => "num-succ",
            NumPredZero => "num-pred-zero",
            NumPredSucc => "num-pred-succ",
            IfPush => "if-push",
            NumIfZero => "num-if-zero",
            NumIfSucc => "num-if-succ",
            LetPush => "let-push",
            NumLet => "num-let",
            InjMatch => "inj-match",
            InjMismatch => "inj-mismatch",
            InjCellKeep => "inj-cell-keep",
            InjCellWrite => "inj-cell-write",
            Flip => "flip",
            Proj => "proj",
            SumZero => "sum-zero",
            SumOne => "sum-one",
            SumCell => "sum-cell",
        }
    }
}

impl fmt::Display for MachineRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("no transition for {head} with access word of length {access_len}")]
    NoRule { head: &'static str, access_len: usize },
    #[error("free variable {0} in code")]
    Open(Name),
    #[error("sums and zeros cannot be executed")]
    NotSimplicit,
    #[error("ill-typed state: {0}")]
    IllTyped(String),
}

/// Name of the outermost constructor, for traces.
pub fn head_name(t: &Term) -> &'static str {
    match t {
        Term::Var(_) => "var",
        Term::Abs(..) => "abs",
        Term::App(..) => "app",
        Term::Fix(_) => "fix",
        Term::Num(_) => "num",
        Term::Succ(..) => "succ",
        Term::Pred(..) => "pred",
        Term::If { .. } => "if",
        Term::Let { .. } => "let",
        Term::Diff(_) => "D",
        Term::Proj(..) => "proj",
        Term::Inj(..) => "inj",
        Term::Sum(..) => "sum",
        Term::Flip(..) => "flip",
        Term::Zero(_) => "zero",
        Term::Plus(..) => "plus",
    }
}

/// Outcome of the letter-independent transitions.
pub(crate) enum Common<L> {
    Next(MachineRule, State<L>),
    Terminal(u64),
    /// `ι^d_i M` with the letter at depth `d` found at index `pos`.
    Inj { i: Bit, pos: usize, body: Term },
    /// `σ^d M` with the letter at depth `d` found at index `pos`.
    Sum { pos: usize, body: Term },
}

fn no_rule<T>(c: &State<impl Letter>) -> Result<T, MachineError> {
    Err(MachineError::NoRule {
        head: head_name(&c.code),
        access_len: c.access.len(),
    })
}

/// Index in the access word of the letter at depth `d`, counted from the
/// right.
fn depth_index<L>(c: &State<L>, d: usize) -> Option<usize> {
    c.access.len().checked_sub(d + 1)
}

pub(crate) fn common_step<L: Letter>(c: &State<L>) -> Result<Common<L>, MachineError> {
    let n = c.access.len();
    let next = |rule, access, code: Term, stack| Ok(Common::Next(rule, State::new(access, code, stack)));
    match &c.code {
        Term::Var(x) => Err(MachineError::Open(x.clone())),
        Term::Zero(_) | Term::Plus(..) => Err(MachineError::NotSimplicit),
        Term::App(m, arg) => next(
            MachineRule::App,
            c.access.clone(),
            (**m).clone(),
            c.stack.clone().push(Frame::Arg((**arg).clone())),
        ),
        Term::Abs(x, a, body) => match c.stack.top() {
            Some(Frame::Arg(arg)) => next(
                MachineRule::Beta,
                c.access.clone(),
                body.subst(x, arg),
                c.stack.popped(),
            ),
            Some(Frame::Diff(l)) => {
                let mut access = c.access.clone();
                access.push(l.clone());
                next(
                    MachineRule::DiffAbs,
                    access,
                    Term::Abs(x.clone(), a.d(), Rc::new(crate::differential::dlet(x, body))),
                    c.stack.popped(),
                )
            }
            _ => no_rule(c),
        },
        Term::Diff(m) => match c.access.split_last() {
            Some((l, rest)) => next(
                MachineRule::DiffPush,
                rest.to_vec(),
                (**m).clone(),
                c.stack.clone().push(Frame::Diff(l.clone())),
            ),
            None => no_rule(c),
        },
        Term::Fix(m) => next(
            MachineRule::Fix,
            c.access.clone(),
            (**m).clone(),
            c.stack.clone().push(Frame::Arg(c.code.clone())),
        ),
        Term::Succ(_, m) => next(
            MachineRule::SuccPush,
            c.access.clone(),
            (**m).clone(),
            c.stack.clone().push(Frame::Succ),
        ),
        Term::Pred(_, m) => next(
            MachineRule::PredPush,
            c.access.clone(),
            (**m).clone(),
            c.stack.clone().push(Frame::Pred),
        ),
        Term::Num(v) => {
            if n != 0 {
                return no_rule(c);
            }
            let v = *v;
            let rest = c.stack.popped();
            match c.stack.top() {
                None => Ok(Common::Terminal(v)),
                Some(Frame::Succ) => next(MachineRule::NumSucc, vec![], Term::Num(v + 1), rest),
                Some(Frame::Pred) if v == 0 => next(MachineRule::NumPredZero, vec![], Term::Num(0), rest),
                Some(Frame::Pred) => next(MachineRule::NumPredSucc, vec![], Term::Num(v - 1), rest),
                Some(Frame::If(w, p, q)) => {
                    if v == 0 {
                        next(MachineRule::NumIfZero, w.clone(), p.clone(), rest)
                    } else {
                        next(MachineRule::NumIfSucc, w.clone(), q.clone(), rest)
                    }
                }
                Some(Frame::Let(w, x, body)) => {
                    next(MachineRule::NumLet, w.clone(), body.subst(x, &Term::Num(v)), rest)
                }
                Some(Frame::Arg(_)) | Some(Frame::Diff(_)) => no_rule(c),
            }
        }
        Term::If {
            depth,
            cond,
            then,
            els,
            ..
        } => {
            let Some(cut) = n.checked_sub(*depth) else {
                return no_rule(c);
            };
            next(
                MachineRule::IfPush,
                c.access[cut..].to_vec(),
                (**cond).clone(),
                c.stack.clone().push(Frame::If(
                    c.access[..cut].to_vec(),
                    (**then).clone(),
                    (**els).clone(),
                )),
            )
        }
        Term::Let {
            depth,
            var,
            bound,
            body,
            ..
        } => {
            let Some(cut) = n.checked_sub(*depth) else {
                return no_rule(c);
            };
            next(
                MachineRule::LetPush,
                c.access[cut..].to_vec(),
                (**bound).clone(),
                c.stack.clone().push(Frame::Let(
                    c.access[..cut].to_vec(),
                    var.clone(),
                    (**body).clone(),
                )),
            )
        }
        Term::Proj(i, d, m) => {
            let Some(pos) = n.checked_sub(*d) else {
                return no_rule(c);
            };
            let mut access = c.access.clone();
            access.insert(pos, L::from_bit(*i));
            next(MachineRule::Proj, access, (**m).clone(), c.stack.clone())
        }
        Term::Flip(d, l, m) => {
            let width = l + 2;
            let Some(start) = n.checked_sub(d + width) else {
                return no_rule(c);
            };
            let mut access = c.access.clone();
            let seg = crate::syntax::word::rcycle(&access[start..start + width]);
            access.splice(start..start + width, seg);
            next(MachineRule::Flip, access, (**m).clone(), c.stack.clone())
        }
        Term::Inj(i, d, m) => match depth_index(c, *d) {
            Some(pos) => Ok(Common::Inj {
                i: *i,
                pos,
                body: (**m).clone(),
            }),
            None => no_rule(c),
        },
        Term::Sum(d, m) => match depth_index(c, *d) {
            Some(pos) => Ok(Common::Sum {
                pos,
                body: (**m).clone(),
            }),
            None => no_rule(c),
        },
    }
}

/// One line of a machine trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub branch: usize,
    pub access: String,
    pub head: &'static str,
    pub rule: String,
    pub stack_depth: usize,
    pub counter: Option<u64>,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {} | {} | {}",
            self.branch, self.access, self.head, self.rule, self.stack_depth
        )?;
        if let Some(k) = self.counter {
            write!(f, " | {k}")?;
        }
        Ok(())
    }
}
