//! The relational semantics as a checker: web points, the `δ·a` action,
//! the `S∂` relation, and bounded search for derivations in the
//! non-idempotent intersection typing systems for terms, stacks and
//! states.
//!
//! A search either finds a derivation (`Proved`) or gives up
//! (`Unknown`). `Unknown` never means the point is outside the
//! interpretation: fixpoints have points whose derivations are larger
//! than any fuel.

pub mod point;
mod solver;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use point::{parse_point, point_act, sdiff_expand, sdiff_rel, sdiff_split, Point, PointParseError};

use crate::machine::krivine::{check_command, stack_type, Command};
use crate::machine::{Frame, MachineError, Stack};
use crate::syntax::{Bit, Multiset, Name, Term, Ty};
use crate::typing::{infer_with_sums, TyCtx, TypeError};
use solver::{pattern_of, Arena, BitT, Env, FrameN, Solver};

/// `x₁ : m₁ : A₁, …, xₙ : mₙ : Aₙ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IContext(pub Vec<(Name, Multiset<Point>, Ty)>);

impl IContext {
    pub fn new() -> IContext {
        IContext(Vec::new())
    }

    /// `0_Γ`: every variable of `Γ` with the empty multiset.
    pub fn empty_of(ctx: &TyCtx) -> IContext {
        IContext(
            ctx.entries()
                .iter()
                .map(|(x, a)| (x.clone(), Multiset::new(), a.clone()))
                .collect(),
        )
    }

    pub fn with(mut self, x: &str, m: impl IntoIterator<Item = Point>, a: Ty) -> IContext {
        self.0.push((x.to_string(), m.into_iter().collect(), a));
        self
    }

    pub fn underlying(&self) -> TyCtx {
        let mut ctx = TyCtx::new();
        for (x, _, a) in &self.0 {
            ctx.push(x, a.clone());
        }
        ctx
    }

    /// `Φ + Φ'`, defined when both have the same underlying context.
    pub fn add(&self, other: &IContext) -> Option<IContext> {
        if self.0.len() != other.0.len() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|((x, m, a), (y, n, b))| (x == y && a == b).then(|| (x.clone(), m.sum(n), a.clone())))
            .collect::<Option<Vec<_>>>()
            .map(IContext)
    }
}

impl fmt::Display for IContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m, a)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} : {m} : {a}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proved => write!(f, "proved"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

/// Limits of a search. `fuel` bounds the size of the derivation sought;
/// `visit_budget` bounds the work spent looking for it; `max_arity`
/// bounds the size of argument multisets that have to be guessed.
#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub fuel: usize,
    pub max_arity: usize,
    pub visit_budget: usize,
}

impl SearchConfig {
    pub fn with_fuel(fuel: usize) -> SearchConfig {
        SearchConfig {
            fuel,
            ..SearchConfig::default()
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            fuel: 1000,
            max_arity: 3,
            visit_budget: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub visits: usize,
    /// The search stopped because it ran out of visits, not because it
    /// exhausted the derivations within fuel.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("{point} is not a point of {ty}")]
    PointTypeMismatch { point: Point, ty: Ty },
    #[error(transparent)]
    IllTyped(#[from] TypeError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("stack has type {found}, not {expected}")]
    StackType { expected: Ty, found: Ty },
}

const SEARCH_STACK: usize = 1 << 30;

/// Runs a search on a thread with a stack deep enough for long
/// derivations.
fn run_search(
    arena: &Arena,
    cfg: &SearchConfig,
    go: impl FnOnce(&mut Solver<'_>) -> bool + Send,
) -> CheckReport {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(SEARCH_STACK)
            .spawn_scoped(scope, move || {
                let mut s = Solver::new(arena, cfg.fuel, cfg.max_arity, cfg.visit_budget);
                let proved = go(&mut s);
                CheckReport {
                    verdict: if proved { Verdict::Proved } else { Verdict::Unknown },
                    visits: s.visits(),
                    budget_exhausted: !proved && s.aborted,
                }
            })
            .expect("spawn search thread")
            .join()
            .expect("search thread panicked")
    })
}

fn check_point(p: &Point, a: &Ty) -> Result<(), RelError> {
    if p.has_type(a) {
        Ok(())
    } else {
        Err(RelError::PointTypeMismatch {
            point: p.clone(),
            ty: a.clone(),
        })
    }
}

/// `Φ ⊢ M : a`.
pub fn icheck(phi: &IContext, m: &Term, a: &Point, fuel: usize) -> Result<Verdict, RelError> {
    icheck_with(phi, m, a, &SearchConfig::with_fuel(fuel)).map(|r| r.verdict)
}

pub fn icheck_with(phi: &IContext, m: &Term, a: &Point, cfg: &SearchConfig) -> Result<CheckReport, RelError> {
    let mut ctx = phi.underlying();
    let ty = infer_with_sums(&ctx, m)?;
    check_point(a, &ty)?;
    for (_, pts, t) in &phi.0 {
        for p in pts.iter() {
            check_point(p, t)?;
        }
    }
    let mut arena = Arena::default();
    let root = arena.add(&mut ctx, m)?;
    let entries: Vec<(Name, Vec<Point>)> = phi
        .0
        .iter()
        .map(|(x, pts, _)| (x.clone(), pts.iter().cloned().collect()))
        .collect();
    let target = pattern_of(a);
    Ok(run_search(&arena, cfg, move |s| {
        let mut env = Env::default();
        let mut slots = Vec::new();
        for (x, pts) in &entries {
            let sid = s.push_slot_budget(pts.iter().map(pattern_of).collect());
            slots.push(sid);
            env = env.extend(x, sid);
        }
        s.derive(root, &env, target, &mut |s2| s2.budgets_spent(&slots))
    }))
}

fn frames_of(arena: &mut Arena, s: &Stack<Bit>) -> Result<Vec<FrameN>, RelError> {
    let mut out = Vec::new();
    for f in s.0.iter().rev() {
        out.push(match f {
            Frame::Arg(n) => FrameN::Arg(arena.add(&mut TyCtx::new(), n)?),
            Frame::Succ => FrameN::Succ,
            Frame::Pred => FrameN::Pred,
            Frame::If(w, p, q) => FrameN::If(
                w.clone(),
                arena.add(&mut TyCtx::new(), p)?,
                arena.add(&mut TyCtx::new(), q)?,
            ),
            Frame::Let(w, x, m) => FrameN::Let(
                w.clone(),
                x.clone(),
                arena.add(&mut TyCtx::new().with(x, Ty::nat()), m)?,
            ),
            Frame::Diff(r) => FrameN::Diff(*r),
        });
    }
    Ok(out)
}

/// `s : f : F ⊢ ν`.
pub fn icheck_stack(s: &Stack<Bit>, f: &Point, ty: &Ty, nu: u64, fuel: usize) -> Result<Verdict, RelError> {
    let found = stack_type(s)?;
    if &found != ty {
        return Err(RelError::StackType {
            expected: ty.clone(),
            found,
        });
    }
    check_point(f, ty)?;
    let mut arena = Arena::default();
    let frames = frames_of(&mut arena, s)?;
    let goal = pattern_of(f);
    let cfg = SearchConfig::with_fuel(fuel);
    Ok(run_search(&arena, &cfg, move |sv| sv.stack_goal(&frames, goal, nu, &mut |_| true)).verdict)
}

/// `⊢ ⟨δ | M | s⟩ : ν`. The access word is read last letter first, in
/// the order the machine consumes it.
pub fn icheck_state(c: &Command, nu: u64, fuel: usize) -> Result<Verdict, RelError> {
    icheck_state_with(c, nu, &SearchConfig::with_fuel(fuel)).map(|r| r.verdict)
}

pub fn icheck_state_with(c: &Command, nu: u64, cfg: &SearchConfig) -> Result<CheckReport, RelError> {
    check_command(c)?;
    let mut arena = Arena::default();
    let root = arena.add(&mut TyCtx::new(), &c.code)?;
    let frames = frames_of(&mut arena, &c.stack)?;
    let word: Vec<BitT> = c.access.iter().rev().map(|&b| BitT::K(b)).collect();
    Ok(run_search(&arena, cfg, move |s| {
        s.state_goal(word, root, &Env::default(), &frames, nu, &mut |_| true)
    }))
}

/// The numerals `ν ≤ ν_bound` proved to be in `⟦M⟧` for a closed `M : ι`.
pub fn interp_ground(m: &Term, nu_bound: u64, fuel: usize) -> Result<BTreeSet<u64>, RelError> {
    interp_ground_with(m, nu_bound, &SearchConfig::with_fuel(fuel)).map(|(s, _)| s)
}

/// Like [`interp_ground`], also telling whether some search was cut off
/// by its visit budget.
pub fn interp_ground_with(m: &Term, nu_bound: u64, cfg: &SearchConfig) -> Result<(BTreeSet<u64>, bool), RelError> {
    let ty = infer_with_sums(&TyCtx::new(), m)?;
    check_point(&Point::nat(0), &ty)?;
    let mut found = BTreeSet::new();
    let mut cut = false;
    for nu in 0..=nu_bound {
        let r = icheck_with(&IContext::new(), m, &Point::nat(nu), cfg)?;
        cut |= r.budget_exhausted;
        if r.verdict == Verdict::Proved {
            found.insert(nu);
        }
    }
    Ok((found, cut))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn pt(s: &str) -> Point {
        parse_point(s).unwrap()
    }

    #[test]
    fn numerals_and_successor() {
        let e = IContext::new();
        assert_eq!(icheck(&e, &t("7"), &pt("7"), 10), Ok(Verdict::Proved));
        assert_eq!(icheck(&e, &t("7"), &pt("6"), 10), Ok(Verdict::Unknown));
        let s = t("\\x:Nat. succ[0] x");
        assert_eq!(icheck(&e, &s, &pt("([3], 4)"), 10), Ok(Verdict::Proved));
        assert_eq!(icheck(&e, &s, &pt("([3, 3], 4)"), 50), Ok(Verdict::Unknown));
    }

    #[test]
    fn ill_typed_points_are_rejected() {
        let r = icheck(&IContext::new(), &t("7"), &pt("([], 7)"), 10);
        assert!(matches!(r, Err(RelError::PointTypeMismatch { .. })));
    }

    #[test]
    fn conditional_and_divergence() {
        assert_eq!(
            interp_ground(&t("if[0](0, 1, 2)"), 3, 50).unwrap(),
            BTreeSet::from([1])
        );
        assert!(interp_ground(&t("fix (\\x:Nat. x)"), 3, 200).unwrap().is_empty());
    }

    #[test]
    fn linear_application() {
        let nn = Ty::arrow(Ty::nat(), Ty::nat());
        let phi = IContext::new()
            .with("f", [pt("([3], 4)")], nn.clone())
            .with("x", [pt("3")], Ty::nat());
        assert_eq!(icheck(&phi, &t("lin f x"), &pt("4"), 50), Ok(Verdict::Proved));
        let two = IContext::new()
            .with("f", [pt("([3, 5], 4)")], nn)
            .with("x", [pt("3"), pt("5")], Ty::nat());
        assert_eq!(icheck(&two, &t("f x"), &pt("4"), 50), Ok(Verdict::Proved));
        assert_eq!(icheck(&two, &t("lin f x"), &pt("4"), 50), Ok(Verdict::Unknown));
    }

    #[test]
    fn stacks() {
        let e: Stack<Bit> = Stack::empty();
        assert_eq!(icheck_stack(&e, &pt("5"), &Ty::nat(), 5, 10), Ok(Verdict::Proved));
        let s = Stack(vec![Frame::Succ]);
        assert_eq!(icheck_stack(&s, &pt("3"), &Ty::nat(), 4, 10), Ok(Verdict::Proved));
        let p = Stack(vec![Frame::Pred]);
        assert_eq!(icheck_stack(&p, &pt("0"), &Ty::nat(), 1, 10), Ok(Verdict::Unknown));
        let a = Stack(vec![Frame::Arg(t("2"))]);
        let ty = Ty::arrow(Ty::nat(), Ty::nat());
        assert_eq!(icheck_stack(&a, &pt("([2], 6)"), &ty, 6, 10), Ok(Verdict::Proved));
        assert_eq!(icheck_stack(&a, &pt("([2, 2], 6)"), &ty, 6, 10), Ok(Verdict::Proved));
        assert_eq!(icheck_stack(&a, &pt("([3], 6)"), &ty, 6, 10), Ok(Verdict::Unknown));
    }

    #[test]
    fn states_agree_with_terms() {
        let c = Command::initial(t("(\\x:Nat. succ[0] x) 3"));
        assert_eq!(icheck_state(&c, 4, 50), Ok(Verdict::Proved));
        assert_eq!(icheck_state(&c, 3, 50), Ok(Verdict::Unknown));
    }

    #[test]
    fn context_addition() {
        let a = IContext::new().with("x", [pt("1")], Ty::nat());
        let b = IContext::new().with("x", [pt("2")], Ty::nat());
        let s = a.add(&b).unwrap();
        assert_eq!(s.0[0].1.len(), 2);
        assert!(a.add(&IContext::new()).is_none());
    }
}
