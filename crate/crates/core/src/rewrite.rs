//! Reduction of terms: the main rules, the projection rules, linear
//! reduction of sums and zeros, closure under evaluation contexts, the
//! leftmost-outermost strategy and multiset rewriting.

use std::rc::Rc;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::differential::{dlet, LinFrame};
use crate::syntax::term::{self, Path, Term};
use crate::syntax::{Bit, Multiset, Ty};
use crate::typing::{infer_with_sums, show_path, TyCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Beta,
    DiffAbs,
    SuccNum,
    PredZero,
    PredSucc,
    IfZero,
    IfSucc,
    LetNum,
    FixUnfold,
    ProjAbs,
    ProjApp,
    ProjSucc,
    ProjPred,
    ProjIfCond,
    ProjIfBranch,
    ProjLetBound,
    ProjLetBody,
    ProjSumZero,
    ProjSumOne,
    ProjSumInner,
    ProjSumOuter,
    ProjFlipTower,
    ProjFlipInner,
    ProjFlipOuter,
    ProjInjSame,
    ProjInjOther,
    ProjInjInner,
    ProjInjOuter,
    ProjProjInner,
    ProjProjOuter,
    ProjDiff,
    DiffProj,
    LinZero,
    LinSum,
}

impl RuleId {
    pub fn is_linear(self) -> bool {
        matches!(self, RuleId::LinZero | RuleId::LinSum)
    }

    pub fn name(self) -> &'static str {
        use RuleId::*;
        match self {
            Beta => "beta",
            DiffAbs => "diff-abs",
            SuccNum => "succ-num",
            PredZero => "pred-zero",
            PredSucc => "pred-succ",
            IfZero => "if-zero",
            IfSucc => "if-succ",
            LetNum => "let-num",
            FixUnfold => "fix",
            ProjAbs => "proj-abs",
            ProjApp => "proj-app",
            ProjSucc => "proj-succ",
            ProjPred => "proj-pred",
            ProjIfCond => "proj-if-cond",
            ProjIfBranch => "proj-if-branch",
            ProjLetBound => "proj-let-bound",
            ProjLetBody => "proj-let-body",
            ProjSumZero => "proj0-sum",
            ProjSumOne => "proj1-sum",
            ProjSumInner => "proj-sum-inner",
            ProjSumOuter => "proj-sum-outer",
            ProjFlipTower => "proj-flip-tower",
            ProjFlipInner => "proj-flip-inner",
            ProjFlipOuter => "proj-flip-outer",
            ProjInjSame => "proj-inj-same",
            ProjInjOther => "proj-inj-other",
            ProjInjInner => "proj-inj-inner",
            ProjInjOuter => "proj-inj-outer",
            ProjProjInner => "proj-proj-inner",
            ProjProjOuter => "proj-proj-outer",
            ProjDiff => "proj-diff",
            DiffProj => "diff-proj",
            LinZero => "lin-zero",
            LinSum => "lin-sum",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A redex occurrence: the rule, where it fires and what replaces the
/// subterm there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub path: Path,
    pub rule: RuleId,
    pub contractum: Term,
}

impl Redex {
    pub fn apply(&self, m: &Term) -> Term {
        m.replace_at(&self.path, self.contractum.clone())
    }
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.rule, show_path(&self.path))
    }
}

fn bx(t: Term) -> Rc<Term> {
    Rc::new(t)
}

/// Rules applicable at the root of `t`. `ctx` types the free variables
/// of `t`; it is consulted only to annotate the zeros some rules create.
pub fn root_rules(ctx: &TyCtx, t: &Term) -> Vec<(RuleId, Term)> {
    let mut out = Vec::new();
    nonlinear_root_rules(ctx, t, &mut out);
    linear_root_rules(t, &mut out);
    out
}

fn nonlinear_root_rules(ctx: &TyCtx, t: &Term, out: &mut Vec<(RuleId, Term)>) {
    use Term::*;
    match t {
        App(f, n) => {
            if let Abs(x, _, m) = &**f {
                out.push((RuleId::Beta, m.subst(x, n)));
            }
        }
        Diff(f) => match &**f {
            Abs(x, a, m) => out.push((RuleId::DiffAbs, Abs(x.clone(), a.d(), bx(dlet(x, m))))),
            Proj(i, d, m) => out.push((RuleId::DiffProj, Proj(*i, d + 1, bx(term::diff((**m).clone()))))),
            _ => {}
        },
        Succ(0, n) => {
            if let Num(k) = **n {
                out.push((RuleId::SuccNum, Num(k + 1)));
            }
        }
        Pred(0, n) => match **n {
            Num(0) => out.push((RuleId::PredZero, Num(0))),
            Num(k) => out.push((RuleId::PredSucc, Num(k - 1))),
            _ => {}
        },
        If {
            depth: 0,
            cond,
            then,
            els,
            ..
        } => match **cond {
            Num(0) => out.push((RuleId::IfZero, (**then).clone())),
            Num(_) => out.push((RuleId::IfSucc, (**els).clone())),
            _ => {}
        },
        Let {
            depth: 0,
            var,
            bound,
            body,
            ..
        } => {
            if let Num(_) = **bound {
                out.push((RuleId::LetNum, body.subst(var, bound)));
            }
        }
        Fix(f) => out.push((RuleId::FixUnfold, term::app((**f).clone(), t.clone()))),
        Proj(i, d, m) => proj_rules(ctx, *i, *d, m, out),
        _ => {}
    }
    if let Proj(_, d, _) = t {
        if let Some(r) = flip_tower(t, *d) {
            out.push((RuleId::ProjFlipTower, r));
        }
    }
}

fn linear_root_rules(t: &Term, out: &mut Vec<(RuleId, Term)>) {
    use Term::*;
    if let Some((frame, c)) = LinFrame::split(t) {
        match c {
            Zero(a) => {
                if let Some(b) = frame.result_type(a) {
                    out.push((RuleId::LinZero, Zero(b)));
                }
            }
            Plus(m0, m1) => out.push((
                RuleId::LinSum,
                term::plus(frame.plug((**m0).clone()), frame.plug((**m1).clone())),
            )),
            _ => {}
        }
    }
}

fn proj_rules(ctx: &TyCtx, i: Bit, d: usize, m: &Term, out: &mut Vec<(RuleId, Term)>) {
    use Term::*;
    let pr = |d: usize, n: &Term| term::proj(i, d, n.clone());
    match m {
        Abs(x, a, n) => out.push((RuleId::ProjAbs, Abs(x.clone(), a.clone(), bx(pr(d, n))))),
        App(f, n) => out.push((RuleId::ProjApp, App(bx(pr(d, f)), n.clone()))),
        Succ(e, n) if d < *e => out.push((RuleId::ProjSucc, Succ(e - 1, bx(pr(d, n))))),
        Pred(e, n) if d < *e => out.push((RuleId::ProjPred, Pred(e - 1, bx(pr(d, n))))),
        If {
            ann,
            depth: e,
            cond,
            then,
            els,
        } => {
            if d < *e {
                out.push((
                    RuleId::ProjIfCond,
                    If {
                        ann: ann.clone(),
                        depth: e - 1,
                        cond: bx(pr(d, cond)),
                        then: then.clone(),
                        els: els.clone(),
                    },
                ));
            } else {
                out.push((
                    RuleId::ProjIfBranch,
                    If {
                        ann: ann.as_ref().and_then(Ty::undo_d),
                        depth: *e,
                        cond: cond.clone(),
                        then: bx(pr(d - e, then)),
                        els: bx(pr(d - e, els)),
                    },
                ));
            }
        }
        Let {
            ann,
            depth: e,
            var,
            bound,
            body,
        } => {
            if d < *e {
                out.push((
                    RuleId::ProjLetBound,
                    Let {
                        ann: ann.clone(),
                        depth: e - 1,
                        var: var.clone(),
                        bound: bx(pr(d, bound)),
                        body: body.clone(),
                    },
                ));
            } else {
                out.push((
                    RuleId::ProjLetBody,
                    Let {
                        ann: ann.as_ref().and_then(Ty::undo_d),
                        depth: *e,
                        var: var.clone(),
                        bound: bound.clone(),
                        body: bx(pr(d - e, body)),
                    },
                ));
            }
        }
        Sum(e, n) => {
            if d == *e {
                let p0 = |j: Bit, k: Bit| term::proj(j, d, term::proj(k, d, (**n).clone()));
                match i {
                    Bit::Zero => out.push((RuleId::ProjSumZero, p0(Bit::Zero, Bit::Zero))),
                    Bit::One => out.push((
                        RuleId::ProjSumOne,
                        term::plus(p0(Bit::One, Bit::Zero), p0(Bit::Zero, Bit::One)),
                    )),
                }
            } else if d < *e {
                out.push((RuleId::ProjSumInner, Sum(e - 1, bx(pr(d, n)))));
            } else {
                out.push((RuleId::ProjSumOuter, Sum(*e, bx(pr(d + 1, n)))));
            }
        }
        Flip(e, l, n) => {
            if d < *e {
                out.push((RuleId::ProjFlipInner, Flip(e - 1, *l, bx(pr(d, n)))));
            } else if e + l + 2 <= d {
                out.push((RuleId::ProjFlipOuter, Flip(*e, *l, bx(pr(d, n)))));
            }
        }
        Inj(j, e, n) => {
            if d == *e {
                if i == *j {
                    out.push((RuleId::ProjInjSame, (**n).clone()));
                } else if let Ok(a) = infer_with_sums(ctx, n) {
                    out.push((RuleId::ProjInjOther, Zero(a)));
                }
            } else if d < *e {
                out.push((RuleId::ProjInjInner, Inj(*j, e - 1, bx(pr(d, n)))));
            } else {
                out.push((RuleId::ProjInjOuter, Inj(*j, *e, bx(pr(d - 1, n)))));
            }
        }
        Proj(j, e, n) => {
            if d < *e {
                out.push((RuleId::ProjProjInner, Proj(*j, e - 1, bx(pr(d, n)))));
            } else {
                out.push((RuleId::ProjProjOuter, Proj(*j, *e, bx(pr(d + 1, n)))));
            }
        }
        Diff(n) if d >= 1 => out.push((RuleId::ProjDiff, term::diff(pr(d - 1, n)))),
        _ => {}
    }
}

/// `π_{i_{l+1}} … π_{i_0} (c^{d,l} M) → π_{i_0} π_{i_{l+1}} … π_{i_1} M`,
/// all projections at depth `d` and exactly `l+2` of them.
fn flip_tower(t: &Term, d: usize) -> Option<Term> {
    let mut bits = Vec::new();
    let mut cur = t;
    while let Term::Proj(i, e, m) = cur {
        if *e != d {
            break;
        }
        bits.push(*i);
        cur = m;
    }
    let Term::Flip(e, l, m) = cur else {
        return None;
    };
    if *e != d || bits.len() != l + 2 {
        return None;
    }
    let order = crate::syntax::word::rcycle(&bits);
    Some(
        order
            .iter()
            .rev()
            .fold((**m).clone(), |acc, &i| term::proj(i, d, acc)),
    )
}

/// Every redex of `m` under evaluation contexts, outermost first and
/// left to right. Evaluation contexts reach every position except the
/// inside of a sum.
pub fn enumerate_redexes(ctx: &TyCtx, m: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut ctx = ctx.clone();
    walk(&mut ctx, m, &mut Vec::new(), &mut |_, _| true, &mut out);
    out
}

/// What [`walk`] asks its filter about a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Probe {
    /// Whether to visit the position and its subterms at all.
    Enter,
    Linear,
    NonLinear,
}

fn walk(
    ctx: &mut TyCtx,
    t: &Term,
    path: &mut Path,
    keep: &mut dyn FnMut(&Path, Probe) -> bool,
    out: &mut Vec<Redex>,
) {
    if !keep(path, Probe::Enter) {
        return;
    }
    let mut found = Vec::new();
    if keep(path, Probe::NonLinear) {
        nonlinear_root_rules(ctx, t, &mut found);
    }
    if keep(path, Probe::Linear) {
        linear_root_rules(t, &mut found);
    }
    out.extend(found.into_iter().map(|(rule, contractum)| Redex {
        path: path.clone(),
        rule,
        contractum,
    }));
    if let Term::Plus(..) = t {
        return;
    }
    for (k, c) in t.children().into_iter().enumerate() {
        let binder = match t {
            Term::Abs(x, a, _) => Some((x.as_str(), a.clone())),
            Term::Let { var, .. } if k == 1 => Some((var.as_str(), Ty::nat())),
            _ => None,
        };
        if let Some((x, a)) = &binder {
            ctx.push(x, a.clone());
        }
        path.push(k);
        walk(ctx, c, path, keep, out);
        path.pop();
        if binder.is_some() {
            ctx.pop();
        }
    }
}

/// Whether the strategy may use `rule`. The reverse orientations of the
/// projection/projection and projection/derivative commutations are left
/// out so that they cannot undo each other.
fn strategy_allows(rule: RuleId) -> bool {
    !matches!(rule, RuleId::ProjProjOuter | RuleId::DiffProj)
}

/// Leftmost-outermost redex of `m`, if any.
pub fn step_strategy(ctx: &TyCtx, m: &Term) -> Option<Redex> {
    first_redex(ctx, m, &mut Vec::new())
}

fn first_redex(ctx: &TyCtx, t: &Term, path: &mut Path) -> Option<Redex> {
    if let Some((rule, contractum)) = root_rules(ctx, t)
        .into_iter()
        .find(|(r, _)| strategy_allows(*r))
    {
        return Some(Redex {
            path: path.clone(),
            rule,
            contractum,
        });
    }
    if let Term::Plus(..) = t {
        return None;
    }
    for (k, c) in t.children().into_iter().enumerate() {
        let mut inner = ctx.clone();
        match t {
            Term::Abs(x, a, _) => inner.push(x, a.clone()),
            Term::Let { var, .. } if k == 1 => inner.push(var, Ty::nat()),
            _ => {}
        }
        path.push(k);
        let r = first_redex(&inner, c, path);
        path.pop();
        if r.is_some() {
            return r;
        }
    }
    None
}

/// One step of the rewriting trace produced by [`normalize`].
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub redex: Redex,
    pub before: Term,
    pub after: Term,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {} | {}",
            self.redex.rule,
            show_path(&self.redex.path),
            self.before,
            self.after
        )
    }
}

/// Runs the strategy for at most `steps` steps.
pub fn normalize(ctx: &TyCtx, m: &Term, steps: usize) -> Vec<TraceStep> {
    let mut out = Vec::new();
    let mut cur = m.clone();
    for _ in 0..steps {
        let Some(r) = step_strategy(ctx, &cur) else {
            break;
        };
        let next = r.apply(&cur);
        out.push(TraceStep {
            redex: r,
            before: cur,
            after: next.clone(),
        });
        cur = next;
    }
    out
}

/// Scheduling key for multiset rewriting: smaller terms first, ties
/// broken by printed form.
fn schedule_key(t: &Term) -> (usize, String) {
    (t.size(), t.to_string())
}

/// One multiset rewriting step over closed terms: drop a zero, else
/// split a sum, else reduce the first reducible element in schedule
/// order. `None` when no move applies.
pub fn msrs_step(s: &Multiset<Term>) -> Option<Multiset<Term>> {
    let ctx = TyCtx::new();
    if let Some(z) = s.support().find(|t| matches!(t, Term::Zero(_))).cloned() {
        let mut out = s.clone();
        out.remove_one(&z);
        return Some(out);
    }
    if let Some(p) = s.support().find(|t| matches!(t, Term::Plus(..))).cloned() {
        let mut out = s.clone();
        out.remove_one(&p);
        if let Term::Plus(a, b) = p {
            out.insert(Rc::unwrap_or_clone(a));
            out.insert(Rc::unwrap_or_clone(b));
        }
        return Some(out);
    }
    let mut elems: Vec<&Term> = s.support().collect();
    elems.sort_by_cached_key(|t| schedule_key(t));
    for t in elems {
        if let Some(r) = step_strategy(&ctx, t) {
            let mut out = s.clone();
            out.remove_one(t);
            out.insert(r.apply(t));
            return Some(out);
        }
    }
    None
}

/// Outcome of a bounded reachability query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reach {
    pub reachable: bool,
    /// The search was cut by its state budget before it was exhaustive.
    pub exhausted: bool,
    /// Number of terms expanded.
    pub explored: usize,
}

/// Default cap on the number of distinct terms a reachability query
/// explores.
pub const REACH_STATE_BUDGET: usize = 200_000;

/// Normal form for comparing reducts: α-canonical, with sums flattened
/// and their summands sorted.
pub fn comparison_form(t: &Term) -> Term {
    fn ac(t: Term) -> Term {
        match t {
            Term::Plus(..) => {
                let mut parts: Vec<Term> = t.summands().into_iter().map(|s| ac(s.clone())).collect();
                parts.sort();
                let mut it = parts.into_iter();
                let first = it.next().expect("a sum has summands");
                it.fold(first, term::plus)
            }
            mut other => {
                for c in other.children_mut() {
                    *c = ac(std::mem::replace(c, Term::Num(0)));
                }
                other
            }
        }
    }
    ac(t.canonical())
}

/// Whether `m →* n` using at most `fuel` non-linear steps. Linear steps
/// (lifting sums and zeros out of linear contexts) are free: they only
/// move additive structure and always terminate.
pub fn reduces_to(m: &Term, n: &Term, fuel: usize) -> Reach {
    reduces_to_within(&TyCtx::new(), m, n, fuel, &[], REACH_STATE_BUDGET)
}

/// [`reduces_to`] restricted to redexes located at or below `focus`,
/// plus linear redexes on the path from the root to `focus`. At most
/// `budget` distinct terms are explored.
pub fn reduces_to_within(
    ctx: &TyCtx,
    m: &Term,
    n: &Term,
    fuel: usize,
    focus: &[usize],
    budget: usize,
) -> Reach {
    search(ctx, m, n, fuel, budget, &|_, p, q| in_scope(focus, p, q))
}

/// Like [`reduces_to_within`], but below `focus` only redexes in head
/// position are considered: the search never enters the body of an
/// abstraction or `let`, the branches of a conditional, or the argument
/// of an application.
pub fn reduces_to_at_head(
    ctx: &TyCtx,
    m: &Term,
    n: &Term,
    fuel: usize,
    focus: &[usize],
    budget: usize,
) -> Reach {
    search(ctx, m, n, fuel, budget, &|t, p, q| {
        in_scope(focus, p, q) && (p.len() <= focus.len() || is_head_path(t, focus, p))
    })
}

fn in_scope(focus: &[usize], p: &Path, q: Probe) -> bool {
    p.starts_with(focus) || (focus.starts_with(p) && q != Probe::NonLinear)
}

fn is_head_path(t: &Term, focus: &[usize], p: &Path) -> bool {
    let Some(mut node) = t.at(focus) else {
        return false;
    };
    for &k in &p[focus.len()..] {
        let blocked = match node {
            Term::Abs(..) => true,
            Term::App(..) => k == 1,
            Term::If { .. } | Term::Let { .. } => k != 0,
            _ => false,
        };
        if blocked {
            return false;
        }
        node = node.children()[k];
    }
    true
}

fn search(
    ctx: &TyCtx,
    m: &Term,
    n: &Term,
    fuel: usize,
    budget: usize,
    scope: &dyn Fn(&Term, &Path, Probe) -> bool,
) -> Reach {
    let goal = comparison_form(n);
    let goal_print = fingerprint(&goal);
    let start = comparison_form(m);
    if start == goal {
        return Reach {
            reachable: true,
            exhausted: false,
            explored: 0,
        };
    }
    let mut best: HashMap<u128, usize> = HashMap::new();
    let mut queue = BinaryHeap::new();
    let mut tick = 0usize;
    queue.push(Reverse((0usize, distance(m, n), tick, m.clone())));
    best.insert(fingerprint(&start), 0);
    let mut exhausted = false;
    let mut explored = 0;
    while let Some(Reverse((cost, _, _, t))) = queue.pop() {
        explored += 1;
        let mut keep = |p: &Path, q: Probe| scope(&t, p, q);
        let mut redexes = Vec::new();
        walk(&mut ctx.clone(), &t, &mut Vec::new(), &mut keep, &mut redexes);
        for r in redexes {
            let c = cost + usize::from(!r.rule.is_linear());
            if c > fuel {
                continue;
            }
            let next = r.apply(&t);
            let print = fingerprint(&next);
            if print == goal_print && comparison_form(&next) == goal {
                return Reach {
                    reachable: true,
                    exhausted: false,
                    explored,
                };
            }
            if best.get(&print).is_some_and(|&b| b <= c) {
                continue;
            }
            if best.len() >= budget {
                exhausted = true;
                continue;
            }
            tick += 1;
            queue.push(Reverse((c, distance(&next, n), tick, next)));
            best.insert(print, c);
        }
    }
    Reach {
        reachable: false,
        exhausted,
        explored,
    }
}

/// A 128-bit hash of the comparison form of `t`, computed without
/// building it: bound variables hash by binding depth, `If`/`Let`
/// decorations are skipped and the summands of a sum are hashed as a
/// sorted list.
fn fingerprint(t: &Term) -> u128 {
    let p = node_print(t, &mut Vec::new());
    (u128::from(p.0) << 64) | u128::from(p.1)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Print(u64, u64);

impl Print {
    fn new(tag: u64) -> Print {
        Print(tag ^ 0x243f_6a88_85a3_08d3, tag ^ 0x1319_8a2e_0370_7344).add(tag)
    }

    fn add(self, v: u64) -> Print {
        Print(
            (self.0.rotate_left(5) ^ v).wrapping_mul(0x517c_c1b7_2722_0a95),
            (self.1.rotate_left(7) ^ v).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        )
    }

    fn join(self, other: Print) -> Print {
        self.add(other.0).add(other.1)
    }

    fn name(self, x: &str) -> Print {
        x.bytes().fold(self.add(x.len() as u64), |p, b| p.add(u64::from(b)))
    }

    fn ty(self, a: &Ty) -> Print {
        match a {
            Ty::Ground(d) => self.add(1).add(*d as u64),
            Ty::Arrow(l, r) => self.add(2).ty(l).ty(r),
        }
    }
}

fn node_print<'t>(t: &'t Term, env: &mut Vec<&'t str>) -> Print {
    use Term::*;
    let tag = match t {
        Var(_) => 1,
        Abs(..) => 2,
        App(..) => 3,
        Fix(_) => 4,
        Num(_) => 5,
        Succ(..) => 6,
        Pred(..) => 7,
        If { .. } => 8,
        Let { .. } => 9,
        Diff(_) => 10,
        Proj(..) => 11,
        Inj(..) => 12,
        Sum(..) => 13,
        Flip(..) => 14,
        Zero(_) => 15,
        Plus(..) => 16,
    };
    let p = Print::new(tag);
    match t {
        Var(x) => match env.iter().rposition(|y| y == x) {
            Some(level) => p.add(0).add(level as u64),
            None => p.add(1).name(x),
        },
        Abs(x, a, m) => {
            env.push(x);
            let body = node_print(m, env);
            env.pop();
            p.ty(a).join(body)
        }
        Let {
            depth,
            var,
            bound,
            body,
            ..
        } => {
            let b = node_print(bound, env);
            env.push(var);
            let m = node_print(body, env);
            env.pop();
            p.add(*depth as u64).join(b).join(m)
        }
        Plus(..) => {
            let mut parts: Vec<Print> = t.summands().into_iter().map(|s| node_print(s, env)).collect();
            parts.sort_unstable();
            parts.into_iter().fold(p.add(parts_len(t)), Print::join)
        }
        _ => {
            let p = match t {
                Num(v) => p.add(*v),
                Succ(d, _) | Pred(d, _) | Sum(d, _) | If { depth: d, .. } => p.add(*d as u64),
                Proj(i, d, _) | Inj(i, d, _) => p.add(u64::from(*i == Bit::One)).add(*d as u64),
                Flip(d, l, _) => p.add(*d as u64).add(*l as u64),
                Zero(a) => p.ty(a),
                _ => p,
            };
            t.children().into_iter().fold(p, |p, c| p.join(node_print(c, env)))
        }
    }
}

fn parts_len(t: &Term) -> u64 {
    t.summands().len() as u64
}

/// Number of nodes of `a` and `b` outside their common top part,
/// ignoring variable names. Among terms of equal cost, the reachability
/// search expands those closer to the goal first.
fn distance(a: &Term, b: &Term) -> usize {
    if a == b {
        return 0;
    }
    let (ca, cb) = (a.children(), b.children());
    if ca.len() == cb.len() && same_head(a, b) {
        ca.iter().zip(&cb).map(|(x, y)| distance(x, y)).sum()
    } else {
        a.size() + b.size()
    }
}

fn same_head(a: &Term, b: &Term) -> bool {
    use Term::*;
    match (a, b) {
        (Var(_), Var(_)) => true,
        (Abs(_, s, _), Abs(_, t, _)) => s == t,
        (Num(u), Num(v)) => u == v,
        (Succ(d, _), Succ(e, _)) | (Pred(d, _), Pred(e, _)) | (Sum(d, _), Sum(e, _)) => d == e,
        (If { depth: d, .. }, If { depth: e, .. }) => d == e,
        (Let { depth: d, .. }, Let { depth: e, .. }) => d == e,
        (Proj(i, d, _), Proj(j, e, _)) | (Inj(i, d, _), Inj(j, e, _)) => i == j && d == e,
        (Flip(d, l, _), Flip(e, k, _)) => d == e && l == k,
        (Zero(s), Zero(t)) => s == t,
        (App(..), App(..)) | (Fix(_), Fix(_)) | (Diff(_), Diff(_)) | (Plus(..), Plus(..)) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn rules_at_root(s: &str) -> Vec<(RuleId, Term)> {
        root_rules(&TyCtx::new(), &p(s))
    }

    #[test]
    fn main_rules() {
        assert_eq!(rules_at_root("(\\x:Nat. succ[0] x) 3"), vec![(RuleId::Beta, p("succ[0] 3"))]);
        assert_eq!(rules_at_root("succ[0] 3"), vec![(RuleId::SuccNum, p("4"))]);
        assert_eq!(rules_at_root("pred[0] 0"), vec![(RuleId::PredZero, p("0"))]);
        assert_eq!(rules_at_root("pred[0] 5"), vec![(RuleId::PredSucc, p("4"))]);
        assert_eq!(rules_at_root("if[0](0, 1, 2)"), vec![(RuleId::IfZero, p("1"))]);
        assert_eq!(rules_at_root("if[0](7, 1, 2)"), vec![(RuleId::IfSucc, p("2"))]);
        assert_eq!(rules_at_root("let[0](y = 4) succ[0] y"), vec![(RuleId::LetNum, p("succ[0] 4"))]);
        assert_eq!(
            rules_at_root("fix (\\x:Nat. x)"),
            vec![(RuleId::FixUnfold, p("(\\x:Nat. x) (fix (\\x:Nat. x))"))]
        );
    }

    #[test]
    fn projection_over_sum() {
        assert_eq!(
            rules_at_root("proj[0,0] (sum[0] m)"),
            vec![(RuleId::ProjSumZero, p("proj[0,0] (proj[0,0] m)"))]
        );
        assert_eq!(
            rules_at_root("proj[1,0] (sum[0] m)"),
            vec![(
                RuleId::ProjSumOne,
                p("proj[1,0] (proj[0,0] m) + proj[0,0] (proj[1,0] m)")
            )]
        );
    }

    #[test]
    fn projection_over_injection() {
        assert_eq!(rules_at_root("proj[1,0] (inj[1,0] 3)"), vec![(RuleId::ProjInjSame, p("3"))]);
        assert_eq!(
            rules_at_root("proj[0,0] (inj[1,0] 3)"),
            vec![(RuleId::ProjInjOther, Term::Zero(Ty::nat()))]
        );
        assert_eq!(
            rules_at_root("proj[0,1] (inj[1,0] m)"),
            vec![(RuleId::ProjInjOuter, p("inj[1,0] (proj[0,0] m)"))]
        );
    }

    #[test]
    fn projection_towers() {
        assert_eq!(
            rules_at_root("proj[0,0] (proj[0,1] m)"),
            vec![(RuleId::ProjProjInner, p("proj[0,0] (proj[0,0] m)"))]
        );
        let r = rules_at_root("proj[1,0] (proj[0,0] (flip[0,0] m))");
        assert!(r.contains(&(RuleId::ProjFlipTower, p("proj[0,0] (proj[1,0] m)"))));
    }

    #[test]
    fn linear_rules() {
        assert_eq!(
            rules_at_root("succ[1] (a + b)"),
            vec![(RuleId::LinSum, p("succ[1] a + succ[1] b"))]
        );
        assert_eq!(
            rules_at_root("proj[0,0] zero:D Nat"),
            vec![(RuleId::LinZero, p("zero:Nat"))]
        );
    }

    #[test]
    fn no_reduction_inside_sums() {
        let m = p("succ[0] 1 + succ[0] 2");
        assert!(enumerate_redexes(&TyCtx::new(), &m).is_empty());
    }

    #[test]
    fn worked_example_derivative_of_twice() {
        let m = p("D (\\f:(Nat -> Nat). \\x:Nat. f (f x))");
        let target = p("\\f:(Nat -> D Nat). \\x:Nat. (sum[0] (D f)) ((sum[0] (D f)) (inj[0,0] x))");
        let trace = normalize(&TyCtx::new(), &m, 10);
        assert!(trace.last().unwrap().after.alpha_eq(&target));
    }

    #[test]
    fn reachability() {
        let m = p("(\\x:Nat. succ[0] x) 3");
        assert!(reduces_to(&m, &p("4"), 5).reachable);
        assert!(reduces_to(&m, &m, 0).reachable);
        assert!(!reduces_to(&m, &p("5"), 5).reachable);
        assert!(!reduces_to(&m, &p("4"), 1).reachable);
    }

    #[test]
    fn msrs_prefers_zeros_then_sums() {
        let s: Multiset<Term> = [p("zero:Nat"), p("1 + 2")].into_iter().collect();
        let s1 = msrs_step(&s).unwrap();
        assert_eq!(s1, [p("1 + 2")].into_iter().collect());
        let s2 = msrs_step(&s1).unwrap();
        assert_eq!(s2, [p("1"), p("2")].into_iter().collect());
        assert_eq!(msrs_step(&s2), None);
    }
}
