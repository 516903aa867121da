//! Goal-directed search for intersection typing derivations.
//!
//! Points are searched as patterns with logic variables for unknown bits,
//! numerals and multisets, bound on a trail and undone on backtracking.
//! The search is written in continuation-passing style: every rule calls
//! its continuation once per way it can succeed, and reports success as
//! soon as one continuation does.
//!
//! Applications are handled along spines. When the head of a spine is an
//! abstraction, the argument is not typed up front; instead each use of
//! the bound variable derives the argument at the point that use needs,
//! which is the application rule composed with the abstraction rule.
//! `fix M` is handled as the spine `M (fix M)`.

use std::rc::Rc;

use super::point::Point;
use crate::syntax::{Bit, Name, Term, Ty, Word};
use crate::typing::{infer_with_sums, TyCtx, TypeError};

type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BitT {
    K(Bit),
    V(VarId),
}

/// `var + off`, or the constant `off` when there is no variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct NatT {
    var: Option<VarId>,
    off: u64,
}

impl NatT {
    fn constant(v: u64) -> NatT {
        NatT { var: None, off: v }
    }

    fn plus(self, k: u64) -> NatT {
        NatT {
            var: self.var,
            off: self.off + k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Pat {
    Nat(Vec<BitT>, NatT),
    Arrow(MsT, Box<Pat>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum MsT {
    Var(VarId),
    List(Vec<Pat>),
}

enum Bind {
    Bit(BitT),
    Nat(NatT),
    Ms(MsT),
}

pub(crate) fn pattern_of(p: &Point) -> Pat {
    match p {
        Point::Nat(w, v) => Pat::Nat(w.0.iter().map(|&b| BitT::K(b)).collect(), NatT::constant(*v)),
        Point::Arrow(m, b) => Pat::Arrow(
            MsT::List(m.iter().map(pattern_of).collect()),
            Box::new(pattern_of(b)),
        ),
    }
}

fn leaf_word(p: &Pat) -> &Vec<BitT> {
    match p {
        Pat::Nat(w, _) => w,
        Pat::Arrow(_, b) => leaf_word(b),
    }
}

fn with_leaf_word(p: &Pat, w: Vec<BitT>) -> Pat {
    match p {
        Pat::Nat(_, n) => Pat::Nat(w, *n),
        Pat::Arrow(m, b) => Pat::Arrow(m.clone(), Box::new(with_leaf_word(b, w))),
    }
}

fn prefix(bits: &[BitT], p: &Pat) -> Pat {
    let mut w = bits.to_vec();
    w.extend(leaf_word(p).iter().copied());
    with_leaf_word(p, w)
}

// ---------------------------------------------------------------------
// Typed term arena

pub(crate) type NodeId = usize;

#[derive(Clone, Debug)]
enum Kind {
    Var(Name),
    Abs(Name, NodeId),
    App(NodeId, NodeId),
    Fix(NodeId),
    Num(u64),
    Succ(NodeId),
    Pred(NodeId),
    If {
        depth: usize,
        cond: NodeId,
        then: NodeId,
        els: NodeId,
    },
    Let {
        depth: usize,
        var: Name,
        bound: NodeId,
        body: NodeId,
    },
    Diff(NodeId),
    Proj(Bit, usize, NodeId),
    Inj(Bit, usize, NodeId),
    Sum(usize, NodeId),
    Flip(usize, usize, NodeId),
    Zero,
    Plus(NodeId, NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    kind: Kind,
    ty: Ty,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Arena {
    nodes: Vec<Node>,
}

impl Arena {
    pub(crate) fn add(&mut self, ctx: &mut TyCtx, t: &Term) -> Result<NodeId, TypeError> {
        let ty = infer_with_sums(ctx, t)?;
        let kind = match t {
            Term::Var(x) => Kind::Var(x.clone()),
            Term::Abs(x, a, body) => {
                ctx.push(x, a.clone());
                let b = self.add(ctx, body);
                ctx.pop();
                Kind::Abs(x.clone(), b?)
            }
            Term::App(f, n) => Kind::App(self.add(ctx, f)?, self.add(ctx, n)?),
            Term::Fix(m) => Kind::Fix(self.add(ctx, m)?),
            Term::Num(v) => Kind::Num(*v),
            Term::Succ(_, m) => Kind::Succ(self.add(ctx, m)?),
            Term::Pred(_, m) => Kind::Pred(self.add(ctx, m)?),
            Term::If {
                depth,
                cond,
                then,
                els,
                ..
            } => Kind::If {
                depth: *depth,
                cond: self.add(ctx, cond)?,
                then: self.add(ctx, then)?,
                els: self.add(ctx, els)?,
            },
            Term::Let {
                depth,
                var,
                bound,
                body,
                ..
            } => {
                let bound = self.add(ctx, bound)?;
                ctx.push(var, Ty::nat());
                let body = self.add(ctx, body);
                ctx.pop();
                Kind::Let {
                    depth: *depth,
                    var: var.clone(),
                    bound,
                    body: body?,
                }
            }
            Term::Diff(m) => Kind::Diff(self.add(ctx, m)?),
            Term::Proj(i, d, m) => Kind::Proj(*i, *d, self.add(ctx, m)?),
            Term::Inj(i, d, m) => Kind::Inj(*i, *d, self.add(ctx, m)?),
            Term::Sum(d, m) => Kind::Sum(*d, self.add(ctx, m)?),
            Term::Flip(d, l, m) => Kind::Flip(*d, *l, self.add(ctx, m)?),
            Term::Zero(_) => Kind::Zero,
            Term::Plus(a, b) => Kind::Plus(self.add(ctx, a)?, self.add(ctx, b)?),
        };
        self.nodes.push(Node { kind, ty });
        Ok(self.nodes.len() - 1)
    }

    pub(crate) fn ty(&self, n: NodeId) -> &Ty {
        &self.nodes[n].ty
    }
}

// ---------------------------------------------------------------------
// Environments and slots

#[derive(Clone, Default)]
pub(crate) struct Env(Option<Rc<EnvCell>>);

struct EnvCell {
    name: Name,
    slot: usize,
    next: Env,
}

impl Env {
    pub(crate) fn extend(&self, name: &str, slot: usize) -> Env {
        Env(Some(Rc::new(EnvCell {
            name: name.to_string(),
            slot,
            next: self.clone(),
        })))
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        let mut cur = &self.0;
        while let Some(cell) = cur {
            if cell.name == name {
                return Some(cell.slot);
            }
            cur = &cell.next.0;
        }
        None
    }
}

/// An argument waiting on a spine, with the bits that `D` heads put in
/// front of every point it is derived at (outermost first).
#[derive(Clone)]
pub(crate) struct SpineArg {
    pub(crate) node: NodeId,
    pub(crate) env: Env,
    pub(crate) tags: Vec<BitT>,
}

enum Slot {
    /// A variable with a fixed multiset, every element of which must be
    /// used exactly once.
    Budget(Vec<Pat>),
    /// A variable whose multiset is unknown and is read off its uses.
    Collect { var: VarId, uses: Vec<Pat> },
    /// A `let`-bound variable: any number of uses, all at this point.
    LetBound(Pat),
    /// A variable bound to an argument that is derived afresh at each
    /// use. `used[j]` records whether the 1 of tag `j` has been spent.
    Arg { arg: SpineArg, used: Vec<bool> },
}

/// A stack frame with its terms in the arena.
#[derive(Clone)]
pub(crate) enum FrameN {
    Arg(NodeId),
    Succ,
    Pred,
    If(Vec<Bit>, NodeId, NodeId),
    Let(Vec<Bit>, Name, NodeId),
    Diff(Bit),
}

// ---------------------------------------------------------------------
// The solver

pub(crate) struct Solver<'a> {
    arena: &'a Arena,
    binds: Vec<Option<Bind>>,
    trail: Vec<VarId>,
    slots: Vec<Slot>,
    fuel: usize,
    visits: usize,
    visit_budget: usize,
    pub(crate) aborted: bool,
    max_arity: usize,
}

type Cont<'k, 'a> = &'k mut dyn FnMut(&mut Solver<'a>) -> bool;

impl<'a> Solver<'a> {
    pub(crate) fn new(arena: &'a Arena, fuel: usize, max_arity: usize, visit_budget: usize) -> Self {
        Solver {
            arena,
            binds: Vec::new(),
            trail: Vec::new(),
            slots: Vec::new(),
            fuel,
            visits: 0,
            visit_budget,
            aborted: false,
            max_arity,
        }
    }

    pub(crate) fn visits(&self) -> usize {
        self.visits
    }

    // --- store -------------------------------------------------------

    fn fresh(&mut self) -> VarId {
        self.binds.push(None);
        self.binds.len() - 1
    }

    pub(crate) fn fresh_nat(&mut self) -> NatT {
        NatT {
            var: Some(self.fresh()),
            off: 0,
        }
    }

    fn fresh_pat(&mut self, a: &Ty) -> Pat {
        match a {
            Ty::Ground(d) => {
                let w = (0..*d).map(|_| BitT::V(self.fresh())).collect();
                Pat::Nat(w, self.fresh_nat())
            }
            Ty::Arrow(_, b) => {
                let m = MsT::Var(self.fresh());
                Pat::Arrow(m, Box::new(self.fresh_pat(b)))
            }
        }
    }

    fn bind(&mut self, v: VarId, b: Bind) {
        self.binds[v] = Some(b);
        self.trail.push(v);
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail entry");
            self.binds[v] = None;
        }
    }

    fn walk_bit(&self, b: BitT) -> BitT {
        match b {
            BitT::V(v) => match &self.binds[v] {
                Some(Bind::Bit(x)) => self.walk_bit(*x),
                _ => b,
            },
            k => k,
        }
    }

    fn walk_nat(&self, n: NatT) -> NatT {
        match n.var {
            Some(v) => match &self.binds[v] {
                Some(Bind::Nat(m)) => self.walk_nat(*m).plus(n.off),
                _ => n,
            },
            None => n,
        }
    }

    fn walk_ms(&self, m: &MsT) -> MsT {
        match m {
            MsT::Var(v) => match &self.binds[*v] {
                Some(Bind::Ms(x)) => self.walk_ms(x),
                _ => m.clone(),
            },
            l => l.clone(),
        }
    }

    fn zonk(&self, p: &Pat) -> Pat {
        match p {
            Pat::Nat(w, n) => Pat::Nat(
                w.iter().map(|&b| self.walk_bit(b)).collect(),
                self.walk_nat(*n),
            ),
            Pat::Arrow(m, b) => {
                let m = match self.walk_ms(m) {
                    MsT::List(l) => MsT::List(l.iter().map(|p| self.zonk(p)).collect()),
                    v => v,
                };
                Pat::Arrow(m, Box::new(self.zonk(b)))
            }
        }
    }

    #[allow(dead_code)]
    pub(crate) fn to_point(&self, p: &Pat) -> Option<Point> {
        match self.zonk(p) {
            Pat::Nat(w, n) => {
                let bits = w
                    .iter()
                    .map(|b| match b {
                        BitT::K(b) => Some(*b),
                        BitT::V(_) => None,
                    })
                    .collect::<Option<Vec<_>>>()?;
                if n.var.is_some() {
                    return None;
                }
                Some(Point::Nat(Word(bits), n.off))
            }
            Pat::Arrow(MsT::List(l), b) => {
                let m = l.iter().map(|p| self.to_point(p)).collect::<Option<Vec<_>>>()?;
                Some(Point::arrow(m, self.to_point(&b)?))
            }
            Pat::Arrow(MsT::Var(_), _) => None,
        }
    }

    fn unify_bit(&mut self, a: BitT, b: BitT) -> bool {
        match (self.walk_bit(a), self.walk_bit(b)) {
            (BitT::K(x), BitT::K(y)) => x == y,
            (BitT::V(v), o) | (o, BitT::V(v)) => {
                if o != BitT::V(v) {
                    self.bind(v, Bind::Bit(o));
                }
                true
            }
        }
    }

    pub(crate) fn unify_nat(&mut self, a: NatT, b: NatT) -> bool {
        let (a, b) = (self.walk_nat(a), self.walk_nat(b));
        match (a.var, b.var) {
            (None, None) => a.off == b.off,
            (Some(v), None) => {
                if b.off < a.off {
                    return false;
                }
                self.bind(v, Bind::Nat(NatT::constant(b.off - a.off)));
                true
            }
            (None, Some(_)) => self.unify_nat(b, a),
            (Some(v), Some(w)) if v == w => a.off == b.off,
            (Some(v), Some(w)) => {
                if a.off <= b.off {
                    self.bind(
                        v,
                        Bind::Nat(NatT {
                            var: Some(w),
                            off: b.off - a.off,
                        }),
                    );
                } else {
                    self.bind(
                        w,
                        Bind::Nat(NatT {
                            var: Some(v),
                            off: a.off - b.off,
                        }),
                    );
                }
                true
            }
        }
    }

    /// `n - 1`, binding `n`'s variable to a successor if needed.
    fn nat_pred(&mut self, n: NatT) -> Option<NatT> {
        let n = self.walk_nat(n);
        if n.off > 0 {
            return Some(NatT {
                var: n.var,
                off: n.off - 1,
            });
        }
        let v = n.var?;
        let w = self.fresh_nat();
        self.bind(v, Bind::Nat(w.plus(1)));
        Some(w)
    }

    fn unify_pat(&mut self, p: &Pat, q: &Pat, k: Cont<'_, 'a>) -> bool {
        match (p, q) {
            (Pat::Nat(w1, n1), Pat::Nat(w2, n2)) => {
                if w1.len() != w2.len() {
                    return false;
                }
                let mark = self.mark();
                let ok = w1.iter().zip(w2).all(|(a, b)| self.unify_bit(*a, *b))
                    && self.unify_nat(*n1, *n2);
                if ok && k(self) {
                    return true;
                }
                self.undo(mark);
                false
            }
            (Pat::Arrow(m1, c1), Pat::Arrow(m2, c2)) => {
                let (m1, m2) = (m1.clone(), m2.clone());
                self.unify_pat(c1, c2, &mut |s| s.unify_ms(&m1, &m2, k))
            }
            _ => false,
        }
    }

    fn unify_ms(&mut self, a: &MsT, b: &MsT, k: Cont<'_, 'a>) -> bool {
        match (self.walk_ms(a), self.walk_ms(b)) {
            (MsT::Var(v), MsT::Var(w)) if v == w => k(self),
            (MsT::Var(v), other) | (other, MsT::Var(v)) => {
                let mark = self.mark();
                self.bind(v, Bind::Ms(other));
                if k(self) {
                    return true;
                }
                self.undo(mark);
                false
            }
            (MsT::List(l1), MsT::List(l2)) => {
                if l1.len() != l2.len() {
                    return false;
                }
                self.unify_lists(&l1, l2, k)
            }
        }
    }

    /// Tries every bijection between the two lists.
    fn unify_lists(&mut self, a: &[Pat], b: Vec<Pat>, k: Cont<'_, 'a>) -> bool {
        let Some((first, rest)) = a.split_first() else {
            return k(self);
        };
        let mut tried: Vec<Pat> = Vec::new();
        for j in 0..b.len() {
            let z = self.zonk(&b[j]);
            if tried.contains(&z) {
                continue;
            }
            tried.push(z);
            let mut others = b.clone();
            let bj = others.remove(j);
            if self.unify_pat(first, &bj, &mut |s| s.unify_lists(rest, others.clone(), k)) {
                return true;
            }
            if self.aborted {
                return false;
            }
        }
        false
    }

    // --- slots -------------------------------------------------------

    pub(crate) fn push_slot_budget(&mut self, elems: Vec<Pat>) -> usize {
        self.slots.push(Slot::Budget(elems));
        self.slots.len() - 1
    }

    pub(crate) fn push_slot_let(&mut self, p: Pat) -> usize {
        self.slots.push(Slot::LetBound(p));
        self.slots.len() - 1
    }

    pub(crate) fn pop_slot(&mut self) {
        self.slots.pop();
    }

    /// The check made when the binder of `sid` goes out of scope.
    fn close_slot(&mut self, sid: usize, k: Cont<'_, 'a>) -> bool {
        match &self.slots[sid] {
            Slot::Budget(rest) => rest.is_empty() && k(self),
            Slot::LetBound(_) => k(self),
            Slot::Collect { var, uses } => {
                let (var, uses) = (*var, uses.clone());
                self.unify_ms(&MsT::Var(var), &MsT::List(uses), k)
            }
            Slot::Arg { arg, used } => {
                let unspent: Vec<BitT> = arg
                    .tags
                    .iter()
                    .zip(used)
                    .filter(|(_, u)| !**u)
                    .map(|(t, _)| *t)
                    .collect();
                let mark = self.mark();
                if unspent.iter().all(|t| self.unify_bit(*t, BitT::K(Bit::Zero))) && k(self) {
                    return true;
                }
                self.undo(mark);
                false
            }
        }
    }

    /// Checks that every top-level budget has been spent.
    pub(crate) fn budgets_spent(&self, slots: &[usize]) -> bool {
        slots
            .iter()
            .all(|&s| matches!(&self.slots[s], Slot::Budget(r) if r.is_empty()))
    }

    // --- derivations -------------------------------------------------

    pub(crate) fn derive(&mut self, node: NodeId, env: &Env, target: Pat, k: Cont<'_, 'a>) -> bool {
        self.derive_spine(node, env, Vec::new(), target, k)
    }

    /// Derives `node args : target`.
    pub(crate) fn derive_spine(
        &mut self,
        node: NodeId,
        env: &Env,
        args: Vec<SpineArg>,
        target: Pat,
        k: Cont<'_, 'a>,
    ) -> bool {
        if self.aborted {
            return false;
        }
        if self.visits >= self.visit_budget {
            self.aborted = true;
            return false;
        }
        self.visits += 1;
        if self.fuel == 0 {
            return false;
        }
        self.fuel -= 1;
        let ok = self.derive_node(node, env, args, target, k);
        if !ok {
            self.fuel += 1;
        }
        ok
    }

    fn derive_node(
        &mut self,
        node: NodeId,
        env: &Env,
        mut args: Vec<SpineArg>,
        target: Pat,
        k: Cont<'_, 'a>,
    ) -> bool {
        let arena = self.arena;
        match &arena.nodes[node].kind {
            Kind::Var(x) => match env.lookup(x) {
                Some(sid) => self.use_var(sid, args, target, k),
                None => false,
            },
            Kind::Abs(x, body) => {
                let (slot, rest) = if args.is_empty() {
                    let Pat::Arrow(m, cod) = &target else {
                        return false;
                    };
                    let slot = match self.walk_ms(m) {
                        MsT::List(l) => Slot::Budget(l),
                        MsT::Var(v) => Slot::Collect { var: v, uses: Vec::new() },
                    };
                    (slot, (Vec::new(), (**cod).clone()))
                } else {
                    let first = args.remove(0);
                    let used = vec![false; first.tags.len()];
                    (Slot::Arg { arg: first, used }, (args, target))
                };
                self.slots.push(slot);
                let sid = self.slots.len() - 1;
                let env2 = env.extend(x, sid);
                let (rest_args, body_target) = rest;
                if self.derive_spine(*body, &env2, rest_args, body_target, &mut |s| s.close_slot(sid, k)) {
                    return true;
                }
                self.slots.pop();
                false
            }
            Kind::App(f, n) => {
                args.insert(
                    0,
                    SpineArg {
                        node: *n,
                        env: env.clone(),
                        tags: Vec::new(),
                    },
                );
                self.derive_spine(*f, env, args, target, k)
            }
            Kind::Fix(m) => {
                args.insert(
                    0,
                    SpineArg {
                        node,
                        env: env.clone(),
                        tags: Vec::new(),
                    },
                );
                self.derive_spine(*m, env, args, target, k)
            }
            Kind::Num(v) => {
                args.is_empty() && self.unify_pat(&target, &Pat::Nat(Vec::new(), NatT::constant(*v)), k)
            }
            Kind::Succ(m) => {
                let Pat::Nat(w, n) = target else { return false };
                let mark = self.mark();
                if let Some(p) = self.nat_pred(n) {
                    if self.derive(*m, env, Pat::Nat(w, p), k) {
                        return true;
                    }
                }
                self.undo(mark);
                false
            }
            Kind::Pred(m) => {
                let Pat::Nat(w, n) = target else { return false };
                let mark = self.mark();
                if self.unify_nat(n, NatT::constant(0))
                    && self.derive(*m, env, Pat::Nat(w.clone(), NatT::constant(0)), k)
                {
                    return true;
                }
                self.undo(mark);
                if self.aborted {
                    return false;
                }
                self.derive(*m, env, Pat::Nat(w, n.plus(1)), k)
            }
            Kind::If {
                depth,
                cond,
                then,
                els,
            } => {
                let w = leaf_word(&target);
                if w.len() < *depth {
                    return false;
                }
                let delta = w[..*depth].to_vec();
                let rest = with_leaf_word(&target, w[*depth..].to_vec());
                let s = self.fresh_nat();
                let (then, els) = (*then, *els);
                self.derive(*cond, env, Pat::Nat(delta, s), &mut |st| {
                    let mark = st.mark();
                    if st.unify_nat(s, NatT::constant(0))
                        && st.derive_spine(then, env, args.clone(), rest.clone(), k)
                    {
                        return true;
                    }
                    st.undo(mark);
                    if st.aborted {
                        return false;
                    }
                    if st.nat_pred(s).is_some() && st.derive_spine(els, env, args.clone(), rest.clone(), k) {
                        return true;
                    }
                    st.undo(mark);
                    false
                })
            }
            Kind::Let {
                depth,
                var,
                bound,
                body,
            } => {
                let w = leaf_word(&target);
                if w.len() < *depth {
                    return false;
                }
                let delta = w[..*depth].to_vec();
                let rest = with_leaf_word(&target, w[*depth..].to_vec());
                let v = self.fresh_nat();
                let body = *body;
                self.derive(*bound, env, Pat::Nat(delta, v), &mut |st| {
                    let sid = st.push_slot_let(Pat::Nat(Vec::new(), v));
                    let env2 = env.extend(var, sid);
                    if st.derive_spine(body, &env2, args.clone(), rest.clone(), &mut |s2| s2.close_slot(sid, k)) {
                        return true;
                    }
                    st.pop_slot();
                    false
                })
            }
            Kind::Diff(m) => {
                if args.is_empty() {
                    return self.diff_alone(*m, env, target, k);
                }
                let w = leaf_word(&target);
                let Some((&r, rest_word)) = w.split_first() else {
                    return false;
                };
                let rest = with_leaf_word(&target, rest_word.to_vec());
                args[0].tags.push(r);
                self.derive_spine(*m, env, args, rest, k)
            }
            Kind::Proj(r, d, m) => {
                let mut w = leaf_word(&target).clone();
                if w.len() < *d {
                    return false;
                }
                w.insert(*d, BitT::K(*r));
                let t2 = with_leaf_word(&target, w);
                self.derive_spine(*m, env, args, t2, k)
            }
            Kind::Inj(r, d, m) => {
                let mut w = leaf_word(&target).clone();
                if w.len() <= *d {
                    return false;
                }
                let mark = self.mark();
                let letter = w.remove(*d);
                if self.unify_bit(letter, BitT::K(*r)) {
                    let t2 = with_leaf_word(&target, w);
                    if self.derive_spine(*m, env, args, t2, k) {
                        return true;
                    }
                }
                self.undo(mark);
                false
            }
            Kind::Sum(d, m) => {
                let w = leaf_word(&target).clone();
                if w.len() <= *d {
                    return false;
                }
                let (zero, one) = (BitT::K(Bit::Zero), BitT::K(Bit::One));
                let options = [(zero, zero, zero), (one, one, zero), (one, zero, one)];
                for (r, r0, r1) in options {
                    let mark = self.mark();
                    if self.unify_bit(w[*d], r) {
                        let mut w2 = w.clone();
                        w2.splice(*d..=*d, [r0, r1]);
                        let t2 = with_leaf_word(&target, w2);
                        if self.derive_spine(*m, env, args.clone(), t2, k) {
                            return true;
                        }
                    }
                    self.undo(mark);
                    if self.aborted {
                        return false;
                    }
                }
                false
            }
            Kind::Flip(d, l, m) => {
                let w = leaf_word(&target);
                let end = d + l + 2;
                if w.len() < end {
                    return false;
                }
                let mut w2 = w[..*d].to_vec();
                w2.extend(crate::syntax::word::lcycle(&w[*d..end]));
                w2.extend_from_slice(&w[end..]);
                let t2 = with_leaf_word(&target, w2);
                self.derive_spine(*m, env, args, t2, k)
            }
            Kind::Plus(a, b) => {
                if self.derive_spine(*a, env, args.clone(), target.clone(), k) {
                    return true;
                }
                !self.aborted && self.derive_spine(*b, env, args, target, k)
            }
            Kind::Zero => false,
        }
    }

    /// `D M` with no arguments: the target is `(m', r·b)` and `M` must
    /// have `(m, b)` with `(m', (r, m)) ∈ S∂`.
    fn diff_alone(&mut self, m: NodeId, env: &Env, target: Pat, k: Cont<'_, 'a>) -> bool {
        let Pat::Arrow(tagged, cod) = &target else {
            return false;
        };
        let w = leaf_word(cod);
        let Some((&r, rest_word)) = w.split_first() else {
            return false;
        };
        let b = with_leaf_word(cod, rest_word.to_vec());
        match self.walk_ms(tagged) {
            MsT::List(elems) => {
                let mut letters = Vec::new();
                let mut untagged = Vec::new();
                for e in &elems {
                    let ew = leaf_word(e);
                    let Some((&t, rest)) = ew.split_first() else {
                        return false;
                    };
                    letters.push(t);
                    untagged.push(with_leaf_word(e, rest.to_vec()));
                }
                let holders: Vec<Option<usize>> =
                    std::iter::once(None).chain((0..elems.len()).map(Some)).collect();
                for h in holders {
                    let mark = self.mark();
                    let total = if h.is_some() { Bit::One } else { Bit::Zero };
                    let ok = self.unify_bit(r, BitT::K(total))
                        && letters.iter().enumerate().all(|(i, t)| {
                            let bit = if h == Some(i) { Bit::One } else { Bit::Zero };
                            self.unify_bit(*t, BitT::K(bit))
                        });
                    if ok {
                        let goal = Pat::Arrow(MsT::List(untagged.clone()), Box::new(b.clone()));
                        if self.derive(m, env, goal, k) {
                            return true;
                        }
                    }
                    self.undo(mark);
                    if self.aborted {
                        return false;
                    }
                }
                false
            }
            MsT::Var(v) => {
                let inner = MsT::Var(self.fresh());
                let goal = Pat::Arrow(inner.clone(), Box::new(b));
                let dom = self
                    .arena
                    .ty(m)
                    .as_arrow()
                    .map(|(a, _)| a.clone())
                    .expect("D applies to a function");
                self.derive(m, env, goal, &mut |s| {
                    s.resolve_list(&inner, &dom, &mut |s2, elems| {
                        let n = elems.len();
                        let holders: Vec<Option<usize>> =
                            std::iter::once(None).chain((0..n).map(Some)).collect();
                        for h in holders {
                            let mark = s2.mark();
                            let total = if h.is_some() { Bit::One } else { Bit::Zero };
                            if s2.unify_bit(r, BitT::K(total)) {
                                let tagged: Vec<Pat> = elems
                                    .iter()
                                    .enumerate()
                                    .map(|(i, e)| {
                                        let bit = if h == Some(i) { Bit::One } else { Bit::Zero };
                                        prefix(&[BitT::K(bit)], e)
                                    })
                                    .collect();
                                if s2.unify_ms(&MsT::Var(v), &MsT::List(tagged), k) {
                                    return true;
                                }
                            }
                            s2.undo(mark);
                        }
                        false
                    })
                })
            }
        }
    }

    /// Gives the elements of a multiset pattern, guessing its size (up to
    /// the arity bound) when it is still unknown.
    fn resolve_list(
        &mut self,
        m: &MsT,
        elem_ty: &Ty,
        k: &mut dyn FnMut(&mut Solver<'a>, Vec<Pat>) -> bool,
    ) -> bool {
        match self.walk_ms(m) {
            MsT::List(l) => k(self, l),
            MsT::Var(v) => {
                let max = self.max_arity.min(self.fuel);
                for n in 0..=max {
                    let mark = self.mark();
                    let elems: Vec<Pat> = (0..n).map(|_| self.fresh_pat(elem_ty)).collect();
                    self.bind(v, Bind::Ms(MsT::List(elems.clone())));
                    if k(self, elems) {
                        return true;
                    }
                    self.undo(mark);
                    if self.aborted {
                        return false;
                    }
                }
                false
            }
        }
    }

    /// A use of the variable bound in slot `sid`, applied to `args`.
    fn use_var(&mut self, sid: usize, args: Vec<SpineArg>, target: Pat, k: Cont<'_, 'a>) -> bool {
        match &self.slots[sid] {
            Slot::Budget(elems) => {
                let elems = elems.clone();
                let mut tried: Vec<Pat> = Vec::new();
                for i in 0..elems.len() {
                    let z = self.zonk(&elems[i]);
                    if tried.contains(&z) {
                        continue;
                    }
                    tried.push(z);
                    let Slot::Budget(v) = &mut self.slots[sid] else { unreachable!() };
                    let e = v.remove(i);
                    if self.apply_point(e.clone(), &args, target.clone(), k) {
                        return true;
                    }
                    let Slot::Budget(v) = &mut self.slots[sid] else { unreachable!() };
                    v.insert(i, e);
                    if self.aborted {
                        return false;
                    }
                }
                false
            }
            Slot::LetBound(p) => {
                let p = p.clone();
                args.is_empty() && self.unify_pat(&p, &target, k)
            }
            Slot::Collect { .. } => {
                let mut point = target.clone();
                for _ in 0..args.len() {
                    let m = MsT::Var(self.fresh());
                    point = Pat::Arrow(m, Box::new(point));
                }
                let Slot::Collect { uses, .. } = &mut self.slots[sid] else { unreachable!() };
                uses.push(point.clone());
                if self.apply_point(point, &args, target, k) {
                    return true;
                }
                let Slot::Collect { uses, .. } = &mut self.slots[sid] else { unreachable!() };
                uses.pop();
                false
            }
            Slot::Arg { arg, used } => {
                let (arg, used) = (arg.clone(), used.clone());
                self.use_arg(sid, &arg, &used, 0, Vec::new(), &args, &target, k)
            }
        }
    }

    /// Chooses the tag bit of each layer for this use of an argument
    /// slot, then derives the argument.
    #[allow(clippy::too_many_arguments)]
    fn use_arg(
        &mut self,
        sid: usize,
        arg: &SpineArg,
        used: &[bool],
        layer: usize,
        mut bits: Vec<BitT>,
        args: &[SpineArg],
        target: &Pat,
        k: Cont<'_, 'a>,
    ) -> bool {
        if layer == arg.tags.len() {
            let t = prefix(&bits, target);
            return self.derive_spine(arg.node, &arg.env, args.to_vec(), t, k);
        }
        bits.push(BitT::K(Bit::Zero));
        if self.use_arg(sid, arg, used, layer + 1, bits.clone(), args, target, k) {
            return true;
        }
        if used[layer] || self.aborted {
            return false;
        }
        let mark = self.mark();
        if self.unify_bit(arg.tags[layer], BitT::K(Bit::One)) {
            *bits.last_mut().expect("pushed") = BitT::K(Bit::One);
            self.set_used(sid, layer, true);
            let mut used2 = used.to_vec();
            used2[layer] = true;
            if self.use_arg(sid, arg, &used2, layer + 1, bits, args, target, k) {
                return true;
            }
            self.set_used(sid, layer, false);
        }
        self.undo(mark);
        false
    }

    fn set_used(&mut self, sid: usize, layer: usize, v: bool) {
        if let Slot::Arg { used, .. } = &mut self.slots[sid] {
            used[layer] = v;
        }
    }

    /// Uses the point `p` of a function applied to `args` at `target`.
    fn apply_point(&mut self, p: Pat, args: &[SpineArg], target: Pat, k: Cont<'_, 'a>) -> bool {
        let mut sets = Vec::new();
        let mut cur = p;
        for _ in args {
            let Pat::Arrow(m, b) = cur else { return false };
            sets.push(m);
            cur = *b;
        }
        self.unify_pat(&cur, &target, &mut |s| s.derive_args(args, &sets, k))
    }

    fn derive_args(&mut self, args: &[SpineArg], sets: &[MsT], k: Cont<'_, 'a>) -> bool {
        let Some((arg, rest)) = args.split_first() else {
            return k(self);
        };
        let elem_ty = {
            let mut t = self.arena.ty(arg.node).clone();
            for _ in &arg.tags {
                t = t.undo_d().expect("tagged arguments have depth");
            }
            t
        };
        self.resolve_list(&sets[0], &elem_ty, &mut |s, elems| {
            s.choose_holders(arg, &elems, 0, &mut Vec::new(), &mut |s2, holders| {
                s2.derive_points(arg, &elems, holders, 0, &mut |s3| s3.derive_args(rest, &sets[1..], k))
            })
        })
    }

    /// For each tag layer, picks the element carrying its 1 (or none when
    /// the tag is 0).
    fn choose_holders(
        &mut self,
        arg: &SpineArg,
        elems: &[Pat],
        layer: usize,
        holders: &mut Vec<Option<usize>>,
        k: &mut dyn FnMut(&mut Solver<'a>, &[Option<usize>]) -> bool,
    ) -> bool {
        if layer == arg.tags.len() {
            return k(self, holders);
        }
        let options: Vec<Option<usize>> = std::iter::once(None).chain((0..elems.len()).map(Some)).collect();
        for h in options {
            let mark = self.mark();
            let bit = if h.is_some() { Bit::One } else { Bit::Zero };
            if self.unify_bit(arg.tags[layer], BitT::K(bit)) {
                holders.push(h);
                if self.choose_holders(arg, elems, layer + 1, holders, k) {
                    return true;
                }
                holders.pop();
            }
            self.undo(mark);
            if self.aborted {
                return false;
            }
        }
        false
    }

    fn derive_points(
        &mut self,
        arg: &SpineArg,
        elems: &[Pat],
        holders: &[Option<usize>],
        i: usize,
        k: Cont<'_, 'a>,
    ) -> bool {
        if i == elems.len() {
            return k(self);
        }
        let bits: Vec<BitT> = holders
            .iter()
            .map(|h| BitT::K(if *h == Some(i) { Bit::One } else { Bit::Zero }))
            .collect();
        let goal = prefix(&bits, &elems[i]);
        self.derive(arg.node, &arg.env, goal, &mut |s| s.derive_points(arg, elems, holders, i + 1, k))
    }

    // --- stacks and states ----------------------------------------------

    /// Splits the top of a stack into the arguments it feeds to the code,
    /// returning them with the remaining frames.
    fn spine_of(frames: &[FrameN]) -> Option<(Vec<SpineArg>, &[FrameN])> {
        let mut args = Vec::new();
        let mut pending: Vec<BitT> = Vec::new();
        let mut i = 0;
        while i < frames.len() {
            match &frames[i] {
                FrameN::Diff(r) => pending.push(BitT::K(*r)),
                FrameN::Arg(n) => {
                    pending.reverse();
                    args.push(SpineArg {
                        node: *n,
                        env: Env::default(),
                        tags: std::mem::take(&mut pending),
                    });
                }
                _ => break,
            }
            i += 1;
        }
        if !pending.is_empty() {
            return None;
        }
        Some((args, &frames[i..]))
    }

    /// `⟨δ | M | s⟩ : ν`, with `word` the point prefix of the code and
    /// `frames` listed top first.
    pub(crate) fn state_goal(
        &mut self,
        word: Vec<BitT>,
        node: NodeId,
        env: &Env,
        frames: &[FrameN],
        nu: u64,
        k: Cont<'_, 'a>,
    ) -> bool {
        let Some((args, ground)) = Self::spine_of(frames) else {
            return false;
        };
        self.ground_goal(ground, nu, &mut |s, kappa| {
            s.derive_spine(node, env, args.clone(), Pat::Nat(word.clone(), kappa), k)
        })
    }

    /// The numerals `κ` with `s : κ ⊢ ν` for a stack of type `ι`.
    fn ground_goal(
        &mut self,
        frames: &[FrameN],
        nu: u64,
        k: &mut dyn FnMut(&mut Solver<'a>, NatT) -> bool,
    ) -> bool {
        let Some((top, rest)) = frames.split_first() else {
            return k(self, NatT::constant(nu));
        };
        match top {
            FrameN::Succ => self.ground_goal(rest, nu, &mut |s, below| {
                let mark = s.mark();
                if let Some(p) = s.nat_pred(below) {
                    if k(s, p) {
                        return true;
                    }
                }
                s.undo(mark);
                false
            }),
            FrameN::Pred => self.ground_goal(rest, nu, &mut |s, below| {
                let mark = s.mark();
                if s.unify_nat(below, NatT::constant(0)) && k(s, NatT::constant(0)) {
                    return true;
                }
                s.undo(mark);
                !s.aborted && k(s, below.plus(1))
            }),
            FrameN::If(w, p, q) => {
                let word: Vec<BitT> = w.iter().rev().map(|&b| BitT::K(b)).collect();
                let env = Env::default();
                if self.state_goal(word.clone(), *p, &env, rest, nu, &mut |s| k(s, NatT::constant(0))) {
                    return true;
                }
                if self.aborted {
                    return false;
                }
                let j = self.fresh_nat();
                self.state_goal(word, *q, &env, rest, nu, &mut |s| k(s, j.plus(1)))
            }
            FrameN::Let(w, x, body) => {
                let word: Vec<BitT> = w.iter().rev().map(|&b| BitT::K(b)).collect();
                let j = self.fresh_nat();
                let sid = self.push_slot_let(Pat::Nat(Vec::new(), j));
                let env = Env::default().extend(x, sid);
                if self.state_goal(word, *body, &env, rest, nu, &mut |s| k(s, j)) {
                    return true;
                }
                self.pop_slot();
                false
            }
            FrameN::Arg(_) | FrameN::Diff(_) => false,
        }
    }

    /// `s : f ⊢ ν` for a known point pattern `f`.
    pub(crate) fn stack_goal(&mut self, frames: &[FrameN], f: Pat, nu: u64, k: Cont<'_, 'a>) -> bool {
        match (&f, frames.first()) {
            (Pat::Arrow(m, cod), Some(FrameN::Arg(_) | FrameN::Diff(_))) => {
                let mut pending = Vec::new();
                let mut i = 0;
                let node = loop {
                    match frames.get(i) {
                        Some(FrameN::Diff(r)) => pending.push(BitT::K(*r)),
                        Some(FrameN::Arg(n)) => break *n,
                        _ => return false,
                    }
                    i += 1;
                };
                pending.reverse();
                let arg = SpineArg {
                    node,
                    env: Env::default(),
                    tags: pending,
                };
                let rest = &frames[i + 1..];
                let cod = (**cod).clone();
                self.derive_args(std::slice::from_ref(&arg), std::slice::from_ref(m), &mut |s| {
                    s.stack_goal(rest, cod.clone(), nu, k)
                })
            }
            (Pat::Nat(w, n), _) if w.is_empty() => {
                let n = *n;
                self.ground_goal(frames, nu, &mut |s, kappa| {
                    let mark = s.mark();
                    if s.unify_nat(n, kappa) && k(s) {
                        return true;
                    }
                    s.undo(mark);
                    false
                })
            }
            _ => false,
        }
    }
}
