//! The nondeterministic machine: access words are bit words, a sum
//! facing the letter 1 splits the state in two, and an injection facing
//! the wrong letter halts its branch with zero.

use std::collections::VecDeque;

use super::{common_step, head_name, show_word, Common, Frame, MachineError, MachineRule, Stack, State, TraceLine};
use crate::syntax::term::{self, Path, Term};
use crate::syntax::{Bit, Multiset, Ty};
use crate::rewrite::{reduces_to_at_head, reduces_to_within, Reach};
use crate::typing::{infer, TyCtx};

pub type Command = State<Bit>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(MachineRule, Command),
    Split(Command, Command),
    Zero,
    Terminal(u64),
}

impl Step {
    pub fn rule_name(&self) -> &'static str {
        match self {
            Step::Next(r, _) => r.name(),
            Step::Split(..) => MachineRule::SumOne.name(),
            Step::Zero => MachineRule::InjMismatch.name(),
            Step::Terminal(_) => "halt",
        }
    }
}

pub fn machine_step(c: &Command) -> Result<Step, MachineError> {
    Ok(match common_step(c)? {
        Common::Next(r, c) => Step::Next(r, c),
        Common::Terminal(v) => Step::Terminal(v),
        Common::Inj { i, pos, body } => {
            if c.access[pos] == i {
                let mut access = c.access.clone();
                access.remove(pos);
                Step::Next(MachineRule::InjMatch, State::new(access, body, c.stack.clone()))
            } else {
                Step::Zero
            }
        }
        Common::Sum { pos, body } => {
            let with = |a: Bit, b: Bit| {
                let mut access = c.access.clone();
                access.splice(pos..=pos, [a, b]);
                State::new(access, body.clone(), c.stack.clone())
            };
            match c.access[pos] {
                Bit::Zero => Step::Next(MachineRule::SumZero, with(Bit::Zero, Bit::Zero)),
                Bit::One => Step::Split(with(Bit::One, Bit::Zero), with(Bit::Zero, Bit::One)),
            }
        }
    })
}

/// A numeral produced by a branch, with the number of steps that branch
/// took (a split counts once for each of its children).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Success {
    pub value: u64,
    pub steps: usize,
    pub branch: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub results: Multiset<u64>,
    pub successes: Vec<Success>,
    /// Branches still running when fuel ran out.
    pub residual: Vec<Command>,
    pub zero_branches: usize,
    pub total_steps: usize,
    pub exhausted: bool,
}

impl RunReport {
    /// The unique numeral produced, if the run ended with exactly one.
    pub fn unique(&self) -> Option<u64> {
        let mut vals = self.results.support();
        let v = vals.next().copied()?;
        match vals.next() {
            None if self.results.len() == 1 => Some(v),
            _ => None,
        }
    }
}

struct Branch {
    id: usize,
    steps: usize,
    cmd: Command,
}

/// Runs the multiset of commands breadth-first until every branch halts
/// or `fuel` transitions have been taken in total.
pub fn msrs_run(c: &Command, fuel: usize) -> Result<RunReport, MachineError> {
    msrs_run_traced(c, fuel, &mut |_| {})
}

pub fn msrs_run_traced(
    c: &Command,
    fuel: usize,
    trace: &mut dyn FnMut(&TraceLine),
) -> Result<RunReport, MachineError> {
    let mut report = RunReport::default();
    let mut queue = VecDeque::from([Branch {
        id: 0,
        steps: 0,
        cmd: c.clone(),
    }]);
    let mut next_id = 1;
    while let Some(b) = queue.pop_front() {
        if let Term::Num(v) = b.cmd.code {
            if b.cmd.access.is_empty() && b.cmd.stack.0.is_empty() {
                report.results.insert(v);
                report.successes.push(Success {
                    value: v,
                    steps: b.steps,
                    branch: b.id,
                });
                continue;
            }
        }
        if report.total_steps >= fuel {
            report.exhausted = true;
            report.residual.push(b.cmd);
            report.residual.extend(queue.drain(..).map(|b| b.cmd));
            break;
        }
        let step = machine_step(&b.cmd)?;
        trace(&TraceLine {
            branch: b.id,
            access: show_word(&b.cmd.access),
            head: head_name(&b.cmd.code),
            rule: step.rule_name().to_string(),
            stack_depth: b.cmd.stack.depth(),
            counter: None,
        });
        report.total_steps += 1;
        match step {
            Step::Next(_, c) => queue.push_back(Branch {
                id: b.id,
                steps: b.steps + 1,
                cmd: c,
            }),
            Step::Split(c0, c1) => {
                for c in [c0, c1] {
                    queue.push_back(Branch {
                        id: next_id,
                        steps: b.steps + 1,
                        cmd: c,
                    });
                    next_id += 1;
                }
            }
            Step::Zero => report.zero_branches += 1,
            Step::Terminal(_) => unreachable!("terminal states are collected before stepping"),
        }
    }
    Ok(report)
}

/// The term a stack frame wraps around its hole, with the path to the
/// hole.
fn frame_context(f: &Frame<Bit>, hole: Term) -> (Term, Path) {
    match f {
        Frame::Arg(n) => (term::app(hole, n.clone()), vec![0]),
        Frame::Succ => (term::succ(0, hole), vec![0]),
        Frame::Pred => (term::pred(0, hole), vec![0]),
        Frame::Diff(i) => (term::proj(*i, 0, term::diff(hole)), vec![0, 0]),
        Frame::If(w, p, q) => {
            let ann = infer(&TyCtx::new(), p).ok();
            let t = term::ifz(ann, 0, hole, p.clone(), q.clone());
            project_word(w, t, vec![0])
        }
        Frame::Let(w, x, body) => {
            let ann = infer(&TyCtx::new().with(x, Ty::nat()), body).ok();
            let t = term::let_in(ann, 0, x, hole, body.clone());
            project_word(w, t, vec![0])
        }
    }
}

/// `π_δ M`, the last letter of `δ` innermost, with the path to `M`
/// extended by `inner`.
fn project_word(w: &[Bit], m: Term, inner: Path) -> (Term, Path) {
    let t = w.iter().rev().fold(m, |acc, &i| term::proj(i, 0, acc));
    let mut path = vec![0; w.len()];
    path.extend(inner);
    (t, path)
}

/// The term denoted by a state: `s[π_δ M]`.
pub fn readback(c: &Command) -> Term {
    readback_with_hole(c).0
}

/// Like [`readback`], also returning the path of `π_δ M` inside the
/// result.
pub fn readback_with_hole(c: &Command) -> (Term, Path) {
    let (mut t, _) = project_word(&c.access, c.code.clone(), vec![]);
    let mut path = Vec::new();
    for f in c.stack.0.iter().rev() {
        let (wrapped, p) = frame_context(f, t);
        t = wrapped;
        let mut np = p;
        np.extend(path);
        path = np;
    }
    (t, path)
}

/// Position of the top frame's context in the readback of `c`. Every
/// machine step from `c` rewrites inside this subterm.
pub fn redex_focus(c: &Command) -> Path {
    let mut below = c.stack.clone();
    below.0.pop();
    readback_with_hole(&State::new(Vec::new(), Term::Num(0), below)).1
}

/// Outcome of [`simulates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Simulation {
    /// Search restricted to head redexes under [`redex_focus`].
    pub head: Reach,
    /// Search over every redex, run only when the head search fails.
    pub wide: Option<Reach>,
}

impl Simulation {
    pub fn holds(&self) -> bool {
        self.head.reachable || self.wide.is_some_and(|w| w.reachable)
    }

    /// The head search ran to completion without finding the target.
    pub fn refuted_at_head(&self) -> bool {
        !self.head.reachable && !self.head.exhausted
    }
}

/// Whether `readback(c)` reaches `target` in at most `fuel` non-linear
/// steps. The head search explores at most `budget` terms; the wide
/// search gets a quarter of that.
pub fn simulates(c: &Command, target: &Term, fuel: usize, budget: usize) -> Simulation {
    let source = readback(c);
    let ctx = TyCtx::new();
    let head = reduces_to_at_head(&ctx, &source, target, fuel, &redex_focus(c), budget);
    let wide = (!head.reachable)
        .then(|| reduces_to_within(&ctx, &source, target, fuel, &[], (budget / 4).max(1)));
    Simulation { head, wide }
}

/// The sharp type `E` with `s : E`.
pub fn stack_type(s: &Stack<Bit>) -> Result<Ty, MachineError> {
    let ill = |msg: String| MachineError::IllTyped(msg);
    let mut e = Ty::nat();
    for f in &s.0 {
        e = match f {
            Frame::Succ | Frame::Pred => {
                if e != Ty::nat() {
                    return Err(ill(format!("{f} over a stack of type {e}")));
                }
                Ty::nat()
            }
            Frame::If(w, p, q) => {
                let want = e.d_n(w.len());
                for m in [p, q] {
                    let a = infer(&TyCtx::new(), m).map_err(|err| ill(err.to_string()))?;
                    if a != want {
                        return Err(ill(format!("branch {m} has type {a}, expected {want}")));
                    }
                }
                Ty::nat()
            }
            Frame::Let(w, x, m) => {
                let want = e.d_n(w.len());
                let a = infer(&TyCtx::new().with(x, Ty::nat()), m).map_err(|err| ill(err.to_string()))?;
                if a != want {
                    return Err(ill(format!("let body {m} has type {a}, expected {want}")));
                }
                Ty::nat()
            }
            Frame::Arg(m) => {
                let a = infer(&TyCtx::new(), m).map_err(|err| ill(err.to_string()))?;
                Ty::arrow(a, e)
            }
            Frame::Diff(_) => match &e {
                Ty::Arrow(da, rest) => match da.undo_d() {
                    Some(a) => Ty::Arrow(Box::new(a), rest.clone()),
                    None => return Err(ill(format!("diff frame over {e}"))),
                },
                Ty::Ground(_) => return Err(ill(format!("diff frame over {e}"))),
            },
        };
    }
    Ok(e)
}

/// Checks `M : D^{|δ|} E` where `s : E`.
pub fn check_command(c: &Command) -> Result<Ty, MachineError> {
    let e = stack_type(&c.stack)?;
    let a = infer(&TyCtx::new(), &c.code).map_err(|err| MachineError::IllTyped(err.to_string()))?;
    let want = e.d_n(c.access.len());
    if a == want {
        Ok(e)
    } else {
        Err(MachineError::IllTyped(format!(
            "code has type {a}, expected {want}"
        )))
    }
}
