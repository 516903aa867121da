//! The deterministic machine. Instead of splitting on `σ` facing a 1, it
//! writes a fresh cell `W(k)` in both positions and defers the choice:
//! the first injection that inspects a copy of the cell decides it.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::krivine::Command;
use super::{common_step, head_name, show_word, Common, Frame, Letter, MachineError, MachineRule, Stack, State, TraceLine};
use crate::syntax::{Bit, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtLetter {
    Bit(Bit),
    Cell(u64),
}

impl Letter for ExtLetter {
    fn from_bit(b: Bit) -> Self {
        ExtLetter::Bit(b)
    }
}

impl fmt::Display for ExtLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtLetter::Bit(b) => write!(f, "{b}"),
            ExtLetter::Cell(n) => write!(f, "W<{n}>"),
        }
    }
}

/// `⟨ζ, k | M | σ⟩`: a state over extended letters together with the
/// next unused cell name `k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetState {
    pub state: State<ExtLetter>,
    pub counter: u64,
}

impl DetState {
    pub fn initial(code: Term) -> DetState {
        DetState {
            state: State::initial(code),
            counter: 0,
        }
    }

    /// Every letter of the state with its location.
    fn letters(&self) -> Vec<(Loc, ExtLetter)> {
        let mut out: Vec<(Loc, ExtLetter)> = self
            .state
            .access
            .iter()
            .enumerate()
            .map(|(i, &l)| (Loc::Access(i), l))
            .collect();
        for (fi, f) in self.state.stack.0.iter().enumerate() {
            match f {
                Frame::If(w, ..) | Frame::Let(w, ..) => {
                    out.extend(w.iter().enumerate().map(|(i, &l)| (Loc::Frame(fi, i), l)))
                }
                Frame::Diff(l) => out.push((Loc::Frame(fi, 0), *l)),
                _ => {}
            }
        }
        out
    }

    pub fn cells(&self) -> BTreeSet<u64> {
        self.letters()
            .into_iter()
            .filter_map(|(_, l)| match l {
                ExtLetter::Cell(n) => Some(n),
                ExtLetter::Bit(_) => None,
            })
            .collect()
    }

    pub fn mentions(&self, n: u64) -> bool {
        self.letters()
            .iter()
            .any(|(_, l)| *l == ExtLetter::Cell(n))
    }

    /// Every cell name is below the counter.
    pub fn is_well_formed(&self) -> bool {
        self.cells().iter().all(|&n| n < self.counter)
    }

    fn map_letters(&self, f: impl Fn(ExtLetter) -> ExtLetter) -> DetState {
        let mut out = self.clone();
        for l in out.state.access.iter_mut() {
            *l = f(*l);
        }
        for fr in out.state.stack.0.iter_mut() {
            match fr {
                Frame::If(w, ..) | Frame::Let(w, ..) => {
                    for l in w.iter_mut() {
                        *l = f(*l);
                    }
                }
                Frame::Diff(l) => *l = f(*l),
                _ => {}
            }
        }
        out
    }
}

impl fmt::Display for DetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "⟨{}, {} | {} | {}⟩",
            show_word(&self.state.access),
            self.counter,
            self.state.code,
            self.state.stack
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Loc {
    Access(usize),
    Frame(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetStep {
    Next(MachineRule, DetState),
    /// An injection met the opposite literal bit.
    ZeroHalt,
    /// An injection `ι₀` consumed the last copy of a cell.
    Stuck,
    Terminal(u64),
}

impl DetStep {
    pub fn rule_name(&self) -> &'static str {
        match self {
            DetStep::Next(r, _) => r.name(),
            DetStep::ZeroHalt => MachineRule::InjMismatch.name(),
            DetStep::Stuck => "stuck",
            DetStep::Terminal(_) => "halt",
        }
    }
}

pub fn det_step(g: &DetState) -> Result<DetStep, MachineError> {
    let c = &g.state;
    let with = |state: State<ExtLetter>, counter: u64| DetState { state, counter };
    Ok(match common_step(c)? {
        Common::Next(r, s) => DetStep::Next(r, with(s, g.counter)),
        Common::Terminal(v) => DetStep::Terminal(v),
        Common::Inj { i, pos, body } => {
            let mut access = c.access.clone();
            let u = access.remove(pos);
            let next = with(State::new(access, body, c.stack.clone()), g.counter);
            match u {
                ExtLetter::Bit(j) if j == i => DetStep::Next(MachineRule::InjMatch, next),
                ExtLetter::Bit(_) => DetStep::ZeroHalt,
                ExtLetter::Cell(n) => match i {
                    Bit::Zero if next.mentions(n) => DetStep::Next(MachineRule::InjCellKeep, next),
                    Bit::Zero => DetStep::Stuck,
                    Bit::One => {
                        let written = next.map_letters(|l| {
                            if l == ExtLetter::Cell(n) {
                                ExtLetter::Bit(Bit::Zero)
                            } else {
                                l
                            }
                        });
                        DetStep::Next(MachineRule::InjCellWrite, written)
                    }
                },
            }
        }
        Common::Sum { pos, body } => {
            let (pair, counter, rule) = match c.access[pos] {
                ExtLetter::Bit(Bit::Zero) => {
                    let z = ExtLetter::Bit(Bit::Zero);
                    ([z, z], g.counter, MachineRule::SumZero)
                }
                ExtLetter::Bit(Bit::One) => {
                    let w = ExtLetter::Cell(g.counter);
                    ([w, w], g.counter + 1, MachineRule::SumOne)
                }
                w @ ExtLetter::Cell(_) => ([w, w], g.counter, MachineRule::SumCell),
            };
            let mut access = c.access.clone();
            access.splice(pos..=pos, pair);
            DetStep::Next(rule, with(State::new(access, body, c.stack.clone()), counter))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetOutcome {
    Value(u64),
    Zero,
    Stuck,
    Timeout,
}

impl fmt::Display for DetOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetOutcome::Value(v) => write!(f, "result: {v}"),
            DetOutcome::Zero => write!(f, "result: zero"),
            DetOutcome::Stuck => write!(f, "result: stuck"),
            DetOutcome::Timeout => write!(f, "timeout"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DetReport {
    pub outcome: DetOutcome,
    pub steps: usize,
    pub last: DetState,
}

pub fn det_run(m: &Term, fuel: usize) -> Result<DetReport, MachineError> {
    det_run_traced(m, fuel, &mut |_| {})
}

pub fn det_run_traced(
    m: &Term,
    fuel: usize,
    trace: &mut dyn FnMut(&TraceLine),
) -> Result<DetReport, MachineError> {
    let mut g = DetState::initial(m.clone());
    let mut steps = 0;
    loop {
        let step = det_step(&g)?;
        if let DetStep::Terminal(v) = step {
            return Ok(DetReport {
                outcome: DetOutcome::Value(v),
                steps,
                last: g,
            });
        }
        if steps >= fuel {
            return Ok(DetReport {
                outcome: DetOutcome::Timeout,
                steps,
                last: g,
            });
        }
        trace(&TraceLine {
            branch: 0,
            access: show_word(&g.state.access),
            head: head_name(&g.state.code),
            rule: step.rule_name().to_string(),
            stack_depth: g.state.stack.depth(),
            counter: Some(g.counter),
        });
        steps += 1;
        match step {
            DetStep::Next(_, next) => g = next,
            DetStep::ZeroHalt => {
                return Ok(DetReport {
                    outcome: DetOutcome::Zero,
                    steps,
                    last: g,
                })
            }
            DetStep::Stuck => {
                return Ok(DetReport {
                    outcome: DetOutcome::Stuck,
                    steps,
                    last: g,
                })
            }
            DetStep::Terminal(_) => unreachable!(),
        }
    }
}

/// The commands a deterministic state stands for: for every cell, one of
/// its occurrences reads 1 and all the others read 0.
pub fn dwords_expand(g: &DetState) -> BTreeSet<Command> {
    let letters = g.letters();
    let cells: Vec<u64> = g.cells().into_iter().collect();
    let occurrences: Vec<Vec<Loc>> = cells
        .iter()
        .map(|&n| {
            letters
                .iter()
                .filter(|(_, l)| *l == ExtLetter::Cell(n))
                .map(|(loc, _)| *loc)
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut choice = vec![0usize; cells.len()];
    loop {
        let ones: BTreeSet<Loc> = occurrences
            .iter()
            .zip(&choice)
            .map(|(occ, &k)| occ[k])
            .collect();
        out.insert(instantiate(g, &ones));
        let mut k = 0;
        loop {
            if k == choice.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < occurrences[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn instantiate(g: &DetState, ones: &BTreeSet<Loc>) -> Command {
    let bit = |loc: Loc, l: ExtLetter| match l {
        ExtLetter::Bit(b) => b,
        ExtLetter::Cell(_) if ones.contains(&loc) => Bit::One,
        ExtLetter::Cell(_) => Bit::Zero,
    };
    let access = g
        .state
        .access
        .iter()
        .enumerate()
        .map(|(i, &l)| bit(Loc::Access(i), l))
        .collect();
    let frames = g
        .state
        .stack
        .0
        .iter()
        .enumerate()
        .map(|(fi, f)| match f {
            Frame::Arg(m) => Frame::Arg(m.clone()),
            Frame::Succ => Frame::Succ,
            Frame::Pred => Frame::Pred,
            Frame::If(w, p, q) => Frame::If(
                w.iter()
                    .enumerate()
                    .map(|(i, &l)| bit(Loc::Frame(fi, i), l))
                    .collect(),
                p.clone(),
                q.clone(),
            ),
            Frame::Let(w, x, m) => Frame::Let(
                w.iter()
                    .enumerate()
                    .map(|(i, &l)| bit(Loc::Frame(fi, i), l))
                    .collect(),
                x.clone(),
                m.clone(),
            ),
            Frame::Diff(l) => Frame::Diff(bit(Loc::Frame(fi, 0), *l)),
        })
        .collect();
    State::new(access, g.state.code.clone(), Stack(frames))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("command and deterministic state have different shapes")]
pub struct ShapeMismatch;

/// Sum of the bits `c` carries at the positions where `g` holds `W(n)`.
pub fn nwcell(n: u64, c: &Command, g: &DetState) -> Result<u64, ShapeMismatch> {
    if c.code != g.state.code
        || c.access.len() != g.state.access.len()
        || c.stack.0.len() != g.state.stack.0.len()
    {
        return Err(ShapeMismatch);
    }
    let mut total = 0;
    let mut add = |b: Bit, l: ExtLetter| {
        if l == ExtLetter::Cell(n) {
            total += u64::from(b.as_u8());
        }
    };
    for (&b, &l) in c.access.iter().zip(&g.state.access) {
        add(b, l);
    }
    for (fc, fg) in c.stack.0.iter().zip(&g.state.stack.0) {
        match (fc, fg) {
            (Frame::If(wc, ..), Frame::If(wg, ..)) | (Frame::Let(wc, ..), Frame::Let(wg, ..)) => {
                if wc.len() != wg.len() {
                    return Err(ShapeMismatch);
                }
                for (&b, &l) in wc.iter().zip(wg) {
                    add(b, l);
                }
            }
            (Frame::Diff(b), Frame::Diff(l)) => add(*b, *l),
            (Frame::Arg(_), Frame::Arg(_))
            | (Frame::Succ, Frame::Succ)
            | (Frame::Pred, Frame::Pred) => {}
            _ => return Err(ShapeMismatch),
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn run(s: &str) -> DetReport {
        det_run(&parse_term(s).unwrap(), 1000).unwrap()
    }

    #[test]
    fn sum_writes_a_cell_that_injections_resolve() {
        let r = run("proj[1,0] (sum[0] (inj[1,0] (inj[0,0] 5)))");
        assert_eq!(r.outcome, DetOutcome::Value(5));
    }

    #[test]
    fn step_count_matches_nondeterministic_branch() {
        let r = run("(\\x:Nat. succ[0] x) 3");
        assert_eq!(r.outcome, DetOutcome::Value(4));
        assert_eq!(r.steps, 4);
    }

    #[test]
    fn wrong_literal_halts_with_zero() {
        assert_eq!(run("proj[0,0] (inj[1,0] 4)").outcome, DetOutcome::Zero);
    }

    #[test]
    fn dwords_pick_one_occurrence_per_cell() {
        let w = ExtLetter::Cell(0);
        let g = DetState {
            state: State::new(
                vec![w, ExtLetter::Bit(Bit::One), w],
                Term::Num(0),
                Stack(vec![Frame::Diff(w)]),
            ),
            counter: 1,
        };
        let cs = dwords_expand(&g);
        assert_eq!(cs.len(), 3);
        for c in &cs {
            assert_eq!(nwcell(0, c, &g), Ok(1));
        }
    }

    #[test]
    fn cell_free_states_expand_to_themselves() {
        let g = DetState::initial(Term::Num(2));
        let cs = dwords_expand(&g);
        assert_eq!(cs.into_iter().collect::<Vec<_>>(), vec![State::initial(Term::Num(2))]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = DetState::initial(Term::Num(2));
        let c = State::new(vec![Bit::One], Term::Num(2), Stack::empty());
        assert_eq!(nwcell(0, &c, &g), Err(ShapeMismatch));
    }
}
