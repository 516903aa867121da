//! Acceptance suite. Each criterion prints one line of the form
//! `criterion N PASS|FAIL <summary>`, and the process exits non-zero if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cdpcf::differential::dlet;
use cdpcf::gen::{gen_corpus, GenConfig, Generated};
use cdpcf::machine::det::{det_run, det_step, dwords_expand, DetOutcome, DetState, DetStep};
use cdpcf::machine::krivine::{machine_step, msrs_run, readback, redex_focus, simulates, Command, Step};
use cdpcf::program::{corpus_dir, load_corpus, Expectation, SourceProgram};
use cdpcf::rel::{icheck, parse_point, IContext, Verdict};
use cdpcf::rewrite::{enumerate_redexes, msrs_step, normalize, reduces_to_at_head, REACH_STATE_BUDGET};
use cdpcf::syntax::parse_term;
use cdpcf::syntax::term::plus;
use cdpcf::typing::{check_multiset, infer, infer_with_sums, TyCtx};
use cdpcf::{Multiset, Ty};

const RUN_FUEL: usize = 100_000;
const SIM_FUEL: usize = 8;
const SIM_BUDGET: usize = 150;
const GEN_SEED: u64 = 0x5eed;
const GEN_COUNT: usize = 240;

struct Check {
    ok: bool,
    summary: String,
}

fn pass(summary: impl Into<String>) -> Check {
    Check { ok: true, summary: summary.into() }
}

fn fail(summary: impl Into<String>) -> Check {
    Check { ok: false, summary: summary.into() }
}

fn within(v: Check, elapsed: Duration, limit: Duration) -> Check {
    let summary = format!("{} [{:.2?}, limit {:?}]", v.summary, elapsed, limit);
    if elapsed > limit {
        fail(format!("{summary} too slow"))
    } else {
        Check { ok: v.ok, summary }
    }
}

fn corpus() -> Vec<SourceProgram> {
    load_corpus(&corpus_dir()).expect("corpus loads")
}

/// Programs that are expected to halt, on a value or on zero.
fn halting(progs: &[SourceProgram]) -> impl Iterator<Item = &SourceProgram> {
    progs
        .iter()
        .filter(|p| matches!(p.expect, Some(Expectation::Value(_) | Expectation::Zero)))
}

fn generated() -> Vec<Generated> {
    let cfg = GenConfig { max_size: 25, max_depth: 2, ..GenConfig::default() };
    gen_corpus(GEN_SEED, GEN_COUNT, &cfg)
}

fn dt_example() -> Check {
    let m = parse_term(r"D (\f:(Nat -> Nat). \x:Nat. f (f x))").unwrap();
    let want =
        parse_term(r"\f:(Nat -> D Nat). \x:Nat. (sum[0] (D f)) ((sum[0] (D f)) (inj[0,0] x))").unwrap();
    let trace = normalize(&TyCtx::new(), &m, 10);
    match trace.iter().position(|s| s.after.alpha_eq(&want)) {
        Some(k) => pass(format!("D T reaches the expected term after {} step(s)", k + 1)),
        None => fail(format!(
            "not reached within 10 steps; last term {}",
            trace.last().map_or(m.clone(), |s| s.after.clone())
        )),
    }
}

fn diff_typing(cases: &[Generated]) -> Check {
    let mut checked = 0;
    let mut failures = Vec::new();
    for g in cases {
        for (x, a) in g.ctx.entries() {
            checked += 1;
            let ctx = g.ctx.clone().with(x, a.d());
            let d = dlet(x, &g.term);
            let got = infer(&ctx, &d);
            if got.as_ref() != Ok(&g.ty.d()) {
                failures.push(format!("{x} in {}: {got:?}", g.term));
            }
        }
    }
    if cases.len() >= 200 && failures.is_empty() {
        pass(format!("{checked} differentials over {} terms", cases.len()))
    } else {
        fail(format!("{} failures, first: {:?}", failures.len(), failures.first()))
    }
}

fn subject_reduction(cases: &[Generated]) -> Check {
    let (mut redexes, mut splits) = (0, 0);
    let mut failures = Vec::new();
    for g in cases {
        for r in enumerate_redexes(&g.ctx, &g.term) {
            redexes += 1;
            let after = r.apply(&g.term);
            match infer_with_sums(&g.ctx, &after) {
                Ok(b) if b == g.ty => {}
                other => failures.push(format!("{} on {}: {other:?}", r.rule.name(), g.term)),
            }
        }
        let mut s = Multiset::singleton(g.term.clone());
        for _ in 0..30 {
            let Some(next) = msrs_step(&s) else { break };
            if next.len() > s.len() {
                splits += 1;
            }
            if let Err((m, e)) = check_multiset(&g.ctx, &next, &g.ty) {
                failures.push(format!("multiset step from {}: {m} {e}", g.term));
                break;
            }
            s = next;
        }
    }
    if failures.is_empty() {
        pass(format!("{redexes} redexes and {splits} multiset splits preserve typing"))
    } else {
        fail(format!("{} failures, first: {}", failures.len(), failures[0]))
    }
}

/// Every transition of the full multiset run of `p`, as a pair of the
/// source command and the readback of its successor.
fn transitions(p: &SourceProgram, mut each: impl FnMut(&Command, cdpcf::Term)) {
    let mut frontier = vec![Command::initial(p.term.clone())];
    while let Some(c) = frontier.pop() {
        match machine_step(&c).expect("well-typed command") {
            Step::Next(_, next) => {
                each(&c, readback(&next));
                frontier.push(next);
            }
            Step::Split(a, b) => {
                each(&c, plus(readback(&a), readback(&b)));
                frontier.push(a);
                frontier.push(b);
            }
            Step::Zero | Step::Terminal(_) => {}
        }
    }
}

fn machine_simulation(progs: &[SourceProgram]) -> Check {
    let (mut steps, mut refuted, mut cut) = (0, 0, 0);
    let mut first: Option<(Command, cdpcf::Term)> = None;
    let mut failed: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_access: BTreeMap<usize, usize> = BTreeMap::new();
    for p in halting(progs) {
        transitions(p, |c, next| {
            steps += 1;
            let sim = simulates(c, &next, SIM_FUEL, SIM_BUDGET);
            if !sim.holds() {
                *failed.entry(p.name.clone()).or_default() += 1;
                *by_access.entry(c.access.len()).or_default() += 1;
                if first.is_none() {
                    first = Some((c.clone(), next.clone()));
                }
                if sim.refuted_at_head() {
                    refuted += 1;
                } else {
                    cut += 1;
                }
            }
        });
    }
    let count: usize = failed.values().sum();
    if steps >= 500 && count == 0 {
        pass(format!("{steps} machine steps each simulated within {SIM_FUEL} rewriting steps"))
    } else {
        let progs: Vec<String> = failed.iter().map(|(n, k)| format!("{n}: {k}")).collect();
        let first = first.map_or(String::new(), |(c, next)| {
            let r = reduces_to_at_head(&TyCtx::new(), &readback(&c), &next, SIM_FUEL, &redex_focus(&c), REACH_STATE_BUDGET);
            format!(
                "; first failure (access word length {}) rerun with a budget of {REACH_STATE_BUDGET}: {}",
                c.access.len(),
                if r.reachable {
                    "reached".to_string()
                } else if r.exhausted {
                    "still cut by the budget".to_string()
                } else {
                    format!("refuted among head redexes after {} terms", r.explored)
                }
            )
        });
        fail(format!(
            "{count} of {steps} steps not shown to be simulated within {SIM_FUEL} rewriting steps ({}); \
             {refuted} refuted among head redexes, {cut} cut by the search budget; \
             failures by access word length {by_access:?}{first}",
            progs.join(", ")
        ))
    }
}

fn det_equivalence(progs: &[SourceProgram]) -> Check {
    let mut compared = Vec::new();
    let mut mismatches = Vec::new();
    for p in halting(progs) {
        let det = det_run(&p.term, RUN_FUEL).expect("det machine runs");
        let ms = msrs_run(&Command::initial(p.term.clone()), RUN_FUEL).expect("multiset machine runs");
        if det.outcome == DetOutcome::Timeout || ms.exhausted {
            continue;
        }
        let ok = match det.outcome {
            DetOutcome::Value(v) => {
                ms.unique() == Some(v) && ms.successes.len() == 1 && ms.successes[0].steps == det.steps
            }
            DetOutcome::Zero | DetOutcome::Stuck => ms.results.is_empty(),
            DetOutcome::Timeout => unreachable!(),
        };
        if ok {
            compared.push(p.name.clone());
        } else {
            mismatches.push(format!(
                "{}: det {} in {} steps, multiset {:?} with successes {:?}",
                p.name, det.outcome, det.steps, ms.results, ms.successes
            ));
        }
    }
    if mismatches.is_empty() && !compared.is_empty() {
        pass(format!("{} programs agree on result and step count", compared.len()))
    } else {
        fail(format!("{} mismatches: {}", mismatches.len(), mismatches.join("; ")))
    }
}

/// Successors of `c` under the multiset machine.
fn successors(c: &Command) -> Vec<Command> {
    match machine_step(c).expect("well-typed command") {
        Step::Next(_, x) => vec![x],
        Step::Split(a, b) => vec![a, b],
        Step::Zero | Step::Terminal(_) => Vec::new(),
    }
}

fn dwords_bisimulation(progs: &[SourceProgram]) -> Check {
    let (mut steps, mut forward, mut backward) = (0, 0, 0);
    for p in halting(progs) {
        let mut g = DetState::initial(p.term.clone());
        for _ in 0..RUN_FUEL {
            let here = dwords_expand(&g);
            match det_step(&g).expect("det machine steps") {
                DetStep::Next(_, g2) => {
                    steps += 1;
                    let there = dwords_expand(&g2);
                    let reached: BTreeSet<Command> = here.iter().flat_map(successors).collect();
                    forward += there.iter().filter(|c| !reached.contains(c)).count();
                    backward += reached.iter().filter(|c| !there.contains(c)).count();
                    g = g2;
                }
                _ => {
                    backward += here.iter().filter(|c| !successors(c).is_empty()).count();
                    break;
                }
            }
        }
    }
    if forward == 0 && backward == 0 {
        pass(format!("{steps} det steps, expansions match in both directions"))
    } else {
        fail(format!("{steps} det steps, {forward} forward and {backward} backward failures"))
    }
}

fn adequacy(progs: &[SourceProgram]) -> Check {
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in progs {
        match p.expect {
            Some(Expectation::Value(_) | Expectation::Zero) => {
                let det = det_run(&p.term, RUN_FUEL).expect("det machine runs");
                let (bound, want) = match det.outcome {
                    DetOutcome::Value(v) => (v + 1, BTreeSet::from([v])),
                    _ => (8, BTreeSet::new()),
                };
                let got = cdpcf::rel::interp_ground(&p.term, bound, 1000).expect("search runs");
                checked += 1;
                if got != want {
                    failures.push(format!("{}: {got:?} instead of {want:?}", p.name));
                }
            }
            Some(Expectation::Diverge) => {
                for fuel in [10, 100, 1000] {
                    let got = cdpcf::rel::interp_ground(&p.term, 8, fuel).expect("search runs");
                    checked += 1;
                    if !got.is_empty() {
                        failures.push(format!("{} at fuel {fuel}: {got:?}", p.name));
                    }
                }
            }
            _ => {}
        }
    }
    if failures.is_empty() {
        pass(format!("{checked} ground interpretations match the machine"))
    } else {
        fail(failures.join("; "))
    }
}

fn golden_judgments() -> Check {
    let t = |s: &str| parse_term(s).unwrap();
    let pt = |s: &str| parse_point(s).unwrap();
    let nn = Ty::arrow(Ty::nat(), Ty::nat());
    let linapp = IContext::new()
        .with("f", [pt("([3], 4)")], nn.clone())
        .with("x", [pt("3")], Ty::nat());
    let pair = IContext::new()
        .with("f", [pt("([3, 5], 4)")], nn)
        .with("x", [pt("3"), pt("5")], Ty::nat());
    let iter = t(r"fix (\F:((Nat -> Nat) -> Nat -> Nat). \f:(Nat -> Nat). \x:Nat.
                    let[0](y = x) if[0](y, 0, succ[0] (F f (lin f y))))");
    let cases = [
        ("lin f x", &linapp, t("lin f x"), pt("4"), Verdict::Proved),
        ("iterator", &IContext::new(), iter, pt("([([1], 2), ([2], 0)], ([1], 2))"), Verdict::Proved),
        ("f x", &pair, t("f x"), pt("4"), Verdict::Proved),
        ("lin f x, two arguments", &pair, t("lin f x"), pt("4"), Verdict::Unknown),
    ];
    let mut wrong = Vec::new();
    for (name, phi, m, a, want) in &cases {
        let got = icheck(phi, m, a, 60);
        if got != Ok(*want) {
            wrong.push(format!("{name}: {got:?}, wanted {want}"));
        }
    }
    if wrong.is_empty() {
        pass(format!("{} judgments as expected", cases.len()))
    } else {
        fail(wrong.join("; "))
    }
}

fn determinism(progs: &[SourceProgram]) -> Check {
    let mut offenders = Vec::new();
    let mut runs = 0;
    for p in progs.iter().filter(|p| p.is_runnable()) {
        let fuel = if p.expect == Some(Expectation::Diverge) { 2_000 } else { RUN_FUEL };
        let ms = msrs_run(&Command::initial(p.term.clone()), fuel).expect("multiset machine runs");
        runs += 1;
        if ms.results.support().count() > 1 {
            offenders.push(format!("{}: {:?}", p.name, ms.results));
        }
    }
    if offenders.is_empty() {
        pass(format!("{runs} runs, never more than one numeral"))
    } else {
        fail(offenders.join("; "))
    }
}

fn timed(f: impl FnOnce() -> Check) -> (Check, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() -> ExitCode {
    let progs = corpus();
    let cases = generated();
    let secs = Duration::from_secs;

    let results: Vec<(usize, Check)> = vec![
        (1, { let (v, t) = timed(dt_example); within(v, t, secs(1)) }),
        (2, { let (v, t) = timed(|| diff_typing(&cases)); within(v, t, secs(10)) }),
        (3, { let (v, t) = timed(|| subject_reduction(&cases)); within(v, t, secs(30)) }),
        (4, machine_simulation(&progs)),
        (5, { let (v, t) = timed(|| det_equivalence(&progs)); within(v, t, secs(30)) }),
        (6, dwords_bisimulation(&progs)),
        (7, adequacy(&progs)),
        (8, { let (v, t) = timed(golden_judgments); within(v, t, secs(10)) }),
        (9, determinism(&progs)),
    ];

    let mut failed = 0;
    for (n, v) in &results {
        println!("criterion {n} {} {}", if v.ok { "PASS" } else { "FAIL" }, v.summary);
        failed += usize::from(!v.ok);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
