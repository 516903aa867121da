use cdpcf::machine::det::{det_run, DetOutcome};
use cdpcf::machine::krivine::{msrs_run, Command};
use cdpcf::program::{corpus_dir, load_corpus, Expectation, SourceProgram};
use cdpcf::rel::interp_ground;
use cdpcf::typing::{infer, TyCtx};

const FUEL: usize = 100_000;

fn programs() -> Vec<SourceProgram> {
    load_corpus(&corpus_dir()).expect("corpus loads")
}

#[test]
fn every_program_type_checks() {
    for p in programs() {
        let a = infer(&TyCtx::new(), &p.term).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        match &p.expect {
            Some(Expectation::Type(want)) => assert_eq!(&a, want, "{}", p.name),
            _ => assert_eq!(a, cdpcf::Ty::nat(), "{}", p.name),
        }
    }
}

#[test]
fn det_machine_meets_expectations() {
    for p in programs().iter().filter(|p| p.is_runnable()) {
        let fuel = if p.expect == Some(Expectation::Diverge) { 500 } else { FUEL };
        let r = det_run(&p.term, fuel).unwrap();
        let ok = match (&p.expect, r.outcome.clone()) {
            (Some(Expectation::Value(v)), DetOutcome::Value(w)) => *v == w,
            (Some(Expectation::Zero), DetOutcome::Zero | DetOutcome::Stuck) => true,
            (Some(Expectation::Diverge), DetOutcome::Timeout) => true,
            _ => false,
        };
        assert!(ok, "{}: expected {:?}, got {}", p.name, p.expect, r.outcome);
    }
}

#[test]
fn multiset_machine_meets_expectations() {
    for p in programs().iter().filter(|p| p.is_runnable()) {
        let fuel = if p.expect == Some(Expectation::Diverge) { 500 } else { FUEL };
        let r = msrs_run(&Command::initial(p.term.clone()), fuel).unwrap();
        match &p.expect {
            Some(Expectation::Value(v)) => assert_eq!(r.unique(), Some(*v), "{}", p.name),
            Some(Expectation::Zero) => assert!(r.results.is_empty() && !r.exhausted, "{}", p.name),
            Some(Expectation::Diverge) => assert!(r.exhausted && r.results.is_empty(), "{}", p.name),
            _ => unreachable!(),
        }
    }
}

#[test]
fn relational_search_agrees() {
    for p in programs().iter().filter(|p| p.is_runnable()) {
        let got = interp_ground(&p.term, 8, 1000).unwrap();
        match &p.expect {
            Some(Expectation::Value(v)) => assert_eq!(got, [*v].into(), "{}", p.name),
            _ => assert!(got.is_empty(), "{}", p.name),
        }
    }
}

#[test]
fn worked_derivative_needs_no_sum() {
    let p = programs().into_iter().find(|p| p.name == "dt").unwrap();
    let trace = cdpcf::rewrite::normalize(&TyCtx::new(), &p.term, 10);
    let last = &trace.last().expect("D T has a redex").after;
    assert!(last.is_simplicit(), "{last}");
}
