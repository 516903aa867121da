use std::collections::BTreeSet;

use cdpcf::gen::{gen_from_seed, GenConfig};
use cdpcf::machine::det::{det_run, det_step, dwords_expand, DetOutcome, DetState, DetStep};
use cdpcf::machine::krivine::{check_command, machine_step, msrs_run, Command, Step};
use cdpcf::{Term, Ty};
use proptest::prelude::*;

const FUEL: usize = 2_000;
const DWORDS_STEPS: usize = 300;
/// Each cell doubles the expansion, so runs are checked only while they
/// hold at most this many cells.
const DWORDS_CELLS: usize = 10;

/// A closed program of type `Nat`, found by scanning seeds from `seed`.
fn closed_program(seed: u64) -> Term {
    let cfg = GenConfig {
        free_vars: 0,
        max_size: 20,
        ..GenConfig::default()
    };
    (0..)
        .map(|k| gen_from_seed(seed.wrapping_add(k), &cfg))
        .find(|g| g.ty == Ty::nat())
        .expect("some seed yields a Nat program")
        .term
}

fn successors(c: &Command) -> Vec<Command> {
    match machine_step(c).expect("well-typed command") {
        Step::Next(_, x) => vec![x],
        Step::Split(a, b) => vec![a, b],
        Step::Zero | Step::Terminal(_) => Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reachable_commands_are_well_typed(seed in any::<u64>()) {
        let m = closed_program(seed);
        let mut frontier = vec![Command::initial(m)];
        let mut budget = FUEL;
        while let Some(c) = frontier.pop() {
            prop_assert!(check_command(&c).is_ok(), "{:?}: {:?}", c, check_command(&c));
            if budget == 0 {
                break;
            }
            budget -= 1;
            frontier.extend(successors(&c));
        }
    }

    #[test]
    fn machines_agree_on_result_and_step_count(seed in any::<u64>()) {
        let m = closed_program(seed);
        let det = det_run(&m, FUEL).unwrap();
        let ms = msrs_run(&Command::initial(m.clone()), FUEL).unwrap();
        prop_assume!(det.outcome != DetOutcome::Timeout && !ms.exhausted);
        match det.outcome {
            DetOutcome::Value(v) => {
                prop_assert_eq!(ms.unique(), Some(v), "{}", m);
                prop_assert_eq!(ms.successes[0].steps, det.steps, "{}", m);
            }
            _ => prop_assert!(ms.results.is_empty(), "{}", m),
        }
    }

    #[test]
    fn at_most_one_numeral_is_collected(seed in any::<u64>()) {
        let m = closed_program(seed);
        let ms = msrs_run(&Command::initial(m.clone()), FUEL).unwrap();
        prop_assert!(ms.results.support().count() <= 1, "{}: {:?}", m, ms.results);
    }

    #[test]
    fn dwords_expansion_simulates_both_ways(seed in any::<u64>()) {
        let m = closed_program(seed);
        let mut g = DetState::initial(m.clone());
        for _ in 0..DWORDS_STEPS {
            prop_assert!(g.is_well_formed());
            if g.cells().len() > DWORDS_CELLS {
                break;
            }
            let here = dwords_expand(&g);
            match det_step(&g).unwrap() {
                DetStep::Next(_, g2) => {
                    let reached: BTreeSet<Command> = here.iter().flat_map(successors).collect();
                    prop_assert_eq!(&reached, &dwords_expand(&g2), "{}", m);
                    g = g2;
                }
                _ => {
                    prop_assert!(here.iter().all(|c| successors(c).is_empty()), "{}", m);
                    break;
                }
            }
        }
    }
}
