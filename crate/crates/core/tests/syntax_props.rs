use cdpcf::gen::{gen_from_seed, GenConfig};
use cdpcf::syntax::parse_term;
use cdpcf::syntax::term::{self, fresh_name};
use cdpcf::typing::infer;
use proptest::prelude::*;

fn cfg() -> GenConfig {
    GenConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &cfg());
        let text = g.term.to_string();
        let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, g.term);
    }

    #[test]
    fn canonical_form_is_alpha_equivalent_and_idempotent(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &cfg());
        let c = g.term.canonical();
        prop_assert!(c.alpha_eq(&g.term));
        prop_assert_eq!(c.canonical(), c);
    }

    #[test]
    fn renaming_a_free_variable_to_a_fresh_one_and_back(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &cfg());
        for x in g.term.free_vars() {
            let avoid = g.term.free_vars().union(&g.term.canonical().free_vars()).cloned().collect();
            let y = fresh_name(&x, &avoid);
            let there = g.term.rename(&x, &y);
            prop_assert!(!there.is_free(&x));
            prop_assert!(there.rename(&y, &x).alpha_eq(&g.term));
        }
    }

    #[test]
    fn substituting_an_absent_variable_changes_nothing(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &cfg());
        prop_assert_eq!(g.term.subst("absent", &term::var("x")), g.term.clone());
    }

    #[test]
    fn substitution_preserves_types(seed in any::<u64>(), other in any::<u64>()) {
        let g = gen_from_seed(seed, &cfg());
        let (x, a) = g.ctx.entries()[0].clone();
        // Any term of type `a` in the same context will do as the argument.
        let n = (0..64)
            .map(|k| gen_from_seed(other.wrapping_add(k), &cfg()))
            .find(|h| h.ty == a && h.ctx.entries() == g.ctx.entries())
            .map(|h| h.term)
            .unwrap_or_else(|| term::var(&x));
        let m = g.term.subst(&x, &n);
        prop_assert_eq!(infer(&g.ctx, &m), Ok(g.ty.clone()), "{}", m);
    }

    #[test]
    fn substitution_removes_the_variable(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &cfg());
        let (x, _) = &g.ctx.entries()[0];
        let m = g.term.subst(x, &term::Term::Num(0));
        prop_assert!(!m.is_free(x));
    }
}
