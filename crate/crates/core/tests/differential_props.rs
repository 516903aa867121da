use cdpcf::differential::{dlet, dlet_ctx, LinCtx, LinFrame};
use cdpcf::gen::{gen_from_seed, GenConfig};
use cdpcf::typing::infer;
use cdpcf::Term;
use proptest::prelude::*;

/// Splits `t` into its maximal linear context and the subterm in the
/// hole, stopping before any frame that binds `x`.
fn linear_spine<'t>(t: &'t Term, x: &str) -> (LinCtx, &'t Term) {
    let mut frames = Vec::new();
    let mut here = t;
    while let Some((f, inner)) = LinFrame::split(here) {
        if matches!(&f, LinFrame::Abs(y, _) if y == x) {
            break;
        }
        frames.push(f);
        here = inner;
    }
    (LinCtx(frames), here)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn differential_has_the_derived_type(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &GenConfig::default());
        for (x, a) in g.ctx.entries() {
            let ctx = g.ctx.clone().with(x, a.d());
            let d = dlet(x, &g.term);
            prop_assert_eq!(infer(&ctx, &d), Ok(g.ty.d()), "{} wrt {}", g.term, x);
        }
    }

    #[test]
    fn differential_of_a_constant_is_an_injection(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &GenConfig::default());
        let d = dlet("not_free", &g.term);
        let ctx = g.ctx.clone();
        prop_assert_eq!(infer(&ctx, &d), Ok(g.ty.d()));
    }

    #[test]
    fn differential_commutes_with_linear_contexts(seed in any::<u64>()) {
        let g = gen_from_seed(seed, &GenConfig::default());
        let (x, _) = &g.ctx.entries()[0];
        let (l, inner) = linear_spine(&g.term, x);
        let dl = dlet_ctx(x, &l).expect("the spine does not bind x");
        prop_assert_eq!(dlet(x, &l.plug(inner.clone())), dl.plug(dlet(x, inner)));
    }
}
