use cdpcf::rel::{parse_point, point_act, sdiff_expand, sdiff_rel, Point};
use cdpcf::{Bit, Multiset, Word};
use proptest::prelude::*;

fn bit() -> impl Strategy<Value = Bit> {
    prop_oneof![Just(Bit::Zero), Just(Bit::One)]
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(bit(), 0..=max).prop_map(Word)
}

fn point() -> impl Strategy<Value = Point> {
    let leaf = (word(3), 0u64..12).prop_map(|(w, v)| Point::Nat(w, v));
    leaf.prop_recursive(3, 16, 3, |inner| {
        (prop::collection::vec(inner.clone(), 0..3), inner)
            .prop_map(|(m, b)| Point::arrow(m, b))
    })
}

fn first_letter(a: &Point) -> Option<(Bit, Point)> {
    let (delta, rest) = a.decompose(1)?;
    Some((delta.0[0], rest))
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(a in point()) {
        prop_assert_eq!(parse_point(&a.to_string()), Ok(a));
    }

    #[test]
    fn acting_twice_is_acting_with_the_concatenation(a in point(), d in word(3), e in word(3)) {
        prop_assert_eq!(point_act(&d, &point_act(&e, &a)), point_act(&d.concat(&e), &a));
    }

    #[test]
    fn decomposition_undoes_the_action(a in point(), d in word(4)) {
        let acted = point_act(&d, &a);
        prop_assert_eq!(acted.decompose(d.len()), Some((d.clone(), a.clone())));
        prop_assert_eq!(acted.leaf_word(), &d.concat(a.leaf_word()));
    }

    #[test]
    fn sdiff_tags_sum_to_the_bit(ms in prop::collection::vec(point(), 0..4), r in bit()) {
        let m: Multiset<Point> = ms.into_iter().collect();
        let expanded = sdiff_expand(r, &m);
        if r == Bit::One && m.is_empty() {
            prop_assert!(expanded.is_empty());
        }
        for tagged in &expanded {
            prop_assert!(sdiff_rel(tagged, r, &m));
            let mut ones = 0;
            let mut untagged = Multiset::new();
            for a in tagged.iter() {
                let (b, rest) = first_letter(a).expect("every element is tagged");
                ones += usize::from(b == Bit::One);
                untagged.insert(rest);
            }
            prop_assert_eq!(ones, usize::from(r == Bit::One));
            prop_assert_eq!(&untagged, &m);
        }
    }
}
