mod common;

use proptest::prelude::*;

use speclab_core::constructions::TargetDims;
use speclab_core::exact_linalg::{ratio, MatD, Rat};
use speclab_core::sequence::{Family, SequenceSpec, Stage};
use speclab_core::specfile::{parse_spec, print_spec};
use speclab_core::Error;

fn stage(d: usize) -> impl Strategy<Value = Stage> {
    (
        prop::option::of(2u64..=9),
        common::invertible(d, 6),
        1i64..=3,
        common::int_set(d, -4, 9, 5),
        prop::option::of(common::int_set(d, -3, 3, 5)),
    )
        .prop_map(move |(m, r, den, b, l)| {
            // rational entries as well as integer ones
            let rows: Vec<Vec<Rat>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| r.get(i, j) / Rat::from_integer(den.into()))
                        .collect()
                })
                .collect();
            Stage::new(m, MatD::from_rows(rows).unwrap(), b, l).unwrap()
        })
}

fn explicit() -> impl Strategy<Value = SequenceSpec> {
    (1usize..=3)
        .prop_flat_map(|d| {
            (
                Just(d),
                prop::collection::vec(stage(d), 1..=4),
                prop::option::of((0i64..=9, 1i64..=9)),
            )
        })
        .prop_map(|(d, stages, tail)| {
            SequenceSpec::explicit(d, stages, tail.map(|(p, q)| ratio(p, q))).unwrap()
        })
}

fn family() -> impl Strategy<Value = SequenceSpec> {
    (1usize..=3, 0u8..4, 0i64..=6, 0i64..=6).prop_map(|(d, which, a, b)| {
        let (lo, hi) = (a.min(b), a.max(b));
        let t = TargetDims::new(d, ratio(lo * d as i64, 6), ratio(hi * d as i64, 6)).unwrap();
        match which {
            0 => SequenceSpec::quarter(d),
            1 => SequenceSpec::family(d, Family::Compact(t)),
            2 => SequenceSpec::family(d, Family::Noncompact(t)),
            _ => SequenceSpec::family(1, Family::Counterexample),
        }
    })
}

proptest! {
    #![proptest_config(common::config(256, 0x81))]

    #[test]
    fn explicit_round_trip(spec in explicit()) {
        let text = print_spec(&spec);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(print_spec(&back), text);
        let k = spec.prefix_len().unwrap();
        for i in 1..=k {
            let (a, b) = (spec.stage(i).unwrap(), back.stage(i).unwrap());
            prop_assert_eq!(a.m, b.m);
            prop_assert_eq!(a.r, b.r);
            prop_assert_eq!(a.digits, b.digits);
            prop_assert_eq!(a.dual, b.dual);
        }
    }

    #[test]
    fn family_round_trip(spec in family()) {
        let text = print_spec(&spec);
        prop_assert_eq!(print_spec(&parse_spec(&text).unwrap()), text);
    }

    #[test]
    fn parse_is_total(text in "[\\[\\]a-z0-9=;(),/# \n-]{0,200}") {
        match parse_spec(&text) {
            Ok(spec) => prop_assert_eq!(print_spec(&parse_spec(&print_spec(&spec)).unwrap()), print_spec(&spec)),
            Err(Error::Parse { line, .. }) => prop_assert!(line >= 1 && line <= text.lines().count().max(1)),
            Err(e) => prop_assert!(false, "non-parse error {e}"),
        }
    }

    #[test]
    fn damaged_files_fail_cleanly(spec in explicit(), at in any::<prop::sample::Index>(), with in "[a-z0-9;(),/=\\[\\] -]?") {
        let mut text: Vec<char> = print_spec(&spec).chars().collect();
        let i = at.index(text.len());
        text.splice(i..=i, with.chars());
        let text: String = text.into_iter().collect();
        match parse_spec(&text) {
            Ok(_) => {}
            Err(Error::Parse { line, .. }) => prop_assert!(line >= 1 && line <= text.lines().count().max(1)),
            Err(e) => prop_assert!(false, "non-parse error {e}"),
        }
    }
}
