#![allow(dead_code)]

pub mod suites;

use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use speclab_core::digits::DigitSet;
use speclab_core::exact_linalg::{MatD, VecD};
use speclab_core::sequence::{SequenceSpec, Stage};

pub fn config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Integer `d×d` matrices with entries in `[-bound, bound]` and nonzero determinant.
pub fn invertible(d: usize, bound: i64) -> impl Strategy<Value = MatD> {
    prop::collection::vec(-bound..=bound, d * d)
        .prop_map(move |e| {
            let rows: Vec<&[i64]> = e.chunks(d).collect();
            MatD::from_int_rows(&rows).unwrap()
        })
        .prop_filter("singular", |m| !m.det().is_zero())
}

pub fn int_vec(d: usize, bound: i64) -> impl Strategy<Value = VecD> {
    prop::collection::vec(-bound..=bound, d).prop_map(|v| VecD::from_ints(&v))
}

/// Distinct integer points in `[lo, hi]^d`, at least one.
pub fn int_set(d: usize, lo: i64, hi: i64, max_len: usize) -> impl Strategy<Value = DigitSet> {
    prop::collection::btree_set(prop::collection::vec(lo..=hi, d), 1..=max_len).prop_map(|s| {
        let pts: Vec<VecD> = s.iter().map(|v| VecD::from_ints(v)).collect();
        DigitSet::new(pts).unwrap()
    })
}

/// `{0..m-1}^d` with every element moved by its own `R·z`.
pub fn residue_shifted_cube(r: &MatD, m: u64, zs: &[VecD]) -> DigitSet {
    let pts: Vec<VecD> = DigitSet::cube(m, r.dim())
        .iter()
        .zip(zs.iter().cycle())
        .map(|(u, z)| u.add(&r.mul_vec(z)))
        .collect();
    DigitSet::new(pts).unwrap()
}

/// An explicit spec with stages `(m, C·I, B)` where `C = m·q`.
pub fn scalar_spec(d: usize, params: &[(u64, i64, DigitSet)]) -> SequenceSpec {
    let stages = params
        .iter()
        .map(|(m, c, b)| {
            Stage::new(
                Some(*m),
                MatD::scalar(d, speclab_core::exact_linalg::rat(*c)),
                b.clone(),
                None,
            )
            .unwrap()
        })
        .collect();
    SequenceSpec::explicit(d, stages, None).unwrap()
}
