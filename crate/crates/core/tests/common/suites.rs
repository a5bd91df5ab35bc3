//! Property bodies shared by the per-module suites and the acceptance run.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestRunner};

use speclab_core::digits::DigitSet;
use speclab_core::equipositivity::factor_lower_bound;
use speclab_core::exact_linalg::{ratio, Rat, VecD};
use speclab_core::fractal_dim::reduction_identity_check;
use speclab_core::measure_lab::{digit_fourier, AtomicMeasure};

type Outcome = Result<(), TestCaseError>;

/// Measures in `R^d` with up to 5 atoms, coordinates in `(1/12)Z ∩ [-2,2]`.
pub fn measure(d: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((prop::collection::vec(-24i64..=24, d), 1i64..=9), 1..=5).prop_map(
        move |atoms| {
            let total: i64 = atoms.iter().map(|(_, w)| w).sum();
            AtomicMeasure::from_weighted(
                d,
                atoms.iter().map(|(x, w)| {
                    let p = VecD(x.iter().map(|&c| ratio(c, 12)).collect());
                    (p, ratio(*w, total))
                }),
            )
            .unwrap()
        },
    )
}

pub fn measure_triples() -> impl Strategy<Value = (AtomicMeasure, AtomicMeasure, AtomicMeasure)> {
    (1usize..=3).prop_flat_map(|d| (measure(d), measure(d), measure(d)))
}

pub fn convolution_algebra((a, b, c): (AtomicMeasure, AtomicMeasure, AtomicMeasure)) -> Outcome {
    prop_assert_eq!(a.convolve(&b).unwrap(), b.convolve(&a).unwrap());
    prop_assert_eq!(
        a.convolve(&b).unwrap().convolve(&c).unwrap(),
        a.convolve(&b.convolve(&c).unwrap()).unwrap()
    );
    let total: Rat = a.convolve(&b).unwrap().atoms().values().sum();
    prop_assert_eq!(total, ratio(1, 1));
    Ok(())
}

pub fn measure_pairs_with_xi() -> impl Strategy<Value = (AtomicMeasure, AtomicMeasure, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|d| {
        (
            measure(d),
            measure(d),
            prop::collection::vec(-5.0f64..5.0, d),
        )
    })
}

pub fn fourier_factorization((a, b, xi): (AtomicMeasure, AtomicMeasure, Vec<f64>)) -> Outcome {
    let lhs = a.convolve(&b).unwrap().fourier(&xi);
    let rhs = a.fourier(&xi) * b.fourier(&xi);
    prop_assert!((lhs - rhs).norm() < 1e-12, "{} vs {}", lhs, rhs);
    Ok(())
}

/// `m ≤ 20` with 1000 non-integer frequencies.
pub fn dirichlet_input() -> impl Strategy<Value = (i64, Vec<(i32, f64)>)> {
    (
        1i64..=20,
        prop::collection::vec((-3i32..3, 1e-3f64..(1.0 - 1e-3)), 1000),
    )
}

pub fn dirichlet_kernel((m, xis): (i64, Vec<(i32, f64)>)) -> Outcome {
    for (n, f) in xis {
        let xi = n as f64 + f;
        let sum: Complex64 = (0..m)
            .map(|b| Complex64::from_polar(1.0, -2.0 * PI * b as f64 * xi))
            .sum();
        let closed = ((m as f64 * PI * xi).sin() / (PI * xi).sin()).abs();
        prop_assert!((sum.norm() - closed).abs() < 1e-10, "m={} xi={}", m, xi);
    }
    Ok(())
}

pub fn stage_one_input() -> impl Strategy<Value = (u64, usize, Vec<f64>)> {
    (
        2u64..=20,
        1usize..=3,
        prop::collection::vec(-1.0f64..=1.0, 3),
    )
}

/// `|δ̂_{{0..m-1}^d}(ξ)| ≥ Π(1 - m²π²ξ_j²/6)` on `|ξ_j| ≤ √6/(mπ)`.
pub fn stage_one_bound((m, d, ts): (u64, usize, Vec<f64>)) -> Outcome {
    let edge = 6f64.sqrt() / (m as f64 * PI);
    let xi: Vec<f64> = ts[..d].iter().map(|t| t * edge).collect();
    let lower = factor_lower_bound(m, 0, &xi).unwrap();
    prop_assert!(digit_fourier(&DigitSet::cube(m, d), &xi).norm() >= lower - 1e-12);
    let one = 1.0 - (m as f64 * PI * xi[0]).powi(2) / 6.0;
    prop_assert!(digit_fourier(&DigitSet::cube(m, 1), &xi[..1]).norm() >= one - 1e-12);
    Ok(())
}

type Pairs = (usize, Vec<BTreeSet<(i64, i64)>>, Vec<BTreeSet<(i64, i64)>>);

pub fn reduction_input() -> impl Strategy<Value = Pairs> {
    let set = |min| prop::collection::btree_set((-6i64..=6, 1i64..=4), min..=3);
    (
        1usize..=4,
        prop::collection::vec(set(1), 4),
        prop::collection::vec(set(0), 4),
    )
}

pub fn reduction_identity((k, a, ap): Pairs) -> Outcome {
    let to_sets = |s: &[BTreeSet<(i64, i64)>]| -> Vec<Vec<VecD>> {
        s.iter()
            .map(|set| set.iter().map(|&(p, q)| VecD(vec![ratio(p, q)])).collect())
            .collect()
    };
    prop_assert!(reduction_identity_check(&to_sets(&a), &to_sets(&ap), k, 1 << 16).unwrap());
    Ok(())
}

fn run<S: Strategy>(
    cases: u32,
    seed: u64,
    s: S,
    f: impl Fn(S::Value) -> Outcome,
) -> Result<(), String> {
    TestRunner::new(super::config(cases, seed))
        .run(&s, f)
        .map_err(|e| e.to_string())
}

/// The five named suites with fixed seeds.
pub fn run_named() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "convolution algebra",
            run(128, 0x31, measure_triples(), convolution_algebra),
        ),
        (
            "Fourier factorization",
            run(128, 0x32, measure_pairs_with_xi(), fourier_factorization),
        ),
        (
            "Dirichlet kernel",
            run(64, 0x33, dirichlet_input(), dirichlet_kernel),
        ),
        (
            "stage-(1) bound",
            run(256, 0x34, stage_one_input(), stage_one_bound),
        ),
        (
            "finite reduction identity",
            run(128, 0x65, reduction_input(), reduction_identity),
        ),
    ]
}
