mod common;

use num_rational::BigRational;
use proptest::prelude::*;

use speclab_core::constructions::TargetDims;
use speclab_core::digits::DigitSet;
use speclab_core::equipositivity::{
    factor_lower_bound, integer_shift, nesting_check, verify_tail_positivity,
};
use speclab_core::exact_linalg::{rat, ratio, MatD, VecD};
use speclab_core::hadamard::hypotheses_check;
use speclab_core::measure_lab::digit_fourier;
use speclab_core::sequence::{Family, SequenceSpec, Stage};
use speclab_core::spectrum_verify::random_grid;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// Stage `(m, 2m·I, B)` with `c` cube digits pushed out by `2m·e_1`.
fn excess_stage(d: usize, m: u64, c: usize) -> Stage {
    let r = MatD::scalar(d, rat(2 * m as i64));
    let mut pts: Vec<VecD> = DigitSet::cube(m, d).iter().collect();
    for p in pts.iter_mut().take(c) {
        p.0[0] += rat(2 * m as i64);
    }
    Stage::new(Some(m), r, DigitSet::new(pts).unwrap(), None).unwrap()
}

proptest! {
    #![proptest_config(common::config(256, 0x51))]

    #[test]
    fn shift_lands_in_box(
        x in prop::collection::vec(0.0f64..1.0, 1..=4),
        t in prop::collection::vec(-0.999f64..0.999, 4),
    ) {
        let k = integer_shift(&x).unwrap();
        let edge = ratio(2, 3);
        for i in 0..x.len() {
            // |y| < 1/6
            let y = exact(t[i]) * ratio(1, 6);
            let z = exact(x[i]) + rat(k[i]) + y;
            prop_assert!(z >= -edge.clone() && z <= edge, "x={:?}", x);
        }
    }

    #[test]
    fn stage_one_bound_is_sound(
        d in 1usize..=2,
        m in 2u64..=6,
        c in 0usize..=4,
        zs in prop::collection::vec(common::int_vec(2, 3), 4),
        ts in prop::collection::vec(-1.0f64..=1.0, 2),
    ) {
        let q = 3i64;
        let big = rat(m as i64 * q);
        let mut pts: Vec<VecD> = DigitSet::cube(m, d).iter().collect();
        let c = c.min(pts.len());
        for (p, z) in pts.iter_mut().zip(&zs).take(c) {
            let z = VecD(z.coords()[..d].to_vec());
            *p = p.add(&z.scale(&big));
        }
        let b = DigitSet::new(pts);
        prop_assume!(b.is_ok());
        let b = b.unwrap();
        let excess = b.excess_over_cube(m);
        let edge = 6f64.sqrt() / (m as f64 * std::f64::consts::PI);
        let xi: Vec<f64> = ts[..d].iter().map(|t| t * edge).collect();
        let lower = factor_lower_bound(m, excess, &xi).unwrap();
        prop_assert!(digit_fourier(&b, &xi).norm() >= lower - 1e-12);
    }
}

proptest! {
    #![proptest_config(common::config(24, 0x52))]

    #[test]
    fn grid_min_drops_with_later_excess(c in 0usize..=2, extra in 1usize..=2, seed in any::<u64>()) {
        // stages 1..=4 identical; the scanned window is n=1, K=3
        let build = |tail_c: usize| {
            let mut stages: Vec<Stage> = (0..4).map(|k| excess_stage(1, 32, k % 2)).collect();
            stages.extend((0..3).map(|_| excess_stage(1, 32, tail_c)));
            SequenceSpec::explicit(1, stages, None).unwrap()
        };
        let grid = random_grid(1, 64, seed, -2.0 / 3.0, 2.0 / 3.0);
        let lo = verify_tail_positivity(&build(c), 1, 3, &grid).unwrap();
        let hi = verify_tail_positivity(&build(c + extra), 1, 3, &grid).unwrap();
        prop_assert!(hi.grid_min <= lo.grid_min);
        prop_assert!(hi.epsilon <= lo.epsilon);
    }

    #[test]
    fn nesting_follows_cube_hypothesis(
        perturb in prop::collection::vec(prop::collection::vec(-1i64..=1, 4), 12),
        ms in prop::collection::vec(2u64..=3, 12),
        n in 0usize..=2,
    ) {
        let stages: Vec<Stage> = perturb
            .iter()
            .zip(&ms)
            .map(|(e, &m)| {
                let mi = m as i64;
                let rows = [[mi * (3 + e[0]), mi * e[1]], [mi * e[2], mi * (3 + e[3])]];
                let r = MatD::from_int_rows(&[&rows[0], &rows[1]]).unwrap();
                Stage::new(Some(m), r, DigitSet::cube(m, 2), None)
            })
            .collect::<Result<_, _>>()
            .unwrap();
        let spec = SequenceSpec::explicit(2, stages, None).unwrap();
        let hyp = hypotheses_check(&spec, n + 10, 1 << 16).unwrap();
        prop_assume!(hyp.rows[n..].iter().all(|r| r.cube_ok));
        prop_assert!(nesting_check(&spec, n, 10).unwrap().iter().all(|&ok| ok));
    }
}

#[test]
fn nesting_on_the_families() {
    let t = TargetDims::new(2, ratio(1, 2), rat(1)).unwrap();
    for spec in [
        SequenceSpec::quarter(1),
        SequenceSpec::quarter(2),
        SequenceSpec::family(2, Family::Compact(t.clone())),
        SequenceSpec::family(2, Family::Noncompact(t)),
    ] {
        for n in 0..3 {
            assert!(nesting_check(&spec, n, 10).unwrap().iter().all(|&ok| ok));
        }
    }
}
