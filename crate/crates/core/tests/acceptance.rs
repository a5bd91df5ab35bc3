//! One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclab_core::constructions::{
    block_sequence, compact_family, counterexample_inequalities, counterexample_prefix,
    counterexample_witness, TargetDims,
};
use speclab_core::digits::DigitSet;
use speclab_core::equipositivity::{epsilon_bound, verify_tail_positivity};
use speclab_core::exact_linalg::{cube_containment, fmt_rat, rat, ratio, MatD, Rat, VecD};
use speclab_core::fractal_dim::{
    box_count_oracle, dim_scan, sumset_contains_1d, truncated_sumset, MoranSpec, MoranStage,
};
use speclab_core::hadamard::{
    canonical_dual, check_unitary, numeric_unitarity, stage_triple, Verification,
};
use speclab_core::measure_lab::{finite_convolution, jessen_wintner_partial};
use speclab_core::sequence::{SequenceSpec, Stage};
use speclab_core::spectrum_verify::{
    check_orthogonality, check_parseval, random_grid, tower_spectrum,
};

const CAP: u128 = 1_000_000;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass_if(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_invertible(rng: &mut ChaCha8Rng, d: usize, bound: i64) -> MatD {
    loop {
        let e: Vec<i64> = (0..d * d).map(|_| rng.gen_range(-bound..=bound)).collect();
        let rows: Vec<&[i64]> = e.chunks(d).collect();
        let m = MatD::from_int_rows(&rows).unwrap();
        if !m.det().is_zero() {
            return m;
        }
    }
}

fn c1_matrix_example() -> Outcome {
    let r = MatD::from_int_rows(&[&[4, -2], &[0, 2]]).unwrap();
    let direct = cube_containment(&r, &rat(2)).unwrap();
    let flipped = cube_containment(&r.transpose(), &rat(2)).unwrap();
    let expected = (
        VecD::from_ints(&[2, 2]),
        VecD(vec![ratio(1, 2), ratio(3, 2)]),
    );
    let ok = direct.contained && !flipped.contained && flipped.witness.as_ref() == Some(&expected);
    let witness = flipped
        .witness
        .map(|(v, img)| format!("{v} -> {img}"))
        .unwrap_or_else(|| "none".into());
    pass_if(
        ok,
        format!("R: contained={}, R^T: witness {witness}", direct.contained),
    )
}

/// Worst Parseval defect and orthogonality modulus over levels `1..=n`.
fn tower_defects(spec: &SequenceSpec, d: usize, n_max: usize) -> Result<(f64, f64), String> {
    let stages = spec.stages(n_max).map_err(|e| e.to_string())?;
    let triples = stages
        .iter()
        .map(|s| stage_triple(s, 1e-10))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let (mut parseval, mut orth) = (0f64, 0f64);
    for n in 1..=n_max {
        let mu = finite_convolution(spec, n, CAP).map_err(|e| e.to_string())?;
        let lambda = tower_spectrum(&triples, n).map_err(|e| e.to_string())?;
        let grid = random_grid(d, 1000, 2024 + n as u64, 0.0, 1.0);
        parseval = parseval.max(check_parseval(&mu, &lambda, &grid).max_defect);
        orth = orth.max(check_orthogonality(&mu, &lambda, 1e-10).worst_modulus);
    }
    Ok((parseval, orth))
}

fn c2_parseval() -> Outcome {
    // R = 4, B = {0,2} with its spectrum {0,1}, and the family reading B = {0,1}, L = {0,2}
    let stage = Stage::new(
        Some(2),
        MatD::scalar(1, rat(4)),
        DigitSet::from_ints_1d(&[0, 2]).unwrap(),
        Some(DigitSet::from_ints_1d(&[0, 1]).unwrap()),
    )
    .unwrap();
    let b02 = SequenceSpec::explicit(1, vec![stage; 5], None).unwrap();
    let runs = [
        ("B={0,2}", tower_defects(&b02, 1, 5)),
        ("B={0,1}", tower_defects(&SequenceSpec::quarter(1), 1, 5)),
        ("d=2", tower_defects(&SequenceSpec::quarter(2), 2, 3)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, r) in runs {
        match r {
            Ok((p, o)) => {
                ok &= p < 1e-9 && o <= 1e-10;
                parts.push(format!("{name}: maxDefect {p:.2e}, orth {o:.2e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    pass_if(ok, parts.join("; "))
}

fn c3_exact_path_soundness() -> Outcome {
    let mut rng = rng(3);
    let (mut count, mut worst) = (0, 0f64);
    for d in 1..=3usize {
        for m in 1..=3u64 {
            for _ in 0..20 {
                let r = MatD::scalar(d, rat(m as i64)).mul(&random_invertible(&mut rng, d, 2));
                let zs: Vec<VecD> = (0..4)
                    .map(|_| {
                        VecD::from_ints(&(0..d).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>())
                    })
                    .collect();
                let b = common::residue_shifted_cube(&r, m, &zs);
                let l = canonical_dual(&r, m).unwrap();
                let t = check_unitary(&r, &b, &l, 1e-10).unwrap();
                if t.verified != Verification::ExactByConstruction {
                    return pass_if(false, format!("exact path not taken for R={r}, B={b:?}"));
                }
                let (defect, _) = numeric_unitarity(&r, &b, &l).unwrap();
                worst = worst.max(defect);
                count += 1;
            }
        }
    }
    pass_if(
        worst < 1e-10,
        format!("{count} instances, worst numeric defect {worst:.2e}"),
    )
}

fn random_moran(rng: &mut ChaCha8Rng) -> MoranSpec {
    loop {
        let d = rng.gen_range(1..=2);
        let depth = rng.gen_range(1..=8);
        let mut stages = Vec::new();
        let mut cells: u128 = 1;
        for _ in 0..depth {
            let c: i64 = rng.gen_range(1..=3);
            let big_c = c + rng.gen_range(1..=3);
            let mut all: Vec<VecD> = DigitSet::cube(c as u64 + 1, d).iter().collect();
            all.shuffle(rng);
            all.truncate(rng.gen_range(1..=all.len()));
            let g = DigitSet::new(all).unwrap();
            cells *= g.len();
            stages.push(MoranStage::new(rat(c), rat(big_c), g, Vec::new()).unwrap());
        }
        if cells <= 100_000 {
            return MoranSpec::explicit(d, stages).unwrap();
        }
    }
}

fn c4_box_count() -> Outcome {
    let mut rng = rng(4);
    for i in 0..20 {
        let spec = random_moran(&mut rng);
        let k = spec.prefix_len().unwrap();
        match box_count_oracle(&spec, k, 100_000) {
            Ok(b) if b.agrees() => {}
            Ok(b) => return pass_if(false, format!("spec {i}: {b:?}")),
            Err(e) => return pass_if(false, format!("spec {i}: {e}")),
        }
    }
    pass_if(
        true,
        "20 random Moran specs, formula count = enumerated count",
    )
}

// Closed-form log sums evaluated to 40 digits, rounded to f64, frozen.
const RATIO_AT_L4: f64 = 0.500_940_648_828_352_9;
const WINDOW_MIN: f64 = 0.500_940_648_828_352_9;
const WINDOW_MAX: f64 = 0.978_104_349_150_873_7;

fn c5_trajectory() -> Outcome {
    let t = TargetDims::new(1, ratio(1, 2), rat(1)).unwrap();
    let (_, moran) = compact_family(&t);
    let l2 = 16usize;
    let l4 = 65_536usize;
    let l5 = 1usize << 25;
    assert_eq!(block_sequence(4), l4.into());
    let (mut at_l4, mut lo, mut hi) = (f64::NAN, f64::INFINITY, f64::NEG_INFINITY);
    let rep = dim_scan(&moran, l5, 1000, |row| {
        if row.k == l4 {
            at_l4 = row.ratio;
        }
        if row.k > l2 {
            lo = lo.min(row.ratio);
            hi = hi.max(row.ratio);
        }
    });
    if let Err(e) = rep {
        return pass_if(false, e.to_string());
    }
    let ok = (at_l4 - 0.5).abs() <= 0.1
        && (at_l4 - RATIO_AT_L4).abs() < 1e-9
        && (lo - 0.5).abs() <= 0.1
        && (hi - 1.0).abs() <= 0.1
        && (lo - WINDOW_MIN).abs() < 1e-9
        && (hi - WINDOW_MAX).abs() < 1e-9;
    pass_if(
        ok,
        format!("ratio at k=65536 {at_l4:.12}, blocks 2..4 spread [{lo:.12}, {hi:.12}]"),
    )
}

fn c6_equipositivity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in 1..=2 {
        let grid = random_grid(d, 1000, 6 + d as u64, -2.0 / 3.0, 2.0 / 3.0);
        match verify_tail_positivity(&SequenceSpec::quarter(d), 1, 20, &grid) {
            Ok(tp) => {
                let eps = epsilon_bound(d, 0.0);
                ok &= tp.grid_min > eps;
                parts.push(format!(
                    "d={d}: gridMin {:.6e} > eps {eps:.6e}",
                    tp.grid_min
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("d={d}: {e}"));
            }
        }
    }
    pass_if(ok, parts.join("; "))
}

fn c7_counterexample() -> Outcome {
    let p = match counterexample_prefix(8) {
        Ok(p) => p,
        Err(e) => return pass_if(false, e.to_string()),
    };
    let report = counterexample_inequalities(&p);
    if !report.all_ok() {
        let names: Vec<String> = report
            .failures()
            .iter()
            .map(|c| format!("k={:?} {}", c.k, c.name))
            .collect();
        return pass_if(false, names.join(", "));
    }
    for n in 1..=8 {
        let target = ratio(n as i64, n as i64 + 1);
        let witness_ok =
            counterexample_witness(&p, n).is_some_and(|w| w.iter().sum::<Rat>() == target);
        // exhaustive search is only tractable on short prefixes; the witness covers the rest
        let searched = n > 5 || sumset_contains_1d(&p.sets[..n], &target);
        if !witness_ok || !searched {
            return pass_if(false, format!("{} not reached", fmt_rat(&target)));
        }
    }
    pass_if(
        true,
        format!(
            "{} exact checks, n/(n+1) witnessed for n <= 8, searched for n <= 5",
            report.checks.len()
        ),
    )
}

fn c8_partial_sums() -> Outcome {
    let skew = Stage::new(
        Some(2),
        MatD::from_int_rows(&[&[4, 0], &[-2, 2]]).unwrap(),
        DigitSet::cube(2, 2),
        None,
    )
    .unwrap();
    let specs = [
        ("quarter d=1", SequenceSpec::quarter(1)),
        ("quarter d=2", SequenceSpec::quarter(2)),
        (
            "skew d=2",
            SequenceSpec::explicit(2, vec![skew; 30], None).unwrap(),
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, spec) in specs {
        match jessen_wintner_partial(&spec, 30, CAP) {
            Ok(r) => {
                let d = spec.d() as f64;
                let bound = 2.0 * d * d.sqrt();
                ok &= r.cube_cap.is_some() && r.partial_sum < bound;
                parts.push(format!("{name}: {:.6} < {bound:.4}", r.partial_sum));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    pass_if(ok, parts.join("; "))
}

fn c9_support_identity() -> Outcome {
    let mut rng = rng(9);
    for i in 0..10 {
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=5);
        let stages: Vec<Stage> = (0..k)
            .map(|_| {
                let m = rng.gen_range(2..=3u64);
                let r = MatD::scalar(d, rat(m as i64)).mul(&random_invertible(&mut rng, d, 2));
                // arbitrary digits, including extra ones outside the cube
                let mut pts: BTreeSet<VecD> = DigitSet::cube(m, d).iter().collect();
                for _ in 0..rng.gen_range(0..=2) {
                    pts.insert(VecD::from_ints(
                        &(0..d).map(|_| rng.gen_range(-5..=5)).collect::<Vec<_>>(),
                    ));
                }
                let mut pts: Vec<VecD> = pts.into_iter().collect();
                pts.truncate(if d == 1 { 5 } else { 6 });
                Stage::new(Some(m), r, DigitSet::new(pts).unwrap(), None).unwrap()
            })
            .collect();
        let spec = SequenceSpec::explicit(d, stages, None).unwrap();
        let mu = finite_convolution(&spec, k, CAP).unwrap();
        let support: BTreeSet<VecD> = mu.support().cloned().collect();
        if truncated_sumset(&spec, k, CAP).unwrap() != support {
            return pass_if(false, format!("spec {i} (d={d}, K={k})"));
        }
    }
    pass_if(true, "10 random specs, K <= 5, exact set equality")
}

fn c10_properties() -> Outcome {
    let results = common::suites::run_named();
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    if failed.is_empty() {
        pass_if(true, names.join(", "))
    } else {
        pass_if(false, failed.join("; "))
    }
}

/// Name, check, time budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("matrix example", c1_matrix_example, Duration::from_secs(1)),
        (
            "finite-level Parseval",
            c2_parseval,
            Duration::from_secs(60),
        ),
        (
            "exact-path soundness",
            c3_exact_path_soundness,
            Duration::from_secs(60),
        ),
        ("box count", c4_box_count, Duration::from_secs(60)),
        (
            "dimension trajectory",
            c5_trajectory,
            Duration::from_secs(10),
        ),
        (
            "equi-positivity",
            c6_equipositivity,
            Duration::from_secs(60),
        ),
        ("non-closed sum", c7_counterexample, Duration::from_secs(10)),
        ("summability cap", c8_partial_sums, Duration::from_secs(10)),
        (
            "support identity",
            c9_support_identity,
            Duration::from_secs(10),
        ),
        ("property suites", c10_properties, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let ok = out.ok && took <= *budget;
        if !ok {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
