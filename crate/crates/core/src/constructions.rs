//! Explicit families: compactly supported spectral measures with prescribed
//! lower/upper dimensions, their non-compact variants with a far digit, and
//! the finite sets whose infinite sum fails to be closed.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact_linalg::{fmt_rat, rat, rat_from_big, ratio, Rat};
use crate::fractal_dim::MoranSpec;
use crate::sequence::{Family, SequenceSpec};

/// Target lower and upper dimensions `0 ≤ α ≤ β ≤ d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TargetDims {
    d: usize,
    alpha: Rat,
    beta: Rat,
    /// `α/d`, `β/d`.
    gammas: [Rat; 2],
}

impl TargetDims {
    pub fn new(d: usize, alpha: Rat, beta: Rat) -> Result<Self> {
        if d == 0 {
            return Err(Error::PreconditionViolated("d must be positive".into()));
        }
        let dr = rat(d as i64);
        if alpha.is_negative() || alpha > beta || beta > dr {
            return Err(Error::PreconditionViolated(format!(
                "need 0 <= alpha <= beta <= d, got alpha={}, beta={}, d={d}",
                fmt_rat(&alpha),
                fmt_rat(&beta)
            )));
        }
        let gammas = [&alpha / &dr, &beta / &dr];
        Ok(TargetDims {
            d,
            alpha,
            beta,
            gammas,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }

    /// Exponent used on stage `k`: `α/d` on odd blocks, `β/d` on even ones.
    pub fn gamma_at(&self, k: u64) -> &Rat {
        &self.gammas[block_index(k).is_multiple_of(2) as usize]
    }
}

/// Natural log of a big integer.
pub fn ln_big(n: &BigUint) -> f64 {
    match n.to_f64() {
        Some(x) if x.is_finite() => x.ln(),
        _ => {
            let shift = n.bits() - 64;
            (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// `⌊ln n⌋` (natural logarithm).
pub fn floor_ln(n: &BigUint) -> u32 {
    ln_big(n).floor().max(0.0) as u32
}

fn check_gamma(gamma: &Rat) -> Result<()> {
    if gamma.is_negative() || *gamma > Rat::one() {
        return Err(Error::PreconditionViolated(format!(
            "gamma must lie in [0,1], got {}",
            fmt_rat(gamma)
        )));
    }
    Ok(())
}

/// `g_γ(n)`: `n^(1+⌊ln n⌋)` for `γ = 0`, `⌊n^(1/γ-1)⌋·n` for `0 < γ < 1`,
/// `2n` for `γ = 1`. Exact.
pub fn g_gamma(gamma: &Rat, n: &BigUint) -> Result<BigUint> {
    check_gamma(gamma)?;
    if n.is_zero() {
        return Err(Error::PreconditionViolated("n must be positive".into()));
    }
    if gamma.is_zero() {
        return Ok(n.pow(1 + floor_ln(n)));
    }
    if gamma.is_one() {
        return Ok(n * 2u32);
    }
    // 1/γ - 1 = (q - p)/p for γ = p/q
    let p = gamma
        .numer()
        .to_u32()
        .ok_or_else(|| Error::PreconditionViolated("gamma numerator too large".into()))?;
    let q = gamma
        .denom()
        .to_u32()
        .ok_or_else(|| Error::PreconditionViolated("gamma denominator too large".into()))?;
    let root = n.pow(q - p).nth_root(p);
    Ok(root * n)
}

/// `ln g_γ(n)` without forming `g_γ(n)` when it is astronomically large.
pub fn ln_g_gamma(gamma: &Rat, n: u128) -> f64 {
    LnGamma::new(gamma).eval(n)
}

/// [`ln_g_gamma`] with the exponent inspected once, for long scans.
#[derive(Clone, Debug)]
pub struct LnGamma {
    gamma: Rat,
    shape: GammaShape,
}

#[derive(Clone, Copy, Debug)]
enum GammaShape {
    Zero,
    One,
    /// `g_γ(n) = n^p`
    Power(f64),
    /// `n^e` with non-integer `e = 1/γ - 1`
    Root(f64),
}

impl LnGamma {
    pub fn new(gamma: &Rat) -> Self {
        let shape = if gamma.is_zero() {
            GammaShape::Zero
        } else if gamma.is_one() {
            GammaShape::One
        } else if gamma.numer().is_one() {
            // γ = 1/(e+1) with integer e: g_γ(n) = n^(e+1), no floor involved
            GammaShape::Power(gamma.denom().to_f64().unwrap_or(f64::INFINITY))
        } else {
            GammaShape::Root(1.0 / gamma.to_f64().unwrap_or(0.5) - 1.0)
        };
        LnGamma {
            gamma: gamma.clone(),
            shape,
        }
    }

    pub fn eval(&self, n: u128) -> f64 {
        let ln_n = (n as f64).ln();
        match self.shape {
            GammaShape::Zero => (1.0 + ln_n.floor()) * ln_n,
            GammaShape::One => std::f64::consts::LN_2 + ln_n,
            GammaShape::Power(p) => p * ln_n,
            GammaShape::Root(e) => {
                let x = e * ln_n;
                // once n^e exceeds 2^52 the floor changes the log by < 2^-52
                if x >= 52.0 * std::f64::consts::LN_2 {
                    x + ln_n
                } else {
                    ln_big(
                        &g_gamma(&self.gamma, &BigUint::from(n)).expect("gamma checked by caller"),
                    )
                }
            }
        }
    }
}

/// `l_1 = 0`, `l_j = 2^(j²)` for `j ≥ 2`.
pub fn block_sequence(j: u32) -> BigUint {
    if j <= 1 {
        BigUint::zero()
    } else {
        BigUint::one() << (j * j) as usize
    }
}

/// `l_j ln l_j / (l_{j+1} - l_j)` for `j = 1..=jmax`.
pub fn block_quotients(jmax: u32) -> Vec<(u32, f64)> {
    (1..=jmax)
        .map(|j| {
            let l = block_sequence(j);
            let next = block_sequence(j + 1);
            let num = if l.is_zero() {
                0.0
            } else {
                (j * j) as f64 * std::f64::consts::LN_2 * big_to_f64(&l)
            };
            (j, num / big_to_f64(&(next - &l)))
        })
        .collect()
}

fn big_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// The block `j` with `l_j < k ≤ l_{j+1}`.
pub fn block_index(k: u64) -> u32 {
    assert!(k >= 1, "stages are 1-based");
    let mut j = 1u32;
    // l_{j+1} = 2^((j+1)^2) ≥ 2^64 > k once j ≥ 7
    while j < 7 && u128::from(k) > 1u128 << ((j + 1) * (j + 1)) {
        j += 1;
    }
    j
}

/// `m_1 = 2`, `m_k = k²`.
pub fn family_m(k: u64) -> u64 {
    if k == 1 {
        2
    } else {
        k * k
    }
}

/// `N_k = g_{α/d}(m_k)` on odd blocks and `g_{β/d}(m_k)` on even blocks.
pub fn family_n(t: &TargetDims, k: u64) -> BigUint {
    g_gamma(t.gamma_at(k), &BigUint::from(family_m(k))).expect("TargetDims keeps gamma in [0,1]")
}

pub fn ln_family_n(t: &TargetDims, k: u64) -> f64 {
    ln_g_gamma(t.gamma_at(k), u128::from(family_m(k)))
}

/// `N_1⋯N_k·k + m_k - 1`.
pub fn far_digit(t: &TargetDims, k: u64) -> BigUint {
    let prod = (1..=k).fold(BigUint::one(), |acc, j| acc * family_n(t, j));
    prod * k + (family_m(k) - 1)
}

/// Compactly supported family: `B_k = {0,…,m_k-1}^d`, `R_k = N_k·I`.
pub fn compact_family(t: &TargetDims) -> (SequenceSpec, MoranSpec) {
    let spec = SequenceSpec::family(t.d(), Family::Compact(t.clone()));
    let moran = MoranSpec::from_sequence(spec.clone());
    (spec, moran)
}

/// Non-compact family: `B_k = {0,…,m_k-2, N_1⋯N_k·k+m_k-1}^d`.
pub fn noncompact_family(t: &TargetDims) -> (SequenceSpec, MoranSpec) {
    let spec = SequenceSpec::family(t.d(), Family::Noncompact(t.clone()));
    let moran = MoranSpec::from_sequence(spec.clone());
    (spec, moran)
}

/// Per-stage facts about the far digit of the non-compact family.
#[derive(Clone, Debug)]
pub struct FarDigitCertificate {
    pub k: u64,
    pub far_digit: BigUint,
    /// `N_k | far - (m_k - 1)`, so the far digit sits in the class of `m_k - 1`.
    pub residue_ok: bool,
    /// `(N_1⋯N_k)^{-1}·far`, exact.
    pub scaled_norm: Rat,
    /// `scaled_norm ≥ k`.
    pub diverges_ok: bool,
    /// `ln(m_k - 1)/ln m_k`.
    pub log_correction: f64,
}

pub fn noncompact_certificates(t: &TargetDims, kmax: u64) -> Vec<FarDigitCertificate> {
    let mut prod = BigUint::one();
    (1..=kmax)
        .map(|k| {
            let n_k = family_n(t, k);
            prod *= &n_k;
            let m = family_m(k);
            let far = &prod * k + (m - 1);
            let residue_ok = ((&far - (m - 1)) % &n_k).is_zero();
            let scaled_norm = Rat::new(BigInt::from(far.clone()), BigInt::from(prod.clone()));
            let diverges_ok = scaled_norm >= rat(k as i64);
            FarDigitCertificate {
                k,
                far_digit: far,
                residue_ok,
                scaled_norm,
                diverges_ok,
                log_correction: ((m - 1) as f64).ln() / (m as f64).ln(),
            }
        })
        .collect()
}

/// Exact prefix of the non-closed-sum construction.
///
/// The free choices are fixed by the schedule `a_k = (3/7)·10^(-s_k)` with
/// `s_1 = 2`, `s_{k+1} = 2 s_k + 2`. Every constraint of the construction is
/// re-checked exactly on the way; a violation is reported as
/// `ScheduleFailure` instead of being patched.
#[derive(Clone, Debug)]
pub struct CounterexamplePrefix {
    pub k_max: usize,
    /// `a_1..a_{K+2}` (two look-ahead terms feed the tail brackets).
    pub a: Vec<Rat>,
    /// `r_1..r_{K+2}`.
    pub r: Vec<Rat>,
    /// Brackets `[a_k, a_k + 2a_{k+1}]` around the tails `t_k`, `k ≤ K+1`.
    pub t_bracket: Vec<(Rat, Rat)>,
    /// `⌊1/t_k⌋`, `k ≤ K+1`.
    pub floor_t: Vec<BigInt>,
    /// `b_{k,1..k²}`, `k ≤ K`.
    pub b: Vec<Vec<Rat>>,
    /// `A_k = {0, b_{k,·}, a_k, k/(k+1)}`, sorted, `k ≤ K`.
    pub sets: Vec<Vec<Rat>>,
}

/// `s_k` of the decay schedule.
fn schedule_exponent(k: usize) -> u32 {
    let mut s = 2u32;
    for _ in 1..k {
        s = 2 * s + 2;
    }
    s
}

fn pow10(e: u32) -> BigInt {
    BigInt::from(10).pow(e)
}

pub fn is_unit_fraction(x: &Rat) -> bool {
    x.is_positive() && x.numer().is_one()
}

fn floor_recip(x: &Rat) -> BigInt {
    (Rat::one() / x).floor().to_integer()
}

fn schedule_a(k: usize) -> Rat {
    Rat::new(
        BigInt::from(3),
        BigInt::from(7) * pow10(schedule_exponent(k)),
    )
}

/// `a_{j+1}/a_j = 10^{-(s_j + 2)}`; non-increasing in `j` because `s_j` grows.
fn schedule_ratio(j: usize) -> Rat {
    Rat::new(BigInt::one(), pow10(schedule_exponent(j) + 2))
}

pub fn counterexample_prefix(k_max: usize) -> Result<CounterexamplePrefix> {
    if k_max == 0 {
        return Err(Error::PreconditionViolated("K must be positive".into()));
    }
    let n = k_max + 2;
    let half = ratio(1, 2);
    let a: Vec<Rat> = (1..=n).map(schedule_a).collect();
    let mut r = Vec::with_capacity(n);
    for k in 1..=n {
        let mut rk = Rat::new(BigInt::one(), BigInt::one() << k);
        for j in 1..k {
            let tail: Rat = a[j - 1..k - 1].iter().sum();
            let cand = Rat::new(BigInt::one(), floor_recip(&a[j - 1])) - tail;
            if cand < rk {
                rk = cand;
            }
        }
        if !rk.is_positive() {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "r_k > 0".into(),
            });
        }
        let ak = &a[k - 1];
        if !(ak.is_positive() && *ak < rk) {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "a_k in (0, r_k)".into(),
            });
        }
        if is_unit_fraction(ak) {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "a_k not a unit fraction".into(),
            });
        }
        r.push(rk);
    }

    let mut t_bracket = Vec::with_capacity(k_max + 1);
    let mut floor_t = Vec::with_capacity(k_max + 1);
    for k in 1..=k_max + 1 {
        // Σ_{j>k} a_j ≤ a_{k+1}/(1-ρ) with ρ = a_{k+2}/a_{k+1} bounding all later ratios
        let rho = schedule_ratio(k + 1);
        if rho >= half || schedule_ratio(k + 2) > rho {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "tail below 2a_{k+1}".into(),
            });
        }
        let lo = a[k - 1].clone();
        let hi = &lo + &a[k] * rat(2);
        let f_lo = floor_recip(&lo);
        let f_hi = floor_recip(&hi);
        if f_lo != f_hi {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "floor(1/t_k) pinned by the bracket".into(),
            });
        }
        t_bracket.push((lo, hi));
        floor_t.push(f_lo);
    }

    let mut b = Vec::with_capacity(k_max);
    let mut sets = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let lo = Rat::new(BigInt::one(), &floor_t[k - 1] + BigInt::one());
        let hi = a[k - 1].clone();
        if lo >= hi {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "a_k > 1/(floor(1/t_k)+1)".into(),
            });
        }
        let count = k * k;
        let step = (&hi - &lo) / rat(count as i64 + 1);
        let grid: Vec<Rat> = (0..=count + 1)
            .map(|i| &lo + &step * rat(i as i64))
            .collect();
        let mut bk = Vec::with_capacity(count);
        for i in 1..=count {
            let mut x = grid[i].clone();
            if is_unit_fraction(&x) {
                x = (&grid[i] + &grid[i + 1]) / rat(2);
            }
            if is_unit_fraction(&x) || x <= lo || x >= hi {
                return Err(Error::ScheduleFailure {
                    k,
                    constraint: format!("b_{{k,{i}}} admissible"),
                });
            }
            bk.push(x);
        }
        let mut set = vec![Rat::zero()];
        set.extend(bk.iter().cloned());
        set.push(hi.clone());
        set.push(ratio(k as i64, k as i64 + 1));
        set.sort();
        if set.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ScheduleFailure {
                k,
                constraint: "A_k elements distinct".into(),
            });
        }
        b.push(bk);
        sets.push(set);
    }

    Ok(CounterexamplePrefix {
        k_max,
        a,
        r,
        t_bracket,
        floor_t,
        b,
        sets,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub k: Option<usize>,
    pub name: String,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub checks: Vec<Check>,
    /// `1 ∉ Σ A_k` follows from the verified chain; it is not itself finitely certified.
    pub note: &'static str,
}

impl InequalityReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }
}

/// Re-verifies, exactly, every finitely checkable constraint and inequality
/// of the construction at depth `K`.
pub fn counterexample_inequalities(p: &CounterexamplePrefix) -> InequalityReport {
    let mut checks = Vec::new();
    let mut push = |k: Option<usize>, name: &str, ok: bool| {
        checks.push(Check {
            k,
            name: name.to_string(),
            ok,
        })
    };
    let kk = p.k_max;
    let one = Rat::one();
    let zero = Rat::zero();

    for k in 1..=kk {
        let ak = &p.a[k - 1];
        let rk = &p.r[k - 1];
        push(Some(k), "0 < a_k < r_k", ak.is_positive() && ak < rk);
        push(Some(k), "a_k not a unit fraction", !is_unit_fraction(ak));
        push(
            Some(k),
            "r_k <= 1/2^k",
            *rk <= Rat::new(BigInt::one(), BigInt::one() << k),
        );
        let (lo, hi) = &p.t_bracket[k - 1];
        let f = &p.floor_t[k - 1];
        push(
            Some(k),
            "floor pinned on bracket",
            floor_recip(lo) == *f && floor_recip(hi) == *f,
        );
        push(
            Some(k),
            "a_k > 1/(floor(1/t_k)+1)",
            *ak > Rat::new(BigInt::one(), f + BigInt::one()),
        );
        let lower = Rat::new(BigInt::one(), f + BigInt::one());
        let bk = &p.b[k - 1];
        let mut sorted = bk.clone();
        sorted.sort();
        sorted.dedup();
        push(
            Some(k),
            "b_{k,i} distinct, inside the gap, not unit fractions",
            bk.len() == k * k
                && sorted.len() == bk.len()
                && bk
                    .iter()
                    .all(|x| *x > lower && x < ak && !is_unit_fraction(x)),
        );
        push(
            Some(k),
            "A_k within [0,1]",
            p.sets[k - 1].iter().all(|x| *x >= zero && *x <= one),
        );
        // later r's never exceed the gap 1/floor(1/a_k) - a_k - ... left by a_k
        let gap = Rat::new(BigInt::one(), floor_recip(ak));
        let tail: Rat = p.a[k - 1..].iter().sum();
        push(Some(k), "a_k + ... + a_{K+2} < 1/floor(1/a_k)", tail < gap);
    }

    let sum_a: Rat = p.a[..kk].iter().sum();
    let sum_r: Rat = p.r[..kk].iter().sum();
    push(
        None,
        "sum a_k + 2a_{K+1} < 1",
        &sum_a + &p.a[kk] * rat(2) < one,
    );
    push(
        None,
        "sum a_k < sum r_k <= 1",
        sum_a < sum_r && sum_r <= one,
    );

    for n in 1..=kk {
        let (_, hi) = &p.t_bracket[n];
        push(Some(n), "t_{n+1} < 1/(n+1)", *hi < ratio(1, n as i64 + 1));
        push(
            Some(n),
            "n/(n+1) + 1/2^n <= 1",
            ratio(n as i64, n as i64 + 1) + Rat::new(BigInt::one(), BigInt::one() << n) <= one,
        );
        push(
            Some(n),
            "n/(n+1) + t_{n+1} < 1",
            ratio(n as i64, n as i64 + 1) + hi < one,
        );
    }

    InequalityReport {
        checks,
        note: "1 is a limit point of the sum set; its absence from the sum set follows from the verified chain and is not finitely certified",
    }
}

/// Witness choice for `n/(n+1)`: the `n`-th term picks `n/(n+1)`, every other term picks 0.
pub fn counterexample_witness(p: &CounterexamplePrefix, n: usize) -> Option<Vec<Rat>> {
    if n == 0 || n > p.k_max {
        return None;
    }
    let target = ratio(n as i64, n as i64 + 1);
    let choice: Vec<Rat> = (1..=p.k_max)
        .map(|k| if k == n { target.clone() } else { Rat::zero() })
        .collect();
    let valid = choice
        .iter()
        .zip(&p.sets)
        .all(|(x, set)| set.binary_search(x).is_ok());
    (valid && choice.iter().sum::<Rat>() == target).then_some(choice)
}

pub fn counterexample_csv(p: &CounterexamplePrefix) -> String {
    let mut out = String::from("k,a_num,a_den,r_num,r_den,floor_t\n");
    for k in 1..=p.k_max {
        let a = &p.a[k - 1];
        let r = &p.r[k - 1];
        out.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            a.numer(),
            a.denom(),
            r.numer(),
            r.denom(),
            p.floor_t[k - 1]
        ));
    }
    out
}

/// Exact sum of the `K` terms `A_k` used as a sequence in the other modules.
pub fn counterexample_sets(p: &CounterexamplePrefix) -> Vec<Vec<Rat>> {
    p.sets.clone()
}

pub(crate) fn big_to_rat(n: &BigUint) -> Rat {
    rat_from_big(BigInt::from(n.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(gamma: Rat, n: u64) -> u64 {
        g_gamma(&gamma, &BigUint::from(n))
            .unwrap()
            .to_u64()
            .unwrap()
    }

    #[test]
    fn g_gamma_examples() {
        assert_eq!(g(rat(1), 7), 14);
        assert_eq!(g(ratio(1, 2), 3), 9);
        // ⌊ln 3⌋ = 1
        assert_eq!(g(rat(0), 3), 9);
        // ⌊ln 10⌋ = 2
        assert_eq!(g(rat(0), 10), 1000);
        // ⌊4^(1/ (1/3) - 1)⌋ = 4^2
        assert_eq!(g(ratio(1, 3), 4), 64);
        // ⌊5^(4/3 - 1)⌋ = ⌊5^(1/3)⌋ = 1
        assert_eq!(g(ratio(3, 4), 5), 5);
        assert!(g_gamma(&ratio(3, 2), &BigUint::from(2u32)).is_err());
    }

    #[test]
    fn g_gamma_dominates_n() {
        for gamma in [rat(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), rat(1)] {
            for n in 2..200u64 {
                let v = g(gamma.clone(), n);
                assert!(v >= n && v.is_multiple_of(n), "gamma={gamma} n={n}");
            }
        }
    }

    #[test]
    fn ln_g_gamma_agrees_with_exact() {
        for gamma in [rat(0), ratio(1, 4), ratio(1, 2), ratio(2, 3), rat(1)] {
            for n in [2u128, 9, 100, 10_000, 1_000_000] {
                let exact = ln_big(&g_gamma(&gamma, &BigUint::from(n)).unwrap());
                let fast = ln_g_gamma(&gamma, n);
                assert!((exact - fast).abs() < 1e-9 * exact.max(1.0), "{gamma} {n}");
            }
        }
    }

    #[test]
    fn block_sequence_examples() {
        assert_eq!(block_sequence(1), BigUint::zero());
        assert_eq!(block_sequence(2), BigUint::from(16u32));
        assert_eq!(block_sequence(4), BigUint::from(65536u32));
        let q = block_quotients(12);
        assert!(q[3].1 < q[2].1);
        for w in q[1..].windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        assert!(q[11].1 < 3e-6);
    }

    #[test]
    fn block_index_boundaries() {
        assert_eq!(block_index(1), 1);
        assert_eq!(block_index(16), 1);
        assert_eq!(block_index(17), 2);
        assert_eq!(block_index(512), 2);
        assert_eq!(block_index(513), 3);
        assert_eq!(block_index(65536), 3);
        assert_eq!(block_index(65537), 4);
        assert_eq!(block_index(u64::MAX), 7);
    }

    #[test]
    fn target_dims_validation() {
        assert!(TargetDims::new(1, ratio(1, 2), rat(1)).is_ok());
        assert!(TargetDims::new(1, rat(1), ratio(1, 2)).is_err());
        assert!(TargetDims::new(2, rat(0), rat(3)).is_err());
        assert!(TargetDims::new(0, rat(0), rat(0)).is_err());
    }

    #[test]
    fn noncompact_far_digit_instance() {
        let t = TargetDims::new(1, ratio(1, 2), rat(1)).unwrap();
        // block 1 uses γ = 1/2, so N_k = m_k²
        let n1 = family_n(&t, 1);
        let n2 = family_n(&t, 2);
        assert_eq!(n1, BigUint::from(4u32));
        assert_eq!(n2, BigUint::from(16u32));
        assert_eq!(far_digit(&t, 2), &n1 * &n2 * 2u32 + 3u32);
        for c in noncompact_certificates(&t, 30) {
            assert!(c.residue_ok && c.diverges_ok, "k={}", c.k);
        }
    }

    #[test]
    fn counterexample_first_stage() {
        let p = counterexample_prefix(1).unwrap();
        assert_eq!(p.r[0], ratio(1, 2));
        assert_eq!(p.a[0], ratio(3, 700));
        assert!(!is_unit_fraction(&p.a[0]));
        assert_eq!(p.floor_t[0], BigInt::from(233));
        let (_, hi) = &p.t_bracket[0];
        assert_eq!(floor_recip(hi), BigInt::from(233));
        assert_eq!(p.sets[0].len(), 1 + 1 + 1 + 1);
    }

    #[test]
    fn counterexample_depth_eight_passes() {
        let p = counterexample_prefix(8).unwrap();
        let rep = counterexample_inequalities(&p);
        assert!(rep.all_ok(), "{:?}", rep.failures());
        for n in 1..=8 {
            assert!(counterexample_witness(&p, n).is_some());
        }
        // n = 1: 1/2 + t_2 < 1
        assert!(ratio(1, 2) + &p.t_bracket[1].1 < Rat::one());
    }

    #[test]
    fn counterexample_perturbation_is_caught() {
        let mut p = counterexample_prefix(3).unwrap();
        p.a[1] = &p.r[1] * rat(2);
        let rep = counterexample_inequalities(&p);
        assert!(rep
            .failures()
            .iter()
            .any(|c| c.k == Some(2) && c.name == "0 < a_k < r_k"));
    }

    #[test]
    fn counterexample_csv_header() {
        let p = counterexample_prefix(2).unwrap();
        let csv = counterexample_csv(&p);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,a_num,a_den,r_num,r_den,floor_t"));
        assert_eq!(lines.next(), Some("1,3,700,1,2,233"));
    }
}
