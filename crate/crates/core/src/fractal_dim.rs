//! Truncated infinite sums of finite sets, the Moran structure of
//! `Σ C_1^{-1}⋯C_k^{-1} G_k`, its dimension ratios with a box-counting
//! cross-check, and the closedness conditions for infinite sums.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::constructions::{block_index, family_m, ln_family_n, LnGamma};
use crate::digits::DigitSet;
use crate::error::{Error, Result};
use crate::exact_linalg::{rat, ratio, MatD, Rat, VecD};
use crate::measure_lab::{product_cardinality, scaled_digit_sets};
use crate::sequence::{Family, SequenceKind, SequenceSpec, Stage};

/// One level of a Moran sum: `B_k = G_k ∪ Far_k` scaled by `C_k`.
#[derive(Clone, Debug)]
pub struct MoranStage {
    pub c: Rat,
    pub big_c: Rat,
    /// `B_k ∩ [0,c_k]^d`.
    pub g: DigitSet,
    /// `B_k \ [0,c_k]^d`.
    pub far: Vec<VecD>,
}

impl MoranStage {
    pub fn new(c: Rat, big_c: Rat, g: DigitSet, far: Vec<VecD>) -> Result<Self> {
        if c < Rat::one() {
            return Err(Error::PreconditionViolated("c_k must be at least 1".into()));
        }
        if big_c < &c + Rat::one() {
            return Err(Error::PreconditionViolated(
                "C_k must be at least c_k + 1".into(),
            ));
        }
        if !g.is_integer() {
            return Err(Error::PreconditionViolated(
                "G_k must consist of integer points".into(),
            ));
        }
        if g.count_in_box(&Rat::zero(), &c) != g.len() {
            return Err(Error::PreconditionViolated(
                "G_k must lie in [0,c_k]^d".into(),
            ));
        }
        let zero = Rat::zero();
        if far
            .iter()
            .any(|x| x.coords().iter().all(|v| *v >= zero && *v <= c))
        {
            return Err(Error::PreconditionViolated(
                "far digits must leave [0,c_k]^d".into(),
            ));
        }
        Ok(MoranStage { c, big_c, g, far })
    }

    /// Splits `B` at the box `[0,c]^d`.
    pub fn from_digits(c: Rat, big_c: Rat, b: &DigitSet, cap: u128) -> Result<Self> {
        let g = b
            .restrict_to_box(&Rat::zero(), &c)
            .ok_or_else(|| Error::PreconditionViolated("B_k ∩ [0,c_k]^d is empty".into()))?;
        let far = b.outside_box(&c, cap)?;
        MoranStage::new(c, big_c, g, far)
    }

    /// `G_k ∪ Far_k`.
    pub fn digits(&self) -> Result<DigitSet> {
        if self.far.is_empty() {
            return Ok(self.g.clone());
        }
        let mut all: Vec<VecD> = self.g.iter().collect();
        all.extend(self.far.iter().cloned());
        DigitSet::new(all)
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum MoranSource {
    Explicit(Vec<MoranStage>),
    Sequence(SequenceSpec),
}

/// Moran data `(c_k, C_k, G_k, Far_k)`.
///
/// From a sequence, `C_k` is the scalar of `R_k`; `c_k = m_k - 1` for the
/// named families and `c_k = C_k - 1` for explicit prefixes.
#[derive(Clone, Debug)]
pub struct MoranSpec {
    d: usize,
    source: MoranSource,
}

impl MoranSpec {
    pub fn explicit(d: usize, stages: Vec<MoranStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::PreconditionViolated(
                "Moran spec has no stages".into(),
            ));
        }
        if let Some(s) = stages.iter().find(|s| s.g.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.g.dim(),
            });
        }
        Ok(MoranSpec {
            d,
            source: MoranSource::Explicit(stages),
        })
    }

    pub fn from_sequence(spec: SequenceSpec) -> Self {
        MoranSpec {
            d: spec.d(),
            source: MoranSource::Sequence(spec),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn source(&self) -> &MoranSource {
        &self.source
    }

    pub fn prefix_len(&self) -> Option<usize> {
        match &self.source {
            MoranSource::Explicit(s) => Some(s.len()),
            MoranSource::Sequence(s) => s.prefix_len(),
        }
    }

    pub fn stage(&self, k: usize) -> Result<MoranStage> {
        if k == 0 {
            return Err(Error::StageUnavailable(0));
        }
        match &self.source {
            MoranSource::Explicit(s) => s.get(k - 1).cloned().ok_or(Error::StageUnavailable(k)),
            MoranSource::Sequence(spec) => moran_from_stage(spec, &spec.stage(k)?),
        }
    }

    pub fn stages(&self, n: usize) -> Result<Vec<MoranStage>> {
        match &self.source {
            MoranSource::Explicit(s) => {
                if n > s.len() {
                    return Err(Error::StageUnavailable(n));
                }
                Ok(s[..n].to_vec())
            }
            MoranSource::Sequence(spec) => spec
                .stages(n)?
                .iter()
                .map(|st| moran_from_stage(spec, st))
                .collect(),
        }
    }

    /// `(ln #G_k, ln C_k)` without building the stage for the named families.
    pub fn log_stage(&self, k: usize) -> Result<(f64, f64)> {
        if let MoranSource::Sequence(spec) = &self.source {
            let d = self.d as f64;
            let kk = k as u64;
            match spec.as_family() {
                Some(Family::Quarter) => return Ok((d * 2f64.ln(), 4f64.ln())),
                Some(Family::Compact(t)) if k >= 1 => {
                    return Ok((d * (family_m(kk) as f64).ln(), ln_family_n(t, kk)))
                }
                Some(Family::Noncompact(t)) if k >= 1 => {
                    return Ok((d * ((family_m(kk) - 1) as f64).ln(), ln_family_n(t, kk)))
                }
                _ => {}
            }
        }
        let s = self.stage(k)?;
        Ok((ln_u128(s.g.len()), ln_rat(&s.big_c)))
    }
}

fn ln_u128(n: u128) -> f64 {
    (n as f64).ln()
}

fn moran_from_stage(spec: &SequenceSpec, stage: &Stage) -> Result<MoranStage> {
    let big_c = stage
        .r
        .as_scalar()
        .filter(|c| c.is_integer() && c.is_positive())
        .ok_or_else(|| {
            Error::PreconditionViolated("Moran view needs R_k = C_k·I with integer C_k".into())
        })?;
    let c = match (&spec.kind(), stage.m) {
        (SequenceKind::Family(_), Some(m)) => rat(m as i64 - 1),
        _ => &big_c - Rat::one(),
    };
    let zero = Rat::zero();
    let g = stage
        .digits
        .restrict_to_box(&zero, &c)
        .ok_or_else(|| Error::PreconditionViolated("B_k ∩ [0,c_k]^d is empty".into()))?;
    let far = stage.digits.outside_box(&c, crate::DEFAULT_CAP)?;
    MoranStage::new(c, big_c, g, far)
}

/// All sums `Σ_k x_k` with `x_k` drawn from `sets[k]`, duplicates merged.
pub fn sumset(sets: &[Vec<VecD>], d: usize, cap: u128) -> Result<BTreeSet<VecD>> {
    let mut total: u128 = 1;
    for s in sets {
        total = total.saturating_mul(s.len() as u128);
        if total > cap {
            return Err(Error::CapExceeded { needed: total, cap });
        }
    }
    let mut acc = BTreeSet::from([VecD::zeros(d)]);
    for s in sets {
        let mut next = BTreeSet::new();
        for a in &acc {
            for x in s {
                next.insert(a.add(x));
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// `Σ_{k≤K} (R_1⋯R_k)^{-1} B_k`.
pub fn truncated_sumset(spec: &SequenceSpec, k_max: usize, cap: u128) -> Result<BTreeSet<VecD>> {
    let stages = spec.stages(k_max)?;
    product_cardinality(&stages, cap)?;
    sumset(&scaled_digit_sets(&stages, cap)?, spec.d(), cap)
}

/// `Σ_{k≤K} C_1^{-1}⋯C_k^{-1} (G_k ∪ Far_k)`.
pub fn moran_truncated_sumset(spec: &MoranSpec, k_max: usize, cap: u128) -> Result<BTreeSet<VecD>> {
    let mut scale = Rat::one();
    let mut sets = Vec::with_capacity(k_max);
    for s in spec.stages(k_max)? {
        scale /= &s.big_c;
        let digits = s.digits()?;
        sets.push(
            digits
                .to_vec_capped(cap)?
                .iter()
                .map(|x| x.scale(&scale))
                .collect(),
        );
    }
    sumset(&sets, spec.d(), cap)
}

/// Whether `x` is a sum `Σ_k x_k` with `x_k ∈ sets[k]`, for one-dimensional
/// nonnegative sets.
///
/// Depth-first over the sets in order of decreasing maximum. Only elements
/// `≤ rest` can still be used, so the reachable maximum of the remaining sets
/// is recomputed against the current remainder, which narrows each level to
/// `[rest - reach, rest]`.
pub fn sumset_contains_1d(sets: &[Vec<Rat>], target: &Rat) -> bool {
    let mut sorted: Vec<Vec<Rat>> = sets.to_vec();
    for s in &mut sorted {
        s.sort();
        s.dedup();
    }
    if sorted.iter().any(Vec::is_empty) || sorted.iter().flatten().any(Signed::is_negative) {
        return false;
    }
    sorted.sort_by(|a, b| b.last().cmp(&a.last()));
    let mut tail_min = vec![Rat::zero(); sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        tail_min[i] = &tail_min[i + 1] + &sorted[i][0];
    }
    // largest element of `s` not above `r`
    fn max_le<'a>(s: &'a [Rat], r: &Rat) -> Option<&'a Rat> {
        let n = s.partition_point(|x| x <= r);
        n.checked_sub(1).map(|i| &s[i])
    }
    fn go(i: usize, rest: &Rat, sets: &[Vec<Rat>], lo: &[Rat]) -> bool {
        if i == sets.len() {
            return rest.is_zero();
        }
        if *rest < lo[i] {
            return false;
        }
        let mut reach = Rat::zero();
        for s in &sets[i + 1..] {
            match max_le(s, rest) {
                Some(x) => reach += x,
                None => return false,
            }
        }
        let Some(top) = max_le(&sets[i], rest) else {
            return false;
        };
        if *rest > top + &reach {
            return false;
        }
        let floor = rest - &reach;
        let end = sets[i].partition_point(|x| x <= rest);
        let start = sets[i].partition_point(|x| *x < floor);
        sets[i][start..end]
            .iter()
            .rev()
            .any(|x| go(i + 1, &(rest - x), sets, lo))
    }
    go(0, target, &sorted, &tail_min)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimRow {
    pub k: usize,
    pub log_num: f64,
    pub log_den: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DimensionReport {
    pub rows: Vec<DimRow>,
    pub window: usize,
    /// Minimum of the ratio over the last `window` levels.
    pub window_liminf: f64,
    /// Maximum of the ratio over the last `window` levels.
    pub window_limsup: f64,
    /// Box count against `Π #G_k` at the deepest level within the cap.
    pub box_count_agreement: Option<bool>,
}

impl DimensionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,log_num,log_den,ratio\n");
        for r in &self.rows {
            out.push_str(&dim_row_csv(r));
        }
        out
    }
}

pub fn dim_row_csv(r: &DimRow) -> String {
    format!(
        "{},{:.15e},{:.15e},{:.15e}\n",
        r.k, r.log_num, r.log_den, r.ratio
    )
}

/// Streams `r_k = ln Π#G_j / ln ΠC_j` for `k ≤ K` to `sink` and keeps only
/// the trailing window. Rows are not stored.
pub fn dim_scan(
    spec: &MoranSpec,
    k_max: usize,
    window: usize,
    mut sink: impl FnMut(&DimRow),
) -> Result<DimensionReport> {
    if window == 0 {
        return Err(Error::PreconditionViolated(
            "window must be positive".into(),
        ));
    }
    let family = match &spec.source {
        MoranSource::Sequence(s) => match s.as_family() {
            Some(Family::Compact(t)) => Some((t, 0)),
            Some(Family::Noncompact(t)) => Some((t, 1)),
            _ => None,
        },
        _ => None,
    };
    let fast = family.map(|(t, drop)| {
        let lg = [
            LnGamma::new(&(t.alpha() / rat(t.d() as i64))),
            LnGamma::new(&(t.beta() / rat(t.d() as i64))),
        ];
        (lg, drop, t.d() as f64)
    });
    let mut trail = std::collections::VecDeque::with_capacity(window);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for k in 1..=k_max {
        let (ln_g, ln_c) = match &fast {
            Some((lg, drop, d)) => {
                let kk = k as u64;
                let m = family_m(kk);
                let odd_even = block_index(kk).is_multiple_of(2) as usize;
                (
                    d * ((m - drop) as f64).ln(),
                    lg[odd_even].eval(u128::from(m)),
                )
            }
            None => spec.log_stage(k)?,
        };
        num += ln_g;
        den += ln_c;
        let row = DimRow {
            k,
            log_num: num,
            log_den: den,
            ratio: if den > 0.0 { num / den } else { 0.0 },
        };
        sink(&row);
        if trail.len() == window {
            trail.pop_front();
        }
        trail.push_back(row.ratio);
    }
    let window_liminf = trail.iter().cloned().fold(f64::INFINITY, f64::min);
    let window_limsup = trail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(DimensionReport {
        rows: Vec::new(),
        window,
        window_liminf,
        window_limsup,
        box_count_agreement: box_agreement(spec, k_max),
    })
}

/// Like [`dim_scan`] with every row kept.
pub fn dim_formula(spec: &MoranSpec, k_max: usize, window: usize) -> Result<DimensionReport> {
    let mut rows = Vec::with_capacity(k_max);
    let mut rep = dim_scan(spec, k_max, window, |r| rows.push(r.clone()))?;
    rep.rows = rows;
    Ok(rep)
}

const BOX_AGREEMENT_CAP: u128 = 100_000;
const BOX_AGREEMENT_DEPTH: usize = 8;

fn box_agreement(spec: &MoranSpec, k_max: usize) -> Option<bool> {
    let mut total: u128 = 1;
    let mut depth = 0;
    for k in 1..=k_max.min(BOX_AGREEMENT_DEPTH) {
        let len = spec.stage(k).ok()?.g.len();
        total = total.saturating_mul(len);
        if total > BOX_AGREEMENT_CAP {
            break;
        }
        depth = k;
    }
    if depth == 0 {
        return None;
    }
    let b = box_count_oracle(spec, depth, BOX_AGREEMENT_CAP).ok()?;
    Some(b.agrees())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxCount {
    pub formula_count: BigUint,
    pub enumerated_count: BigUint,
    /// Sibling cells at level `k` have pairwise disjoint interiors.
    pub siblings_disjoint: bool,
    /// Children cells sit inside their parent.
    pub nested: bool,
}

impl BoxCount {
    pub fn agrees(&self) -> bool {
        self.formula_count == self.enumerated_count && self.siblings_disjoint && self.nested
    }
}

/// Counts the level-`k` cells `J_w = Σ_{j≤k} (C_1⋯C_j)^{-1} g_j + (C_1⋯C_k)^{-1}[0,1]^d`
/// by enumerating words `w ∈ G_1×⋯×G_k` and their exact corners.
///
/// Every parent's children are the same translate of `(C_1⋯C_k)^{-1}G_k`, so
/// disjointness and nesting are checked on one parent, over all sibling pairs.
pub fn box_count_oracle(spec: &MoranSpec, k: usize, cap: u128) -> Result<BoxCount> {
    let stages = spec.stages(k)?;
    let mut formula = BigUint::one();
    let mut total: u128 = 1;
    for s in &stages {
        formula *= BigUint::from(s.g.len());
        total = total.saturating_mul(s.g.len());
        if total > cap {
            return Err(Error::CapExceeded { needed: total, cap });
        }
    }
    let d = spec.d();
    let mut scale = Rat::one();
    let mut corners = BTreeSet::from([VecD::zeros(d)]);
    let mut siblings_disjoint = true;
    let mut nested = true;
    for s in &stages {
        let parent_side = scale.clone();
        scale /= &s.big_c;
        let offsets: Vec<VecD> = s.g.iter().map(|g| g.scale(&scale)).collect();
        for (i, a) in offsets.iter().enumerate() {
            for b in &offsets[i + 1..] {
                if a.sub(b).max_norm() < scale {
                    siblings_disjoint = false;
                }
            }
            let top = a
                .coords()
                .iter()
                .map(|x| x + &scale)
                .max()
                .unwrap_or_else(Rat::zero);
            if top > parent_side || !a.is_nonnegative() {
                nested = false;
            }
        }
        let mut next = BTreeSet::new();
        for c in &corners {
            for o in &offsets {
                next.insert(c.add(o));
            }
        }
        corners = next;
    }
    Ok(BoxCount {
        formula_count: formula,
        enumerated_count: BigUint::from(corners.len()),
        siblings_disjoint,
        nested,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullReport {
    /// `Σ_{k≤K} ln(#G_k / C_k^d)`.
    pub log_product: f64,
    pub partial_product: f64,
    /// Average decrease of the log-product per level over the second half.
    pub trend_slope: f64,
    pub strictly_decreasing: bool,
}

/// `Π_{k≤K} #G_k / C_k^d` in log space.
pub fn lebesgue_null_partial(spec: &MoranSpec, k_max: usize) -> Result<NullReport> {
    let d = spec.d() as f64;
    let mut logs = Vec::with_capacity(k_max + 1);
    logs.push(0.0);
    let mut strictly_decreasing = true;
    for k in 1..=k_max {
        let (ln_g, ln_c) = spec.log_stage(k)?;
        let step = ln_g - d * ln_c;
        if step >= 0.0 {
            strictly_decreasing = false;
        }
        logs.push(logs[k - 1] + step);
    }
    let half = k_max / 2;
    let log_product = logs[k_max];
    let trend_slope = if k_max > half {
        (log_product - logs[half]) / (k_max - half) as f64
    } else {
        0.0
    };
    Ok(NullReport {
        log_product,
        partial_product: log_product.exp(),
        trend_slope,
        strictly_decreasing,
    })
}

fn union(a: &[VecD], b: &[VecD]) -> Vec<VecD> {
    let set: BTreeSet<VecD> = a.iter().chain(b).cloned().collect();
    set.into_iter().collect()
}

/// Finite-depth form of
/// `Σ_k (A_k ∪ A'_k) = ∪_p (Σ_{k≤p} (A_k ∪ A'_k) + Σ_{k>p} A_k)`, checked as
/// exact sets with the union over `1 ≤ p ≤ K`.
pub fn reduction_identity_check(
    a: &[Vec<VecD>],
    a_prime: &[Vec<VecD>],
    k_max: usize,
    cap: u128,
) -> Result<bool> {
    if a.len() < k_max || a_prime.len() < k_max {
        return Err(Error::StageUnavailable(k_max));
    }
    let d = a
        .iter()
        .chain(a_prime)
        .flat_map(|s| s.first())
        .map(VecD::dim)
        .next()
        .ok_or(Error::EmptySet)?;
    let unions: Vec<Vec<VecD>> = (0..k_max).map(|k| union(&a[k], &a_prime[k])).collect();
    let lhs = sumset(&unions, d, cap)?;
    let mut rhs = BTreeSet::new();
    for p in 1..=k_max {
        let mut sets = unions[..p].to_vec();
        sets.extend(a[p..k_max].iter().cloned());
        rhs.extend(sumset(&sets, d, cap)?);
    }
    Ok(lhs == rhs)
}

/// A sequence of pairs `(A_k, A'_k)` together with what is declared about
/// the limit of `min_{a∈A'_k} ||a||`.
#[derive(Clone, Debug)]
pub struct PairSequence {
    pub name: String,
    pub d: usize,
    pub a: Vec<Vec<VecD>>,
    pub a_prime: Vec<Vec<VecD>>,
    pub divergence_declared: bool,
    /// `Σ max ||a||` is bounded by 1 through the Moran structure.
    pub moran_cap: bool,
}

fn one_d(xs: impl IntoIterator<Item = Rat>) -> Vec<VecD> {
    xs.into_iter().map(|x| VecD(vec![x])).collect()
}

/// The three standard failures of the closedness conditions, numbered 1-3:
/// `A_k={0,k/(k+1)}, A'_k={k+1}`; `A_k={0}, A'_k={(-1)^k(k+2^{-k})}`;
/// `A_k={0}, A'_k={k/(k+1)}`.
pub fn standard_counterexample(which: u8, k_max: usize) -> Result<PairSequence> {
    let ks = 1..=k_max as i64;
    let (name, a, a_prime, divergence_declared) = match which {
        1 => (
            "summable maxima omitted",
            ks.clone()
                .map(|k| one_d([Rat::zero(), ratio(k, k + 1)]))
                .collect(),
            ks.map(|k| one_d([rat(k + 1)])).collect(),
            true,
        ),
        2 => (
            "sign condition omitted",
            ks.clone().map(|_| one_d([Rat::zero()])).collect(),
            ks.map(|k| {
                let v = rat(k) + Rat::new(BigInt::one(), BigInt::one() << k as usize);
                one_d([if k % 2 == 0 { v } else { -v }])
            })
            .collect(),
            true,
        ),
        3 => (
            "divergence weakened",
            ks.clone().map(|_| one_d([Rat::zero()])).collect(),
            ks.map(|k| one_d([ratio(k, k + 1)])).collect(),
            false,
        ),
        _ => {
            return Err(Error::PreconditionViolated(format!(
                "no standard counterexample numbered {which}"
            )))
        }
    };
    Ok(PairSequence {
        name: name.to_string(),
        d: 1,
        a,
        a_prime,
        divergence_declared,
        moran_cap: false,
    })
}

/// `A_k = C_1^{-1}⋯C_k^{-1} G_k`, `A'_k = C_1^{-1}⋯C_k^{-1} Far_k`.
pub fn moran_pairs(
    spec: &MoranSpec,
    k_max: usize,
    cap: u128,
    divergence_declared: bool,
) -> Result<PairSequence> {
    let mut scale = Rat::one();
    let mut a = Vec::with_capacity(k_max);
    let mut a_prime = Vec::with_capacity(k_max);
    for s in spec.stages(k_max)? {
        scale /= &s.big_c;
        a.push(
            s.g.to_vec_capped(cap)?
                .iter()
                .map(|x| x.scale(&scale))
                .collect(),
        );
        a_prime.push(s.far.iter().map(|x| x.scale(&scale)).collect());
    }
    Ok(PairSequence {
        name: "moran".into(),
        d: spec.d(),
        a,
        a_prime,
        divergence_declared,
        moran_cap: true,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosednessRow {
    pub k: usize,
    pub sign_ok: bool,
    /// `Σ_{j≤k} max_{a∈A_j} ||a||`, exact.
    pub max_norm_partial: Rat,
    pub min_norm_far: Option<Rat>,
}

#[derive(Clone, Debug)]
pub struct ClosednessReport {
    pub name: String,
    pub rows: Vec<ClosednessRow>,
    pub first_sign_failure: Option<usize>,
    /// `Σ max ||a|| ≤ 1` from the Moran structure, when it applies.
    pub sum_cap: Option<Rat>,
    /// The terms `max ||a||` have at least halved between `K/2` and `K`.
    pub terms_decay: bool,
    /// Minimum far norms are nondecreasing and the last one exceeds `K/2`.
    pub far_norms_grow_for_k_le_k_max: bool,
    pub divergence_declared: bool,
}

impl ClosednessReport {
    pub fn conditions_hold_up_to_k(&self) -> bool {
        self.first_sign_failure.is_none()
            && self.terms_decay
            && self.far_norms_grow_for_k_le_k_max
            && self.divergence_declared
    }
}

/// Per-level checks of the closedness conditions with max-norms.
pub fn closedness_conditions(p: &PairSequence) -> ClosednessReport {
    let mut rows = Vec::with_capacity(p.a.len());
    let mut partial = Rat::zero();
    let mut terms = Vec::with_capacity(p.a.len());
    for (i, (a, ap)) in p.a.iter().zip(&p.a_prime).enumerate() {
        let term = a.iter().map(VecD::max_norm).max().unwrap_or_else(Rat::zero);
        partial += &term;
        terms.push(term);
        rows.push(ClosednessRow {
            k: i + 1,
            sign_ok: ap.iter().all(VecD::is_nonnegative),
            max_norm_partial: partial.clone(),
            min_norm_far: ap.iter().map(VecD::max_norm).min(),
        });
    }
    let k_max = rows.len();
    let terms_decay = k_max >= 2 && {
        let half = &terms[k_max / 2 - 1];
        terms[k_max - 1] <= half / rat(2)
    };
    let far: Vec<&Rat> = rows
        .iter()
        .filter_map(|r| r.min_norm_far.as_ref())
        .collect();
    let far_norms_grow = !far.is_empty()
        && far.windows(2).all(|w| w[0] <= w[1])
        && **far.last().unwrap() > ratio(k_max as i64, 2);
    ClosednessReport {
        name: p.name.clone(),
        first_sign_failure: rows.iter().find(|r| !r.sign_ok).map(|r| r.k),
        rows,
        sum_cap: p.moran_cap.then(Rat::one),
        terms_decay,
        far_norms_grow_for_k_le_k_max: far_norms_grow,
        divergence_declared: p.divergence_declared,
    }
}

/// Exact partial sums `Σ_{j≤k} max_{a∈A_j} ||a||` for `A_j = (R_1⋯R_j)^{-1}B_j`.
pub fn compactness_partial(spec: &SequenceSpec, k_max: usize, cap: u128) -> Result<Vec<Rat>> {
    let stages = spec.stages(k_max)?;
    let mut inv = MatD::identity(spec.d());
    let mut partial = Rat::zero();
    let mut out = Vec::with_capacity(k_max);
    for s in &stages {
        inv = s.r.invert()?.mul(&inv);
        let term = match inv.as_scalar() {
            Some(c) => s.digits.max_norm() * c.abs(),
            None => s
                .digits
                .to_vec_capped(cap)?
                .iter()
                .map(|b| inv.mul_vec(b).max_norm())
                .max()
                .unwrap_or_else(Rat::zero),
        };
        partial += term;
        out.push(partial.clone());
    }
    Ok(out)
}

/// `ln` of a rational that may not fit in a float.
pub fn ln_rat(x: &Rat) -> f64 {
    let ln = |n: &BigInt| {
        let n = n.magnitude();
        match n.to_f64() {
            Some(v) if v.is_finite() => v.ln(),
            _ => {
                let shift = n.bits() - 64;
                (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    };
    ln(x.numer()) - ln(x.denom())
}
