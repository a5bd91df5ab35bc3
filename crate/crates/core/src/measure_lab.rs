//! Finitely supported measures with exact atoms, their convolutions and
//! Fourier transforms, the summability criterion for infinite convolutions,
//! and a seeded sampler for truncated random series.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digits::DigitSet;
use crate::error::{Error, Result};
use crate::exact_linalg::{fmt_rat, rat_to_f64, Rat, VecD};
use crate::hadamard::hypotheses_check;
use crate::sequence::{prefix_products, SequenceSpec, Stage};

const TAU: f64 = std::f64::consts::TAU;

/// Probability measure with finitely many atoms, exact coordinates and weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: BTreeMap<VecD, Rat>,
}

impl AtomicMeasure {
    pub fn dirac(point: VecD) -> Self {
        let dim = point.dim();
        AtomicMeasure {
            dim,
            atoms: BTreeMap::from([(point, Rat::one())]),
        }
    }

    /// Builds a measure from weighted points, merging repeated points.
    pub fn from_weighted(
        dim: usize,
        points: impl IntoIterator<Item = (VecD, Rat)>,
    ) -> Result<Self> {
        let mut atoms: BTreeMap<VecD, Rat> = BTreeMap::new();
        for (p, w) in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if w <= Rat::zero() {
                return Err(Error::PreconditionViolated(
                    "weights must be positive".into(),
                ));
            }
            *atoms.entry(p).or_insert_with(Rat::zero) += w;
        }
        if atoms.is_empty() {
            return Err(Error::EmptySet);
        }
        let total: Rat = atoms.values().sum();
        if !total.is_one() {
            return Err(Error::PreconditionViolated(format!(
                "weights sum to {}",
                fmt_rat(&total)
            )));
        }
        Ok(AtomicMeasure { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &BTreeMap<VecD, Rat> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &VecD> {
        self.atoms.keys()
    }

    pub fn convolve(&self, other: &AtomicMeasure) -> Result<AtomicMeasure> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut atoms: BTreeMap<VecD, Rat> = BTreeMap::new();
        for (x, wx) in &self.atoms {
            for (y, wy) in &other.atoms {
                *atoms.entry(x.add(y)).or_insert_with(Rat::zero) += wx * wy;
            }
        }
        Ok(AtomicMeasure {
            dim: self.dim,
            atoms,
        })
    }

    /// `μ̂(ξ) = Σ w·e^{-2πi<ξ,x>}`, evaluated in floating point.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|(x, w)| {
                let phase: f64 = x.to_f64().iter().zip(xi).map(|(a, b)| a * b).sum();
                Complex64::from_polar(rat_to_f64(w), -TAU * phase)
            })
            .sum()
    }

    /// CSV `coord_1,…,coord_d,weight_num,weight_den`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let head: Vec<String> = (1..=self.dim).map(|i| format!("coord_{i}")).collect();
        out.push_str(&head.join(","));
        out.push_str(",weight_num,weight_den\n");
        for (x, w) in &self.atoms {
            let coords: Vec<String> = x.coords().iter().map(fmt_rat).collect();
            out.push_str(&format!(
                "{},{},{}\n",
                coords.join(","),
                w.numer(),
                w.denom()
            ));
        }
        out
    }
}

/// `δ_A`: weight `1/#A` on each element.
pub fn dirac_uniform(a: &DigitSet) -> Result<AtomicMeasure> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let w = Rat::new(BigInt::one(), BigInt::from(a.len()));
    Ok(AtomicMeasure {
        dim: a.dim(),
        atoms: a.iter().map(|p| (p, w.clone())).collect(),
    })
}

/// `Π #B_k` for the first `n` stages, refusing beyond `cap`.
pub fn product_cardinality(stages: &[Stage], cap: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for s in stages {
        total = total.saturating_mul(s.digits.len());
        if total > cap {
            return Err(Error::CapExceeded { needed: total, cap });
        }
    }
    Ok(total)
}

/// The scaled digit sets `A_k = (R_1⋯R_k)^{-1}B_k` for `k ≤ n`.
pub fn scaled_digit_sets(stages: &[Stage], cap: u128) -> Result<Vec<Vec<VecD>>> {
    let products = prefix_products(stages)?;
    stages
        .iter()
        .zip(&products)
        .map(|(s, (_, inv))| {
            Ok(s.digits
                .to_vec_capped(cap)?
                .iter()
                .map(|b| inv.mul_vec(b))
                .collect())
        })
        .collect()
}

/// `μ_n = δ_{A_1} * ⋯ * δ_{A_n}`, exact.
pub fn finite_convolution(spec: &SequenceSpec, n: usize, cap: u128) -> Result<AtomicMeasure> {
    let stages = spec.stages(n)?;
    product_cardinality(&stages, cap)?;
    let mut mu = AtomicMeasure::dirac(VecD::zeros(spec.d()));
    for a in scaled_digit_sets(&stages, cap)? {
        let w = Rat::new(BigInt::one(), BigInt::from(a.len()));
        let step = AtomicMeasure {
            dim: spec.d(),
            atoms: a.into_iter().map(|p| (p, w.clone())).collect(),
        };
        mu = mu.convolve(&step)?;
    }
    Ok(mu)
}

/// `δ̂_B(ξ)`; Cartesian powers factor into a product over coordinates.
pub fn digit_fourier(b: &DigitSet, xi: &[f64]) -> Complex64 {
    if let Some(axis) = b.axis() {
        let n = axis.len() as f64;
        let axis_f: Vec<f64> = axis.iter().map(rat_to_f64).collect();
        return xi
            .iter()
            .map(|&t| {
                axis_f
                    .iter()
                    .map(|a| Complex64::from_polar(1.0, -TAU * a * t))
                    .sum::<Complex64>()
                    / n
            })
            .product();
    }
    let n = b.len() as f64;
    b.iter()
        .map(|p| {
            let phase: f64 = p.to_f64().iter().zip(xi).map(|(a, t)| a * t).sum();
            Complex64::from_polar(1.0, -TAU * phase)
        })
        .sum::<Complex64>()
        / n
}

/// Whether the weak limit is backed by the spectrality hypotheses or only by
/// the summability criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExistenceLabel {
    HypothesesHoldUpToK,
    SupportedByCriterion,
}

#[derive(Clone, Debug)]
pub struct SummabilityReport {
    pub k_max: usize,
    /// `Σ_{k≤K} (1/#A_k) Σ_{a∈A_k} |a|/(1+|a|)`.
    pub partial_sum: f64,
    /// `2d√d`, reported when the hypotheses hold up to `K` with no excess digits.
    pub cube_cap: Option<f64>,
    pub existence: ExistenceLabel,
}

pub fn jessen_wintner_partial(
    spec: &SequenceSpec,
    k_max: usize,
    cap: u128,
) -> Result<SummabilityReport> {
    let stages = spec.stages(k_max)?;
    let mut partial_sum = 0.0;
    for a in scaled_digit_sets(&stages, cap)? {
        let n = a.len() as f64;
        partial_sum += a
            .iter()
            .map(|x| {
                let r = x.euclid_norm_f64();
                r / (1.0 + r)
            })
            .sum::<f64>()
            / n;
    }
    let hyp = hypotheses_check(spec, k_max, cap)?;
    let holds = hyp.all_hold();
    let d = spec.d() as f64;
    Ok(SummabilityReport {
        k_max,
        partial_sum,
        cube_cap: (holds && hyp.zero_excess()).then(|| 2.0 * d * d.sqrt()),
        existence: if holds {
            ExistenceLabel::HypothesesHoldUpToK
        } else {
            ExistenceLabel::SupportedByCriterion
        },
    })
}

enum Draw {
    /// Independent coordinates: per-axis contributions.
    Axes(Vec<Vec<f64>>),
    Points(Vec<Vec<f64>>),
}

/// `count` points `Σ_{k≤K} (R_1⋯R_k)^{-1} b_k` with `b_k` uniform on `B_k`.
///
/// The generator is ChaCha8 seeded through `seed_from_u64`, so a seed fixes
/// the stream on every platform. Each stage contribution is computed exactly
/// and rounded once.
pub fn sample(
    spec: &SequenceSpec,
    k_max: usize,
    count: usize,
    seed: u64,
    cap: u128,
) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let d = spec.d();
    let stages = spec.stages(k_max)?;
    let products = prefix_products(&stages)?;
    let mut draws = Vec::with_capacity(stages.len());
    for (s, (_, inv)) in stages.iter().zip(&products) {
        let draw = match (s.digits.axis(), inv.as_scalar()) {
            (Some(axis), Some(c)) => Draw::Axes(
                (0..d)
                    .map(|_| axis.iter().map(|a| rat_to_f64(&(a * &c))).collect())
                    .collect(),
            ),
            _ => Draw::Points(
                s.digits
                    .to_vec_capped(cap)?
                    .iter()
                    .map(|b| inv.mul_vec(b).to_f64())
                    .collect(),
            ),
        };
        draws.push(draw);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = vec![0.0; d];
        for draw in &draws {
            match draw {
                Draw::Axes(axes) => {
                    for (xi, axis) in x.iter_mut().zip(axes) {
                        *xi += axis[rng.gen_range(0..axis.len())];
                    }
                }
                Draw::Points(pts) => {
                    let p = &pts[rng.gen_range(0..pts.len())];
                    for (xi, pi) in x.iter_mut().zip(p) {
                        *xi += pi;
                    }
                }
            }
        }
        out.push(x);
    }
    Ok(out)
}

pub fn samples_csv(d: usize, samples: &[Vec<f64>]) -> String {
    let head: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    let mut out = head.join(",");
    out.push('\n');
    for s in samples {
        let row: Vec<String> = s.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
