//! Uniform lower bounds for the Fourier transforms of the rescaled tails
//! `ν_{>n}` of a nearly `d`-th power lattice sequence.
//!
//! Writing `x0 = 1 - 2π²/27`, each tail factor is at least
//! `Π_j (1 - m²π²ξ_j²/6) - 2c/m^d` on `|ξ_j| ≤ √6/(mπ)`, and once
//! `2c_k/m_k^d < (2π²/27)·x0^d` every factor lies in `[x0^{d+1}, 1]`, where
//! `x ≥ e^{α(x-1)}` turns the product into the exponential bound `ε`.

use std::f64::consts::PI;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact_linalg::{cube_in_image, rat, MatD, Rat};
use crate::measure_lab::digit_fourier;
use crate::sequence::{SequenceSpec, Stage, TailSource};

/// Half-width of the box `[-2/3, 2/3]^d` the tail bound lives on.
pub const BOX: f64 = 2.0 / 3.0;

/// Margin `δ` around the shifted points.
pub const DELTA: f64 = 1.0 / 6.0;

pub fn x0() -> f64 {
    1.0 - 2.0 * PI * PI / 27.0
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `α = (d+1)·ln x0 / (x0^{d+1} - 1)`.
pub fn alpha_constant(d: usize) -> f64 {
    let x = x0();
    (d as f64 + 1.0) * x.ln() / (x.powi(d as i32 + 1) - 1.0)
}

/// `Σ_{j=1}^d C(d,j) u^j 4^{-jK} / (1 - 4^{-j})` with `u = 2π²/27`; at `K = 0`
/// this is `Σ_j C(d,j) 8^j π^{2j} / (27^j (4^j - 1))`.
pub fn geometric_series(d: usize, k: usize) -> f64 {
    let u = 2.0 * PI * PI / 27.0;
    (1..=d)
        .map(|j| {
            let q = 4f64.powi(-(j as i32));
            binomial(d, j) * u.powi(j as i32) * q.powi(k as i32) / (1.0 - q)
        })
        .sum()
}

/// `ε = exp(-α·Σ_j C(d,j) 8^jπ^{2j}/(27^j(4^j-1)) - 2α·tail)`.
pub fn epsilon_bound(d: usize, tail_sum: f64) -> f64 {
    let a = alpha_constant(d);
    (-a * geometric_series(d, 0) - 2.0 * a * tail_sum).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquiConstants {
    pub d: usize,
    pub x0: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub n0: Option<usize>,
}

impl EquiConstants {
    pub fn new(d: usize, tail_sum: f64, n0: Option<usize>) -> Self {
        EquiConstants {
            d,
            x0: x0(),
            alpha: alpha_constant(d),
            epsilon: epsilon_bound(d, tail_sum),
            n0,
        }
    }
}

/// `Π_j (1 - m²π²ξ_j²/6) - 2c/m^d` on `|ξ_j| ≤ √6/(mπ)`.
pub fn factor_lower_bound(m: u64, c: u128, xi: &[f64]) -> Result<f64> {
    if m < 2 {
        return Err(Error::PreconditionViolated("m must be at least 2".into()));
    }
    let mf = m as f64;
    let edge = 6f64.sqrt() / (mf * PI);
    if let Some(x) = xi.iter().find(|x| x.abs() > edge) {
        return Err(Error::OutOfDomain(format!("|{x}| exceeds {edge}")));
    }
    let prod: f64 = xi
        .iter()
        .map(|x| 1.0 - mf * mf * PI * PI * x * x / 6.0)
        .product();
    Ok(prod - 2.0 * c as f64 / mf.powi(xi.len() as i32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct N0Row {
    pub k: usize,
    pub excess_ratio: Rat,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct N0Report {
    pub n0: Option<usize>,
    pub rows: Vec<N0Row>,
    /// `(2π²/27)·x0^d`.
    pub threshold: f64,
}

/// Least `n0 ≤ K` with `2c_k/m_k^d < (2π²/27)·x0^d` for every `n0 ≤ k ≤ K`.
pub fn n0_threshold(spec: &SequenceSpec, k_max: usize) -> Result<N0Report> {
    let threshold = 2.0 * PI * PI / 27.0 * x0().powi(spec.d() as i32);
    let mut rows = Vec::with_capacity(k_max);
    for (i, s) in spec.stages(k_max)?.iter().enumerate() {
        let excess_ratio = s.excess_ratio();
        let twice = (&excess_ratio * rat(2)).to_f64().unwrap_or(f64::INFINITY);
        rows.push(N0Row {
            k: i + 1,
            ok: s.m.is_some_and(|m| m >= 2) && twice < threshold,
            excess_ratio,
        });
    }
    let n0 = match rows.iter().rposition(|r| !r.ok) {
        None => Some(1),
        Some(i) if i + 1 < k_max => Some(i + 2),
        Some(_) => None,
    };
    Ok(N0Report {
        n0,
        rows,
        threshold,
    })
}

/// `k_j = 0` if `x_j < 1/2`, else `-1`, so `x + k ∈ [-1/2, 1/2)^d`.
pub fn integer_shift(x: &[f64]) -> Result<Vec<i64>> {
    x.iter()
        .map(|&v| {
            if !(0.0..1.0).contains(&v) {
                Err(Error::OutOfDomain(format!("{v} is outside [0,1)")))
            } else if v < 0.5 {
                Ok(0)
            } else {
                Ok(-1)
            }
        })
        .collect()
}

/// `(R_{n+1}⋯R_{n+k})^{-T}[-2/3,2/3]^d ⊆ [-2/(3m_{n+1}⋯m_{n+k}), …]^d` for
/// `k = 1..=K`, decided exactly as `[-M,M]^d ⊆ P^T[-1,1]^d` with `M = Π m`.
pub fn nesting_check(spec: &SequenceSpec, n: usize, k_max: usize) -> Result<Vec<bool>> {
    let stages = spec.stages(n + k_max)?;
    let mut prod = MatD::identity(spec.d());
    let mut m_prod = Rat::from_integer(1.into());
    let mut out = Vec::with_capacity(k_max);
    for s in &stages[n..] {
        let m =
            s.m.ok_or_else(|| Error::PreconditionViolated("stage without m".into()))?;
        prod = prod.mul(&s.r);
        m_prod *= rat(m as i64);
        out.push(cube_in_image(&prod.transpose(), &m_prod)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailPositivity {
    pub grid_min: f64,
    pub epsilon: f64,
    pub ok: bool,
    /// Truncated product `Π_{k≤K} |δ̂_{B_{n+k}}(·)|` per grid point.
    pub products: Vec<f64>,
    /// Lower bound for the factors `k > K`.
    pub analytic_floor: f64,
    /// `Σ_{k>n} c_k/m_k^d` used for `ε`.
    pub tail_sum: f64,
    pub tail_source: TailSource,
}

impl TailPositivity {
    /// CSV `xi_1,…,xi_d,product_value,analytic_floor`.
    pub fn to_csv(&self, grid: &[Vec<f64>]) -> String {
        let d = grid.first().map_or(0, Vec::len);
        let mut head: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).collect();
        head.push("product_value".into());
        head.push("analytic_floor".into());
        let mut out = head.join(",");
        out.push('\n');
        for (xi, p) in grid.iter().zip(&self.products) {
            let mut row: Vec<String> = xi.iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{p:.17e}"));
            row.push(format!("{:.17e}", self.analytic_floor));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_grid(grid: &[Vec<f64>], d: usize) -> Result<()> {
    for xi in grid {
        if xi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: xi.len(),
            });
        }
        if xi.iter().any(|x| x.abs() > BOX) {
            return Err(Error::PreconditionViolated(format!(
                "grid point {xi:?} outside [-2/3,2/3]^d"
            )));
        }
    }
    Ok(())
}

/// Lower bound for `|ν̂_{>n}|` on the grid: the exact truncated product over
/// `k ≤ K` times `exp(-α(Σ_j C(d,j) u^j 4^{-jK}/(1-4^{-j}) + 2·Σ_{k>n+K} c_k/m_k^d))`
/// for the remaining factors.
///
/// Requires the excess inequality at every stage `k > n`; within the scanned
/// range this is `n0 ≤ n + 1`.
pub fn verify_tail_positivity(
    spec: &SequenceSpec,
    n: usize,
    k_max: usize,
    grid: &[Vec<f64>],
) -> Result<TailPositivity> {
    if k_max == 0 {
        return Err(Error::PreconditionViolated("K must be positive".into()));
    }
    let d = spec.d();
    check_grid(grid, d)?;
    let n0 = n0_threshold(spec, n + k_max)?;
    match n0.n0 {
        Some(n0) if n0 <= n + 1 => {}
        other => {
            return Err(Error::PreconditionViolated(format!(
                "excess inequality fails after n={n} (n0 = {other:?})"
            )))
        }
    }
    let stages = spec.stages(n + k_max)?;
    let tail = &stages[n..];
    let maps = inverse_transpose_products(tail)?;

    let (after, tail_source) = spec.excess_tail_after(n + k_max);
    let after = after.to_f64().unwrap_or(f64::INFINITY);
    let inside: f64 = tail
        .iter()
        .map(|s| s.excess_ratio().to_f64().unwrap_or(f64::INFINITY))
        .sum();
    let a = alpha_constant(d);
    let analytic_floor = (-a * (geometric_series(d, k_max) + 2.0 * after)).exp();
    let tail_sum = inside + after;
    let epsilon = epsilon_bound(d, tail_sum);

    let mut products = Vec::with_capacity(grid.len());
    let mut grid_min = f64::INFINITY;
    for xi in grid {
        let mut p = 1.0;
        for (s, m) in tail.iter().zip(&maps) {
            let eta: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)] * xi[j]).sum())
                .collect();
            p *= digit_fourier(&s.digits, &eta).norm();
        }
        grid_min = grid_min.min(p * analytic_floor);
        products.push(p);
    }
    Ok(TailPositivity {
        grid_min,
        epsilon,
        ok: grid_min > epsilon,
        products,
        analytic_floor,
        tail_sum,
        tail_source,
    })
}

/// `R_{n+1}^{-T}⋯R_{n+k}^{-T}` for each `k`, exact and then rounded.
fn inverse_transpose_products(tail: &[Stage]) -> Result<Vec<nalgebra::DMatrix<f64>>> {
    let d = tail.first().map_or(1, |s| s.r.dim());
    let mut acc = MatD::identity(d);
    let mut out = Vec::with_capacity(tail.len());
    for s in tail {
        acc = acc.mul(&s.r.transpose().invert()?);
        out.push(acc.to_f64());
    }
    Ok(out)
}
