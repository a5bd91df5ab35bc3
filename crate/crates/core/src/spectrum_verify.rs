//! Candidate spectra for finite convolutions and their orthonormal-basis
//! certificates.
//!
//! The tower is `Λ_n = L_1 + R_1^T L_2 + ⋯ + R_1^T⋯R_{n-1}^T L_n`. Atoms of
//! `μ_n` are `Σ_k (R_1⋯R_k)^{-1} b_k`, so the pairing of the level-`k` digit
//! with the level-`j` frequency is `<(R_1⋯R_k)^{-1} b_k, R_1^T⋯R_{j-1}^T l_j>`,
//! which reduces to `<R_k^{-1} b_k, l_k>` on the diagonal and is an integer
//! for `j > k`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact_linalg::{frac, parse_rat, rat_to_f64, MatD, Rat, VecD};
use crate::hadamard::HadamardTriple;
use crate::measure_lab::AtomicMeasure;

const TAU: f64 = std::f64::consts::TAU;

/// Largest `#atoms = #Λ` for the square-matrix basis certificate.
pub const BASIS_CERT_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Tower(usize),
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    points: Vec<VecD>,
    pub provenance: Provenance,
}

impl Spectrum {
    pub fn new(points: Vec<VecD>, provenance: Provenance) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptySet)?.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if let Some(p) = points.iter().find(|p| !p.is_integer()) {
            return Err(Error::PreconditionViolated(format!(
                "{p} is not an integer point"
            )));
        }
        let set: BTreeSet<VecD> = points.iter().cloned().collect();
        if set.len() != points.len() {
            return Err(Error::PreconditionViolated("spectrum points repeat".into()));
        }
        Ok(Spectrum {
            points: set.into_iter().collect(),
            provenance,
        })
    }

    pub fn points(&self) -> &[VecD] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn translate(&self, t: &VecD) -> Spectrum {
        Spectrum {
            points: self.points.iter().map(|p| p.add(t)).collect(),
            provenance: Provenance::UserSupplied,
        }
    }

    pub fn without(&self, p: &VecD) -> Result<Spectrum> {
        Spectrum::new(
            self.points.iter().filter(|q| *q != p).cloned().collect(),
            Provenance::UserSupplied,
        )
    }

    /// CSV with header `l_1,…,l_d`.
    pub fn to_csv(&self) -> String {
        let head: Vec<String> = (1..=self.dim()).map(|i| format!("l_{i}")).collect();
        let mut out = head.join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p
                .coords()
                .iter()
                .map(|c| c.to_integer().to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Reads integer rows; a first line that does not parse is taken as a header.
    pub fn from_csv(text: &str) -> Result<Spectrum> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let coords: Option<Vec<Rat>> = line.split(',').map(|s| parse_rat(s.trim())).collect();
            match coords {
                Some(c) => points.push(VecD(c)),
                None if i == 0 => continue,
                None => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("not a list of integers: {line}"),
                    })
                }
            }
        }
        Spectrum::new(points, Provenance::UserSupplied)
    }
}

/// Builds `Λ_n` from verified triples with integer `R_k` and `L_k`.
pub fn tower_spectrum(triples: &[HadamardTriple], n: usize) -> Result<Spectrum> {
    if n == 0 || n > triples.len() {
        return Err(Error::StageUnavailable(n));
    }
    let d = triples[0].r.dim();
    let mut lambda: BTreeSet<VecD> = BTreeSet::from([VecD::zeros(d)]);
    let mut scale = MatD::identity(d);
    for (i, t) in triples[..n].iter().enumerate() {
        if !t.verified.passed() {
            return Err(Error::UnverifiedTriple(i + 1));
        }
        if !t.r.is_integer() || !t.l.is_integer() {
            return Err(Error::PreconditionViolated(format!(
                "R_{} and L_{} must be integer",
                i + 1,
                i + 1
            )));
        }
        let shifted: Vec<VecD> = t.l.iter().map(|l| scale.mul_vec(&l)).collect();
        let mut next = BTreeSet::new();
        for a in &lambda {
            for b in &shifted {
                next.insert(a.add(b));
            }
        }
        if next.len() != lambda.len() * shifted.len() {
            return Err(Error::Collision { level: i + 1 });
        }
        lambda = next;
        scale = scale.mul(&t.r.transpose());
    }
    Ok(Spectrum {
        points: lambda.into_iter().collect(),
        provenance: Provenance::Tower(n),
    })
}

/// Largest common denominator served from a root-of-unity table.
const ROOT_TABLE_CAP: u64 = 1 << 20;

/// `e^{-2πi<λ,x>}` over the atoms `x` for integer `λ`, with the phase reduced
/// mod 1 exactly before it is rounded.
///
/// When the atom denominators share a multiple `D ≤ 2^20`, the phase is
/// `(Σ_j X_j λ_j mod D)/D` with `X = Dx mod D` and the character is a table
/// lookup; otherwise every phase is an exact rational.
enum Characters {
    Table {
        den: i64,
        nums: Vec<Vec<i64>>,
        roots: Vec<Complex64>,
    },
    Rational(Vec<VecD>),
}

impl Characters {
    fn new(mu: &AtomicMeasure) -> Self {
        let atoms: Vec<VecD> = mu.support().cloned().collect();
        let mut den = BigInt::one();
        for x in &atoms {
            for c in x.coords() {
                den = den.lcm(c.denom());
                if den > BigInt::from(ROOT_TABLE_CAP) {
                    return Characters::Rational(atoms);
                }
            }
        }
        let d = den.to_i64().expect("bounded by the table cap");
        let nums = atoms
            .iter()
            .map(|x| {
                x.coords()
                    .iter()
                    .map(|c| {
                        let scaled = c.numer() * (&den / c.denom());
                        scaled.mod_floor(&den).to_i64().expect("reduced mod den")
                    })
                    .collect()
            })
            .collect();
        let roots = (0..d)
            .map(|r| Complex64::from_polar(1.0, -TAU * r as f64 / d as f64))
            .collect();
        Characters::Table {
            den: d,
            nums,
            roots,
        }
    }

    fn row(&self, lambda: &VecD) -> Vec<Complex64> {
        match self {
            Characters::Table { den, nums, roots } => {
                let big_den = BigInt::from(*den);
                let lr: Vec<i128> = lambda
                    .coords()
                    .iter()
                    .map(|l| {
                        i128::from(
                            l.to_integer()
                                .mod_floor(&big_den)
                                .to_i64()
                                .expect("reduced"),
                        )
                    })
                    .collect();
                let den = i128::from(*den);
                nums.iter()
                    .map(|x| {
                        let r: i128 = x.iter().zip(&lr).map(|(a, b)| i128::from(*a) * b).sum();
                        roots[r.rem_euclid(den) as usize]
                    })
                    .collect()
            }
            Characters::Rational(atoms) => atoms
                .iter()
                .map(|x| Complex64::from_polar(1.0, -TAU * rat_to_f64(&frac(&x.dot(lambda)))))
                .collect(),
        }
    }

    fn transform(&self, w: &[f64], lambda: &VecD) -> Complex64 {
        self.row(lambda).iter().zip(w).map(|(c, wi)| c * wi).sum()
    }
}

fn weights(mu: &AtomicMeasure) -> Vec<f64> {
    mu.atoms().values().map(rat_to_f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityReport {
    pub ok: bool,
    pub worst_pair: Option<(VecD, VecD)>,
    pub worst_modulus: f64,
}

/// `max |μ̂(λ-λ')|` over unordered pairs of distinct points.
pub fn check_orthogonality(mu: &AtomicMeasure, lambda: &Spectrum, tol: f64) -> OrthogonalityReport {
    let w = weights(mu);
    let chars = Characters::new(mu);
    let mut cache: BTreeMap<VecD, f64> = BTreeMap::new();
    let mut worst = (0.0f64, None);
    let pts = lambda.points();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let diff = pts[i].sub(&pts[j]);
            let modulus = *cache
                .entry(diff)
                .or_insert_with_key(|diff| chars.transform(&w, diff).norm());
            if worst.1.is_none() || modulus > worst.0 {
                worst = (modulus, Some((pts[i].clone(), pts[j].clone())));
            }
        }
    }
    OrthogonalityReport {
        ok: worst.0 <= tol,
        worst_pair: worst.1,
        worst_modulus: worst.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsevalReport {
    pub grid_size: usize,
    pub max_defect: f64,
    pub worst_xi: Option<Vec<f64>>,
    /// `Q(ξ)` in grid order.
    pub values: Vec<f64>,
    /// `#Λ` differs from the number of atoms.
    pub size_mismatch: bool,
}

impl ParsevalReport {
    /// CSV `xi_1,…,xi_d,Q`.
    pub fn to_csv(&self, grid: &[Vec<f64>]) -> String {
        let d = grid.first().map_or(0, Vec::len);
        let mut head: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).collect();
        head.push("Q".into());
        let mut out = head.join(",");
        out.push('\n');
        for (xi, q) in grid.iter().zip(&self.values) {
            let mut row: Vec<String> = xi.iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{q:.17e}"));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `Q(ξ) = Σ_λ |μ̂(ξ+λ)|²` on the grid; the defect is `max |Q - 1|`.
pub fn check_parseval(mu: &AtomicMeasure, lambda: &Spectrum, grid: &[Vec<f64>]) -> ParsevalReport {
    let w = weights(mu);
    let atoms: Vec<Vec<f64>> = mu.support().map(VecD::to_f64).collect();
    let chars = Characters::new(mu);
    let table: Vec<Vec<Complex64>> = lambda.points().iter().map(|l| chars.row(l)).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut worst = (0.0f64, None);
    for xi in grid {
        let base: Vec<Complex64> = atoms
            .iter()
            .zip(&w)
            .map(|(x, wi)| {
                let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                Complex64::from_polar(*wi, -TAU * phase)
            })
            .collect();
        let q: f64 = table
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&base)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum();
        let defect = (q - 1.0).abs();
        if worst.1.is_none() || defect > worst.0 {
            worst = (defect, Some(xi.clone()));
        }
        values.push(q);
    }
    ParsevalReport {
        grid_size: grid.len(),
        max_defect: worst.0,
        worst_xi: worst.1,
        values,
        size_mismatch: lambda.len() != mu.len(),
    }
}

/// For `#atoms = #Λ ≤ 1024` the matrix `[√w_x e^{-2πi<λ,x>}]` is square and
/// its columns are orthonormal exactly when `Λ` is orthogonal for `μ`, which
/// makes `Λ` a basis. `None` when the certificate does not apply.
pub fn basis_certificate(mu: &AtomicMeasure, lambda: &Spectrum, tol: f64) -> Option<bool> {
    (mu.len() == lambda.len() && mu.len() <= BASIS_CERT_CAP)
        .then(|| check_orthogonality(mu, lambda, tol).ok)
}

/// `count` points uniform in `[lo, hi)^d` from a ChaCha8 stream.
pub fn random_grid(d: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..d).map(|_| rng.gen_range(lo..hi)).collect())
        .collect()
}
