//! Exact rational vectors and square matrices, and the cube-geometry
//! predicates that the lattice hypotheses reduce to.
//!
//! Everything here is exact over `BigRational` except
//! [`min_eigenvalue_modulus_at_least`], which falls back to floating-point
//! eigenvalues (tolerance [`EIGEN_TOL`]) when the exact cube test is
//! inconclusive.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Tolerance of the floating-point eigenvalue fallback.
pub const EIGEN_TOL: f64 = 1e-9;

/// Largest ambient dimension the vertex enumeration is meant for.
pub const MAX_CUBE_DIM: usize = 6;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_from_big(n: BigInt) -> Rat {
    Rat::from_integer(n)
}

/// Parses `"7"`, `"-3"` or `"p/q"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion that survives numerators and denominators beyond the
/// `f64` range (only the quotient has to be representable).
pub fn rat_to_f64(r: &Rat) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// `x - floor(x)`, in `[0, 1)`.
pub fn frac(r: &Rat) -> Rat {
    r - r.floor()
}

/// A point of Q^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VecD(pub Vec<Rat>);

impl VecD {
    pub fn new(coords: Vec<Rat>) -> Self {
        VecD(coords)
    }

    pub fn zeros(d: usize) -> Self {
        VecD(vec![Rat::zero(); d])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        VecD(v.iter().map(|&x| rat(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &VecD) -> VecD {
        VecD(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VecD) -> VecD {
        VecD(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rat) -> VecD {
        VecD(self.0.iter().map(|a| a * s).collect())
    }

    pub fn dot(&self, other: &VecD) -> Rat {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
    }

    /// `||x|| = max |x_j|`.
    pub fn max_norm(&self) -> Rat {
        self.0
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat_to_f64).collect()
    }

    pub fn euclid_norm_f64(&self) -> f64 {
        self.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl fmt::Display for VecD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_rat(x))?;
        }
        write!(f, ")")
    }
}

/// A d×d rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatD {
    d: usize,
    entries: Vec<Rat>,
}

impl MatD {
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(MatD { d, entries })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        MatD::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x)).collect())
                .collect(),
        )
    }

    pub fn identity(d: usize) -> Self {
        MatD::scalar(d, Rat::one())
    }

    pub fn scalar(d: usize, s: Rat) -> Self {
        let mut m = MatD {
            d,
            entries: vec![Rat::zero(); d * d],
        };
        for i in 0..d {
            m.entries[i * d + i] = s.clone();
        }
        m
    }

    pub fn diag(values: &[Rat]) -> Self {
        let d = values.len();
        let mut m = MatD::scalar(d, Rat::zero());
        for (i, v) in values.iter().enumerate() {
            m.entries[i * d + i] = v.clone();
        }
        m
    }

    /// Parses the row-major literal syntax `4 -2 ; 0 2`.
    pub fn parse(s: &str) -> Option<Self> {
        let rows: Option<Vec<Vec<Rat>>> = s
            .split(';')
            .map(|row| row.split_whitespace().map(parse_rat).collect())
            .collect();
        MatD::from_rows(rows?).ok()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn is_integer(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    /// `Some(s)` when the matrix is `s·I`.
    pub fn as_scalar(&self) -> Option<Rat> {
        let s = self.get(0, 0).clone();
        for i in 0..self.d {
            for j in 0..self.d {
                let e = self.get(i, j);
                if (i == j && *e != s) || (i != j && !e.is_zero()) {
                    return None;
                }
            }
        }
        Some(s)
    }

    pub fn transpose(&self) -> MatD {
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.get(j, i).clone());
            }
        }
        MatD { d, entries }
    }

    pub fn mul(&self, other: &MatD) -> MatD {
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = Rat::zero();
                for k in 0..d {
                    acc += self.get(i, k) * other.get(k, j);
                }
                entries.push(acc);
            }
        }
        MatD { d, entries }
    }

    pub fn mul_vec(&self, v: &VecD) -> VecD {
        let d = self.d;
        VecD(
            (0..d)
                .map(|i| (0..d).fold(Rat::zero(), |acc, k| acc + self.get(i, k) * &v.0[k]))
                .collect(),
        )
    }

    pub fn det(&self) -> Rat {
        let d = self.d;
        let mut a = self.entries.clone();
        let mut det = Rat::one();
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| !a[r * d + col].is_zero()) else {
                return Rat::zero();
            };
            if piv != col {
                for j in 0..d {
                    a.swap(piv * d + j, col * d + j);
                }
                det = -det;
            }
            let p = a[col * d + col].clone();
            det *= &p;
            for r in col + 1..d {
                let f = &a[r * d + col] / &p;
                if f.is_zero() {
                    continue;
                }
                for j in col..d {
                    let v = &a[col * d + j] * &f;
                    a[r * d + j] -= v;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn invert(&self) -> Result<MatD> {
        let d = self.d;
        let mut a = self.entries.clone();
        let mut inv = MatD::identity(d).entries;
        for col in 0..d {
            let piv = (col..d)
                .find(|&r| !a[r * d + col].is_zero())
                .ok_or(Error::SingularMatrix)?;
            if piv != col {
                for j in 0..d {
                    a.swap(piv * d + j, col * d + j);
                    inv.swap(piv * d + j, col * d + j);
                }
            }
            let p = a[col * d + col].clone();
            for j in 0..d {
                a[col * d + j] /= &p;
                inv[col * d + j] /= &p;
            }
            for r in 0..d {
                if r == col || a[r * d + col].is_zero() {
                    continue;
                }
                let f = a[r * d + col].clone();
                for j in 0..d {
                    let va = &a[col * d + j] * &f;
                    a[r * d + j] -= va;
                    let vi = &inv[col * d + j] * &f;
                    inv[r * d + j] -= vi;
                }
            }
        }
        Ok(MatD { d, entries: inv })
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.d, |i, j| rat_to_f64(self.get(i, j)))
    }
}

impl fmt::Display for MatD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.d {
            if i > 0 {
                write!(f, " ; ")?;
            }
            for j in 0..self.d {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", fmt_rat(self.get(i, j)))?;
            }
        }
        Ok(())
    }
}

/// Outcome of the vertex test for `[-m,m]^d ⊆ M[-1,1]^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeCheck {
    pub contained: bool,
    /// First vertex `v` (all-plus first) with `M⁻¹v ∉ [-1,1]^d`, and its image.
    pub witness: Option<(VecD, VecD)>,
}

/// Vertices of `[-m,m]^d`, starting from `(m,…,m)`; bit `i` of the index
/// flips the sign of coordinate `i`.
pub fn cube_vertices(d: usize, m: &Rat) -> impl Iterator<Item = VecD> + '_ {
    (0u64..(1u64 << d)).map(move |mask| {
        VecD(
            (0..d)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        -m.clone()
                    } else {
                        m.clone()
                    }
                })
                .collect(),
        )
    })
}

/// Decides `[-m,m]^d ⊆ M[-1,1]^d` exactly: the image of a cube is the convex
/// hull of the vertex images, so it suffices that `M⁻¹v ∈ [-1,1]^d` on all
/// `2^d` vertices.
pub fn cube_containment(m: &MatD, half_side: &Rat) -> Result<CubeCheck> {
    let inv = m.invert()?;
    let one = Rat::one();
    for v in cube_vertices(m.dim(), half_side) {
        let img = inv.mul_vec(&v);
        if img.max_norm() > one {
            return Ok(CubeCheck {
                contained: false,
                witness: Some((v, img)),
            });
        }
    }
    Ok(CubeCheck {
        contained: true,
        witness: None,
    })
}

pub fn cube_in_image(m: &MatD, half_side: &Rat) -> Result<bool> {
    Ok(cube_containment(m, half_side)?.contained)
}

/// Every entry is an integer multiple of `modulus`.
pub fn entries_multiple_of(m: &MatD, modulus: &BigInt) -> Result<bool> {
    if !m.is_integer() {
        return Err(Error::NonIntegerMatrix);
    }
    if modulus.is_zero() {
        return Err(Error::PreconditionViolated(
            "modulus must be positive".into(),
        ));
    }
    Ok(m.entries()
        .iter()
        .all(|e| e.numer().mod_floor(modulus).is_zero()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum EigenBound {
    /// `[-C,C]^d ⊆ M[-1,1]^d` holds exactly, which bounds every eigenvalue.
    ProvenByCube,
    /// Smallest floating-point modulus minus `C` (≥ `-EIGEN_TOL`).
    ProvenNumeric { margin: f64 },
    /// Smallest eigenvalue modulus found below `C`.
    Refuted { modulus: f64 },
}

pub fn eigenvalue_moduli(m: &MatD) -> Vec<f64> {
    m.to_f64()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect()
}

pub fn min_eigenvalue_modulus_at_least(m: &MatD, c: &Rat) -> EigenBound {
    if !c.is_negative() && matches!(cube_in_image(m, c), Ok(true)) {
        return EigenBound::ProvenByCube;
    }
    let min = eigenvalue_moduli(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let c = rat_to_f64(c);
    if min >= c - EIGEN_TOL {
        EigenBound::ProvenNumeric { margin: min - c }
    } else {
        EigenBound::Refuted { modulus: min }
    }
}

/// Canonical representative of `v + R·Z^d`: fractional parts of `R⁻¹v`.
pub(crate) fn residue_key(inv: &MatD, v: &VecD) -> VecD {
    VecD(inv.mul_vec(v).0.iter().map(frac).collect())
}

/// Whether `B ≡ U (mod R·Z^d)` through a bijection.
///
/// Each `b` is matched to the unique `u` with `R⁻¹(b-u) ∈ Z^d`. Two elements
/// of `U` sharing a class make the question ill-posed (`AmbiguousResidues`);
/// two elements of `B` sharing a class, a `b` with no partner, or unequal
/// cardinalities give `false`.
pub fn residue_equal(b: &[VecD], u: &[VecD], r: &MatD) -> Result<bool> {
    if !r.is_integer() {
        return Err(Error::NonIntegerMatrix);
    }
    let inv = r.invert()?;
    // for R = sI and integer points the class is the coordinatewise residue mod s
    let modulus = r.as_scalar().map(|s| s.numer().abs());
    let key = |x: &VecD| match &modulus {
        Some(s) if x.is_integer() => VecD(
            x.coords()
                .iter()
                .map(|c| Rat::from_integer(c.numer().mod_floor(s)))
                .collect(),
        ),
        _ => residue_key(&inv, x),
    };
    let mut classes: BTreeMap<VecD, (usize, bool)> = BTreeMap::new();
    for (i, x) in u.iter().enumerate() {
        if x.dim() != r.dim() {
            return Err(Error::DimensionMismatch {
                expected: r.dim(),
                found: x.dim(),
            });
        }
        if let Some((j, _)) = classes.insert(key(x), (i, false)) {
            return Err(Error::AmbiguousResidues(format!(
                "{} and {} are congruent",
                u[j], x
            )));
        }
    }
    if b.len() != u.len() {
        return Ok(false);
    }
    for x in b {
        if x.dim() != r.dim() {
            return Err(Error::DimensionMismatch {
                expected: r.dim(),
                found: x.dim(),
            });
        }
        match classes.get_mut(&key(x)) {
            Some((_, used)) if !*used => *used = true,
            _ => return Ok(false),
        }
    }
    Ok(true)
}
