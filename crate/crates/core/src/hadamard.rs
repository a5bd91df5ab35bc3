//! Admissible pairs, Hadamard triples and the per-stage hypothesis checks for
//! nearly `d`-th power lattices.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::digits::DigitSet;
use crate::error::{Error, Result};
use crate::exact_linalg::{
    cube_in_image, entries_multiple_of, fmt_rat, frac, rat, rat_to_f64, residue_equal, MatD, Rat,
    VecD,
};
use crate::sequence::{SequenceSpec, Stage};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest `#B` for which the numeric Gram matrix is formed.
pub const NUMERIC_CAP: u128 = 512;

#[derive(Clone, Debug, PartialEq)]
pub enum Verification {
    ExactByConstruction,
    NumericPass { max_defect: f64 },
    Fail { pair: (VecD, VecD), modulus: f64 },
}

impl Verification {
    pub fn passed(&self) -> bool {
        !matches!(self, Verification::Fail { .. })
    }
}

impl std::fmt::Display for Verification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verification::ExactByConstruction => write!(f, "ExactByConstruction"),
            Verification::NumericPass { max_defect } => write!(f, "NumericPass({max_defect:e})"),
            Verification::Fail { pair, modulus } => {
                write!(f, "Fail(l={}, l'={}, |<.,.>|={modulus:e})", pair.0, pair.1)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct HadamardTriple {
    pub r: MatD,
    pub b: DigitSet,
    pub l: DigitSet,
    pub verified: Verification,
}

/// Integer `m` with `m^d = n`, if any.
pub fn integer_root(n: u128, d: usize) -> Option<u64> {
    if d == 0 {
        return None;
    }
    let guess = (n as f64).powf(1.0 / d as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| (m as u128).checked_pow(d as u32) == Some(n))
}

/// `L = (1/m)·R^T·{0,…,m-1}^d`.
pub fn canonical_dual(r: &MatD, m: u64) -> Result<DigitSet> {
    if m == 0 || !entries_multiple_of(r, &BigInt::from(m))? {
        return Err(Error::PreconditionViolated(format!(
            "entries of R are not multiples of {m}"
        )));
    }
    let d = r.dim();
    let mr = rat(m as i64);
    if let Some(s) = r.as_scalar() {
        let step = s / &mr;
        return DigitSet::power((0..m).map(|i| &step * rat(i as i64)).collect(), d);
    }
    let rt = r.transpose();
    let scale = Rat::one() / mr;
    DigitSet::new(
        DigitSet::cube(m, d)
            .iter()
            .map(|v| rt.mul_vec(&v).scale(&scale))
            .collect(),
    )
}

/// `B ≡ U (mod R·Z^d)`; Cartesian powers under a scalar `R` reduce to one axis.
pub fn digits_residue_equal(b: &DigitSet, u: &DigitSet, r: &MatD, cap: u128) -> Result<bool> {
    if let (Some(ba), Some(ua), Some(s)) = (b.axis(), u.axis(), r.as_scalar()) {
        if b.dim() == u.dim() && r.is_integer() {
            let pts = |a: &[Rat]| a.iter().map(|x| VecD(vec![x.clone()])).collect::<Vec<_>>();
            return residue_equal(&pts(ba), &pts(ua), &MatD::scalar(1, s));
        }
    }
    if b.len() != u.len() {
        return Ok(false);
    }
    residue_equal(&b.to_vec_capped(cap)?, &u.to_vec_capped(cap)?, r)
}

/// Maximum defect of `M^*M = I` for `M = [e^{-2πi<R⁻¹b,l>}/√#B]`, with the
/// worst pair of columns. Phases are reduced mod 1 exactly before rounding.
pub fn numeric_unitarity(r: &MatD, b: &DigitSet, l: &DigitSet) -> Result<(f64, (VecD, VecD))> {
    let n = b.len();
    if n != l.len() {
        return Err(Error::SizeMismatch(format!("#B = {n}, #L = {}", l.len())));
    }
    if n > NUMERIC_CAP {
        return Err(Error::CapExceeded {
            needed: n,
            cap: NUMERIC_CAP,
        });
    }
    let inv = r.invert()?;
    let scaled: Vec<VecD> = b.iter().map(|x| inv.mul_vec(&x)).collect();
    let ls: Vec<VecD> = l.iter().collect();
    let tau = std::f64::consts::TAU;
    let cols: Vec<Vec<Complex64>> = ls
        .iter()
        .map(|lv| {
            scaled
                .iter()
                .map(|bv| Complex64::from_polar(1.0, -tau * rat_to_f64(&frac(&bv.dot(lv)))))
                .collect()
        })
        .collect();
    let nf = n as f64;
    let mut worst = (0.0f64, (ls[0].clone(), ls[0].clone()));
    for i in 0..cols.len() {
        for j in i..cols.len() {
            let ip: Complex64 = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                / nf;
            let defect = if i == j { (ip - 1.0).norm() } else { ip.norm() };
            if defect > worst.0 {
                worst = (defect, (ls[i].clone(), ls[j].clone()));
            }
        }
    }
    Ok(worst)
}

/// Decides whether `(R, B, L)` is a Hadamard triple.
///
/// The exact path applies when `B ≡ {0..m-1}^d (mod R·Z^d)`, `m` divides every
/// entry of `R` and `L` is the canonical dual. Otherwise the Gram matrix is
/// evaluated numerically and compared against `tol`.
pub fn check_unitary(r: &MatD, b: &DigitSet, l: &DigitSet, tol: f64) -> Result<HadamardTriple> {
    if b.len() != l.len() {
        return Err(Error::SizeMismatch(format!(
            "#B = {}, #L = {}",
            b.len(),
            l.len()
        )));
    }
    if b.dim() != r.dim() || l.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            found: if b.dim() != r.dim() { b.dim() } else { l.dim() },
        });
    }
    r.invert()?;
    let triple = |verified| HadamardTriple {
        r: r.clone(),
        b: b.clone(),
        l: l.clone(),
        verified,
    };
    if exact_path_applies(r, b, l) {
        return Ok(triple(Verification::ExactByConstruction));
    }
    let (defect, pair) = numeric_unitarity(r, b, l)?;
    Ok(triple(if defect <= tol {
        Verification::NumericPass { max_defect: defect }
    } else {
        Verification::Fail {
            pair,
            modulus: defect,
        }
    }))
}

fn exact_path_applies(r: &MatD, b: &DigitSet, l: &DigitSet) -> bool {
    let Some(m) = integer_root(b.len(), r.dim()) else {
        return false;
    };
    if m < 1 || !r.is_integer() {
        return false;
    }
    let Ok(dual) = canonical_dual(r, m) else {
        return false;
    };
    dual == *l
        && matches!(
            digits_residue_equal(b, &DigitSet::cube(m, r.dim()), r, u128::MAX),
            Ok(true)
        )
}

/// The triple of a stage, with its declared dual or the canonical one.
pub fn stage_triple(stage: &Stage, tol: f64) -> Result<HadamardTriple> {
    let l = match (&stage.dual, stage.m) {
        (Some(l), _) => l.clone(),
        (None, Some(m)) => canonical_dual(&stage.r, m)?,
        (None, None) => {
            return Err(Error::PreconditionViolated(
                "stage has neither m nor a dual set".into(),
            ))
        }
    };
    check_unitary(&stage.r, &stage.digits, &l, tol)
}

fn residue_ok(stage: &Stage, cap: u128) -> Result<bool> {
    let Some(m) = stage.m else {
        return Ok(false);
    };
    digits_residue_equal(
        &stage.digits,
        &DigitSet::cube(m, stage.r.dim()),
        &stage.r,
        cap,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeRow {
    pub k: usize,
    pub residue_ok: bool,
    pub excess_count: u128,
    pub excess_ratio: Rat,
}

#[derive(Clone, Debug)]
pub struct LatticeReport {
    pub rows: Vec<LatticeRow>,
    pub partial_sum: Rat,
    /// Echoed from the spec, never computed.
    pub declared_tail: Option<Rat>,
}

pub fn lattice_report(spec: &SequenceSpec, k_max: usize, cap: u128) -> Result<LatticeReport> {
    let mut rows = Vec::with_capacity(k_max);
    let mut partial_sum = Rat::zero();
    for (i, stage) in spec.stages(k_max)?.iter().enumerate() {
        let excess_ratio = stage.excess_ratio();
        partial_sum += &excess_ratio;
        rows.push(LatticeRow {
            k: i + 1,
            residue_ok: residue_ok(stage, cap)?,
            excess_count: stage.excess_count(),
            excess_ratio,
        });
    }
    Ok(LatticeReport {
        rows,
        partial_sum,
        declared_tail: spec.declared_tail().cloned(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisRow {
    pub k: usize,
    pub m_ok: bool,
    pub divisible_ok: bool,
    pub cube_ok: bool,
    pub residue_ok: bool,
    pub excess_count: u128,
    pub excess_ratio: Rat,
}

impl HypothesisRow {
    pub fn holds(&self) -> bool {
        self.m_ok && self.divisible_ok && self.cube_ok && self.residue_ok
    }
}

#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub k_max: usize,
    pub rows: Vec<HypothesisRow>,
    pub partial_sum: Rat,
    pub declared_tail: Option<Rat>,
}

impl HypothesisReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(HypothesisRow::holds)
    }

    pub fn zero_excess(&self) -> bool {
        self.partial_sum.is_zero()
    }

    pub fn first_failure(&self) -> Option<&HypothesisRow> {
        self.rows.iter().find(|r| !r.holds())
    }

    pub fn verdict(&self) -> String {
        match self.first_failure() {
            None => format!("hypotheses hold up to K={}", self.k_max),
            Some(row) => {
                let mut failed = Vec::new();
                if !row.m_ok {
                    failed.push("m_k >= 2");
                }
                if !row.divisible_ok {
                    failed.push("m_k divides R_k");
                }
                if !row.cube_ok {
                    failed.push("cube in R_k^T image");
                }
                if !row.residue_ok {
                    failed.push("residue classes");
                }
                format!("hypotheses fail at k={}: {}", row.k, failed.join(", "))
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,residue_ok,excess_count,excess_ratio,cube_ok,divisible_ok\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k,
                r.residue_ok,
                r.excess_count,
                fmt_rat(&r.excess_ratio),
                r.cube_ok,
                r.divisible_ok
            ));
        }
        out
    }
}

fn cube_ok(r: &MatD, m: u64) -> bool {
    let mr = rat(m as i64);
    if let Some(s) = r.as_scalar() {
        return s.abs() >= mr;
    }
    cube_in_image(&r.transpose(), &mr).unwrap_or(false)
}

/// Per-stage hypotheses (a) `m_k ≥ 2`, (b) `m_k` divides every entry of
/// `R_k`, (c) `[-m_k,m_k]^d ⊆ R_k^T[-1,1]^d`, (d) the residue condition, and
/// the partial excess sum. Says nothing about stages beyond `K`.
pub fn hypotheses_check(spec: &SequenceSpec, k_max: usize, cap: u128) -> Result<HypothesisReport> {
    let mut rows = Vec::with_capacity(k_max);
    let mut partial_sum = Rat::zero();
    for (i, stage) in spec.stages(k_max)?.iter().enumerate() {
        let m = stage.m.unwrap_or(0);
        let divisible_ok = m >= 1
            && stage.r.is_integer()
            && entries_multiple_of(&stage.r, &BigInt::from(m)).unwrap_or(false);
        let residue_ok = match residue_ok(stage, cap) {
            Ok(v) => v,
            Err(Error::NonIntegerMatrix | Error::AmbiguousResidues(_)) => false,
            Err(e) => return Err(e),
        };
        let excess_ratio = stage.excess_ratio();
        partial_sum += &excess_ratio;
        rows.push(HypothesisRow {
            k: i + 1,
            m_ok: m >= 2,
            divisible_ok,
            cube_ok: m >= 1 && cube_ok(&stage.r, m),
            residue_ok,
            excess_count: stage.excess_count(),
            excess_ratio,
        });
    }
    Ok(HypothesisReport {
        k_max,
        rows,
        partial_sum,
        declared_tail: spec.declared_tail().cloned(),
    })
}
