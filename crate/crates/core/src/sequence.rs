//! Sequences of stages `(m_k, R_k, B_k)`, either an explicit finite prefix or
//! one of the named infinite families.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::constructions::{big_to_rat, counterexample_prefix, family_m, family_n, TargetDims};
use crate::digits::DigitSet;
use crate::error::{Error, Result};
use crate::exact_linalg::{rat, ratio, MatD, Rat, VecD};

/// One stage of the sequence. `m` is absent when the stage carries no
/// nearly-power-lattice structure (e.g. the sets of the non-closed sum).
#[derive(Clone, Debug)]
pub struct Stage {
    pub m: Option<u64>,
    pub r: MatD,
    pub digits: DigitSet,
    /// A user-supplied dual set `L_k`; the canonical one is used otherwise.
    pub dual: Option<DigitSet>,
}

impl Stage {
    pub fn new(m: Option<u64>, r: MatD, digits: DigitSet, dual: Option<DigitSet>) -> Result<Self> {
        let d = r.dim();
        if digits.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: digits.dim(),
            });
        }
        if let Some(l) = &dual {
            if l.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: l.dim(),
                });
            }
        }
        if r.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(Stage { m, r, digits, dual })
    }

    /// `#(B_k \ {0..m_k-1}^d)`; zero when `m` is absent.
    pub fn excess_count(&self) -> u128 {
        self.m.map_or(0, |m| self.digits.excess_over_cube(m))
    }

    /// `#(B_k \ {0..m_k-1}^d) / m_k^d`.
    pub fn excess_ratio(&self) -> Rat {
        match self.m {
            Some(m) if m > 0 => {
                let den = BigInt::from(m).pow(self.r.dim() as u32);
                Rat::new(BigInt::from(self.excess_count()), den)
            }
            _ => Rat::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `m_k = 2`, `R_k = 4I`, `B_k = {0,1}^d`, `L_k = {0,2}^d`.
    Quarter,
    Compact(TargetDims),
    Noncompact(TargetDims),
    /// The sets `A_k` of the non-closed infinite sum, with `R_k = 1`.
    Counterexample,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Quarter => "quarter",
            Family::Compact(_) => "compact",
            Family::Noncompact(_) => "noncompact",
            Family::Counterexample => "counterexample",
        }
    }

    pub fn target(&self) -> Option<&TargetDims> {
        match self {
            Family::Compact(t) | Family::Noncompact(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum SequenceKind {
    Explicit(Vec<Stage>),
    Family(Family),
}

/// Where a bound on `Σ_{k>n} c_k/m_k^d` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSource {
    /// Computed from the family's closed form.
    Analytic,
    /// Exact partial over the remaining explicit stages plus the spec's declaration.
    Declared,
    /// Nothing declared; the bound is taken to be the exact remainder of the prefix only.
    AssumedZero,
}

#[derive(Clone, Debug)]
pub struct SequenceSpec {
    d: usize,
    kind: SequenceKind,
    declared_tail: Option<Rat>,
}

impl SequenceSpec {
    pub fn explicit(d: usize, stages: Vec<Stage>, declared_tail: Option<Rat>) -> Result<Self> {
        if d == 0 {
            return Err(Error::PreconditionViolated("d must be positive".into()));
        }
        if stages.is_empty() {
            return Err(Error::PreconditionViolated(
                "explicit sequence has no stages".into(),
            ));
        }
        for s in &stages {
            if s.r.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.r.dim(),
                });
            }
        }
        Ok(SequenceSpec {
            d,
            kind: SequenceKind::Explicit(stages),
            declared_tail,
        })
    }

    pub fn family(d: usize, family: Family) -> Self {
        let d = match &family {
            Family::Counterexample => 1,
            Family::Compact(t) | Family::Noncompact(t) => t.d(),
            Family::Quarter => d,
        };
        SequenceSpec {
            d,
            kind: SequenceKind::Family(family),
            declared_tail: None,
        }
    }

    pub fn quarter(d: usize) -> Self {
        SequenceSpec::family(d, Family::Quarter)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn as_family(&self) -> Option<&Family> {
        match &self.kind {
            SequenceKind::Family(f) => Some(f),
            SequenceKind::Explicit(_) => None,
        }
    }

    pub fn declared_tail(&self) -> Option<&Rat> {
        self.declared_tail.as_ref()
    }

    pub fn with_declared_tail(mut self, tail: Option<Rat>) -> Self {
        self.declared_tail = tail;
        self
    }

    /// Number of available stages; `None` for the infinite families.
    pub fn prefix_len(&self) -> Option<usize> {
        match &self.kind {
            SequenceKind::Explicit(s) => Some(s.len()),
            SequenceKind::Family(_) => None,
        }
    }

    fn check_available(&self, n: usize) -> Result<()> {
        match self.prefix_len() {
            Some(len) if n > len => Err(Error::StageUnavailable(n)),
            _ => Ok(()),
        }
    }

    /// Stage `k` (1-based).
    pub fn stage(&self, k: usize) -> Result<Stage> {
        if k == 0 {
            return Err(Error::StageUnavailable(0));
        }
        self.check_available(k)?;
        match &self.kind {
            SequenceKind::Explicit(s) => Ok(s[k - 1].clone()),
            SequenceKind::Family(Family::Counterexample) => {
                let p = counterexample_prefix(k)?;
                Ok(counterexample_stage(&p.sets[k - 1]))
            }
            SequenceKind::Family(f) => Ok(family_stage(self.d, f, k as u64)),
        }
    }

    /// Stages `1..=n`.
    pub fn stages(&self, n: usize) -> Result<Vec<Stage>> {
        self.check_available(n)?;
        match &self.kind {
            SequenceKind::Explicit(s) => Ok(s[..n].to_vec()),
            SequenceKind::Family(Family::Counterexample) => {
                if n == 0 {
                    return Ok(Vec::new());
                }
                let p = counterexample_prefix(n)?;
                Ok(p.sets.iter().map(|a| counterexample_stage(a)).collect())
            }
            SequenceKind::Family(f) => {
                Ok((1..=n as u64).map(|k| family_stage(self.d, f, k)).collect())
            }
        }
    }

    /// Upper bound on `Σ_{k>n} #(B_k \ {0..m_k-1}^d)/m_k^d` and its source.
    ///
    /// The non-compact family uses `1-(1-1/m)^d ≤ d/m` and
    /// `Σ_{k>n} 1/k² ≤ 1/n`.
    pub fn excess_tail_after(&self, n: usize) -> (Rat, TailSource) {
        match &self.kind {
            SequenceKind::Family(Family::Quarter | Family::Compact(_)) => {
                (Rat::zero(), TailSource::Analytic)
            }
            SequenceKind::Family(Family::Noncompact(_)) => {
                let d = rat(self.d as i64);
                let bound = if n == 0 {
                    &d * ratio(3, 2)
                } else {
                    d / rat(n as i64)
                };
                (bound, TailSource::Analytic)
            }
            SequenceKind::Family(Family::Counterexample) => (Rat::zero(), TailSource::AssumedZero),
            SequenceKind::Explicit(stages) => {
                let rest: Rat = stages.iter().skip(n).map(Stage::excess_ratio).sum();
                match &self.declared_tail {
                    Some(t) => (rest + t, TailSource::Declared),
                    None => (rest, TailSource::AssumedZero),
                }
            }
        }
    }
}

fn counterexample_stage(set: &[Rat]) -> Stage {
    let points = set.iter().map(|x| VecD(vec![x.clone()])).collect();
    Stage {
        m: None,
        r: MatD::identity(1),
        digits: DigitSet::new(points).expect("A_k elements are distinct"),
        dual: None,
    }
}

fn family_stage(d: usize, family: &Family, k: u64) -> Stage {
    match family {
        Family::Quarter => Stage {
            m: Some(2),
            r: MatD::scalar(d, rat(4)),
            digits: DigitSet::cube(2, d),
            dual: None,
        },
        Family::Compact(t) => {
            let m = family_m(k);
            Stage {
                m: Some(m),
                r: MatD::scalar(d, big_to_rat(&family_n(t, k))),
                digits: DigitSet::cube(m, d),
                dual: None,
            }
        }
        Family::Noncompact(t) => {
            let m = family_m(k);
            let mut axis: Vec<Rat> = (0..m - 1).map(|i| rat(i as i64)).collect();
            axis.push(big_to_rat(&crate::constructions::far_digit(t, k)));
            Stage {
                m: Some(m),
                r: MatD::scalar(d, big_to_rat(&family_n(t, k))),
                digits: DigitSet::power(axis, d).expect("axis is non-empty"),
                dual: None,
            }
        }
        Family::Counterexample => unreachable!("handled by the caller"),
    }
}

/// The running products `R_1⋯R_k` for `k = 1..=n` together with their inverses.
pub fn prefix_products(stages: &[Stage]) -> Result<Vec<(MatD, MatD)>> {
    let d = stages.first().map_or(1, |s| s.r.dim());
    let mut prod = MatD::identity(d);
    let mut inv = MatD::identity(d);
    let mut out = Vec::with_capacity(stages.len());
    for s in stages {
        prod = prod.mul(&s.r);
        // (R_1⋯R_k)^{-1} = R_k^{-1}(R_1⋯R_{k-1})^{-1}
        inv = s.r.invert()?.mul(&inv);
        out.push((prod.clone(), inv.clone()));
    }
    Ok(out)
}
