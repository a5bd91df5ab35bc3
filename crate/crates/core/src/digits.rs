//! Finite digit sets in Q^d.
//!
//! A digit set is either an explicit sorted list or a Cartesian power
//! `S^d` of a one-dimensional axis set. The power form keeps the families
//! with `m_k^d` digits cheap to describe, count and transform.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_linalg::{rat, Rat, VecD};

#[derive(Clone, Debug)]
enum Repr {
    List(Vec<VecD>),
    Power(Vec<Rat>),
}

#[derive(Clone, Debug)]
pub struct DigitSet {
    dim: usize,
    repr: Repr,
}

impl DigitSet {
    /// Explicit set; rejects duplicates, mixed dimensions and the empty set.
    pub fn new(mut elements: Vec<VecD>) -> Result<Self> {
        let dim = elements.first().ok_or(Error::EmptySet)?.dim();
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        elements.sort();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::PreconditionViolated(format!(
                "duplicate digit {}",
                w[0]
            )));
        }
        Ok(DigitSet {
            dim,
            repr: Repr::List(elements),
        })
    }

    /// `axis^dim`.
    pub fn power(mut axis: Vec<Rat>, dim: usize) -> Result<Self> {
        if axis.is_empty() || dim == 0 {
            return Err(Error::EmptySet);
        }
        axis.sort();
        axis.dedup();
        Ok(DigitSet {
            dim,
            repr: Repr::Power(axis),
        })
    }

    /// `{0, 1, …, m-1}^dim`.
    pub fn cube(m: u64, dim: usize) -> Self {
        let axis = (0..m.max(1))
            .map(|i| Rat::from_integer(BigInt::from(i)))
            .collect();
        DigitSet {
            dim,
            repr: Repr::Power(axis),
        }
    }

    pub fn from_ints(points: &[&[i64]]) -> Result<Self> {
        DigitSet::new(points.iter().map(|p| VecD::from_ints(p)).collect())
    }

    pub fn from_ints_1d(points: &[i64]) -> Result<Self> {
        DigitSet::new(points.iter().map(|&p| VecD::from_ints(&[p])).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cardinality, saturating at `u128::MAX`.
    pub fn len(&self) -> u128 {
        match &self.repr {
            Repr::List(v) => v.len() as u128,
            Repr::Power(a) => (a.len() as u128)
                .checked_pow(self.dim as u32)
                .unwrap_or(u128::MAX),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The axis when the set is stored as a Cartesian power.
    pub fn axis(&self) -> Option<&[Rat]> {
        match &self.repr {
            Repr::Power(a) => Some(a),
            Repr::List(_) => None,
        }
    }

    /// Elements in lexicographic order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = VecD> + '_> {
        match &self.repr {
            Repr::List(v) => Box::new(v.iter().cloned()),
            Repr::Power(axis) => Box::new(PowerIter {
                axis,
                idx: vec![0; self.dim],
                done: false,
            }),
        }
    }

    /// Materializes the elements, refusing beyond `cap`.
    pub fn to_vec_capped(&self, cap: u128) -> Result<Vec<VecD>> {
        let n = self.len();
        if n > cap {
            return Err(Error::CapExceeded { needed: n, cap });
        }
        Ok(self.iter().collect())
    }

    pub fn is_integer(&self) -> bool {
        match &self.repr {
            Repr::List(v) => v.iter().all(VecD::is_integer),
            Repr::Power(a) => a.iter().all(|x| x.is_integer()),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.repr {
            Repr::List(v) => v.iter().all(VecD::is_nonnegative),
            Repr::Power(a) => a.iter().all(|x| !x.is_negative()),
        }
    }

    pub fn contains(&self, x: &VecD) -> bool {
        match &self.repr {
            Repr::List(v) => v.binary_search(x).is_ok(),
            Repr::Power(a) => {
                x.dim() == self.dim && x.coords().iter().all(|c| a.binary_search(c).is_ok())
            }
        }
    }

    /// `B ∩ [lo, hi]^d`, or `None` when empty.
    pub fn restrict_to_box(&self, lo: &Rat, hi: &Rat) -> Option<DigitSet> {
        let inside = |x: &Rat| x >= lo && x <= hi;
        match &self.repr {
            Repr::List(v) => {
                let kept: Vec<VecD> = v
                    .iter()
                    .filter(|p| p.coords().iter().all(inside))
                    .cloned()
                    .collect();
                (!kept.is_empty()).then_some(DigitSet {
                    dim: self.dim,
                    repr: Repr::List(kept),
                })
            }
            Repr::Power(a) => {
                let kept: Vec<Rat> = a.iter().filter(|x| inside(x)).cloned().collect();
                (!kept.is_empty()).then_some(DigitSet {
                    dim: self.dim,
                    repr: Repr::Power(kept),
                })
            }
        }
    }

    /// `#(B ∩ [lo, hi]^d)`.
    pub fn count_in_box(&self, lo: &Rat, hi: &Rat) -> u128 {
        self.restrict_to_box(lo, hi).map_or(0, |s| s.len())
    }

    /// `#(B \ {0, …, m-1}^d)`.
    pub fn excess_over_cube(&self, m: u64) -> u128 {
        let hi = rat(m as i64 - 1);
        let inside = match &self.repr {
            Repr::List(v) => v
                .iter()
                .filter(|p| {
                    p.coords()
                        .iter()
                        .all(|x| x.is_integer() && !x.is_negative() && *x <= hi)
                })
                .count() as u128,
            Repr::Power(a) => (a
                .iter()
                .filter(|x| x.is_integer() && !x.is_negative() && **x <= hi)
                .count() as u128)
                .pow(self.dim as u32),
        };
        self.len() - inside
    }

    /// `max ||b||` over the set.
    pub fn max_norm(&self) -> Rat {
        match &self.repr {
            Repr::List(v) => v.iter().map(VecD::max_norm).max().unwrap_or_else(Rat::zero),
            Repr::Power(a) => a.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero),
        }
    }

    /// `min ||b||` over the elements outside `[0, c]^d`, or `None` when every
    /// element lies in the box.
    pub fn min_norm_outside_box(&self, c: &Rat) -> Option<Rat> {
        let zero = Rat::zero();
        let inside = |x: &Rat| *x >= zero && x <= c;
        match &self.repr {
            Repr::List(v) => v
                .iter()
                .filter(|p| !p.coords().iter().all(inside))
                .map(VecD::max_norm)
                .min(),
            Repr::Power(a) => {
                // one coordinate must leave the box; the rest are free
                let out = a.iter().filter(|x| !inside(x)).map(|x| x.abs()).min()?;
                if self.dim == 1 {
                    return Some(out);
                }
                let free = a.iter().map(|x| x.abs()).min().unwrap_or_else(Rat::zero);
                Some(out.max(free))
            }
        }
    }

    /// Elements outside `[0, c]^d`.
    pub fn outside_box(&self, c: &Rat, cap: u128) -> Result<Vec<VecD>> {
        let zero = Rat::zero();
        let n = self.len();
        if n > cap {
            return Err(Error::CapExceeded { needed: n, cap });
        }
        Ok(self
            .iter()
            .filter(|p| !p.coords().iter().all(|x| *x >= zero && x <= c))
            .collect())
    }

    /// Mean of the elements, coordinatewise.
    pub fn mean(&self) -> VecD {
        match &self.repr {
            Repr::List(v) => {
                let n = Rat::from_integer(BigInt::from(v.len()));
                let sum = v.iter().fold(VecD::zeros(self.dim), |acc, x| acc.add(x));
                sum.scale(&(Rat::one() / n))
            }
            Repr::Power(a) => {
                let n = Rat::from_integer(BigInt::from(a.len()));
                let m = a.iter().fold(Rat::zero(), |acc, x| acc + x) / n;
                VecD(vec![m; self.dim])
            }
        }
    }
}

impl PartialEq for DigitSet {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.len() != other.len() {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::List(a), Repr::List(b)) => a == b,
            (Repr::Power(a), Repr::Power(b)) => a == b,
            _ => self.iter().eq(other.iter()),
        }
    }
}

impl Eq for DigitSet {}

struct PowerIter<'a> {
    axis: &'a [Rat],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for PowerIter<'_> {
    type Item = VecD;

    fn next(&mut self) -> Option<VecD> {
        if self.done {
            return None;
        }
        let out = VecD(self.idx.iter().map(|&i| self.axis[i].clone()).collect());
        let mut pos = self.idx.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.axis.len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(out)
    }
}

/// Distinct sums `a + b`, `a ∈ A`, `b ∈ B`.
pub fn minkowski_sum(a: &BTreeSet<VecD>, b: &BTreeSet<VecD>) -> BTreeSet<VecD> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(x.add(y));
        }
    }
    out
}
