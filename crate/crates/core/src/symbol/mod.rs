//! Fiberwise-polynomial Hamiltonians on `T*M` and the symbols of
//! second-order operators.

mod bracket;
mod canonical;
mod connection;

pub use bracket::{
    bracket_combination, bracket_from_operator, principal_symbol, subprincipal_components,
    subprincipal_symbol, Bracket,
};
pub use canonical::{canonical_bracket, curvature, Curvature};
pub use connection::{
    upper_connection_derivative, verify_connection_law, ConnectionLawCertificate,
};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::diffop::DerivIndex;
use crate::error::{Error, Result};
use crate::graded::{Chart, GradedScalar, Parity, RatFunc, Q};

/// Momentum degrees above this are out of scope.
pub const MAX_MOMENTUM_DEGREE: usize = 4;

/// A function on `T*M`, polynomial in the momenta `p_a` (with `p̃_a = ã`).
///
/// Stored as a scalar on the phase-space chart of `base`. A monomial in the
/// momenta is described by a [`DerivIndex`]: `p^α` is the word of `∂^α` with
/// every `∂_a` replaced by `p_a`. Coefficients always stand to the left.
#[derive(Clone, PartialEq, Debug)]
pub struct MomentumPolynomial {
    base: Chart,
    inner: GradedScalar,
}

impl MomentumPolynomial {
    pub fn zero(base: &Chart) -> Self {
        MomentumPolynomial {
            base: base.clone(),
            inner: GradedScalar::zero(base.phase_space()),
        }
    }

    /// A function on the base, as a momentum-independent Hamiltonian.
    pub fn from_function(f: &GradedScalar) -> Self {
        let base = f.chart();
        let ne: Vec<usize> = (0..base.n_even()).collect();
        let no: Vec<usize> = (0..base.n_odd()).collect();
        MomentumPolynomial {
            base: base.clone(),
            inner: f.reindex(base.phase_space(), &ne, &no),
        }
    }

    pub fn momentum(base: &Chart, a: usize) -> Self {
        let ph = base.phase_space();
        MomentumPolynomial {
            base: base.clone(),
            inner: GradedScalar::coord(ph, base.momentum_of(a)),
        }
    }

    /// Wrap a scalar on the phase-space chart.
    pub fn from_phase(base: &Chart, inner: GradedScalar) -> Result<Self> {
        if inner.chart() != base.phase_space() {
            return Err(Error::ChartMismatch);
        }
        Ok(MomentumPolynomial {
            base: base.clone(),
            inner,
        })
    }

    /// `Σ c_α p^α`.
    pub fn from_components<'a>(
        base: &Chart,
        comps: impl IntoIterator<Item = (&'a DerivIndex, &'a GradedScalar)>,
    ) -> Self {
        let mut acc = Self::zero(base);
        for (idx, c) in comps {
            let mut term = Self::from_function(c);
            for a in idx.word(base) {
                term = term.mul_unchecked(&Self::momentum(base, a));
            }
            acc = &acc + &term;
        }
        acc
    }

    /// `Σ_a c^a p_a`.
    pub fn linear(base: &Chart, comps: &[GradedScalar]) -> Self {
        let idx: Vec<DerivIndex> = (0..base.dim())
            .map(|a| DerivIndex::single(base, a))
            .collect();
        Self::from_components(base, idx.iter().zip(comps))
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn as_phase(&self) -> &GradedScalar {
        &self.inner
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    pub fn parity(&self) -> Option<Parity> {
        self.inner.parity()
    }

    /// Decompose as `Σ c_α p^α` with coefficients on the base.
    pub fn components(&self) -> BTreeMap<DerivIndex, GradedScalar> {
        let base = &self.base;
        let (ne, no) = (base.n_even(), base.n_odd());
        let low_mask = if no == 32 { u32::MAX } else { (1u32 << no) - 1 };
        let mut out: BTreeMap<DerivIndex, GradedScalar> = BTreeMap::new();
        for (mask, rf) in self.inner.terms() {
            let den_parts = rf.den().split_tail(ne);
            debug_assert_eq!(den_parts.len(), 1, "momenta in a denominator");
            let den = den_parts.into_values().next().expect("nonzero denominator");
            for (tail, head) in rf.num().split_tail(ne) {
                let idx = DerivIndex {
                    even: tail,
                    odd: mask >> no,
                };
                let coef = GradedScalar::from_terms(
                    base,
                    [(mask & low_mask, RatFunc::new(head, den.clone()))],
                );
                let slot = out.entry(idx).or_insert_with(|| GradedScalar::zero(base));
                *slot = &*slot + &coef;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Largest momentum degree; 0 for zero.
    pub fn degree(&self) -> usize {
        self.components()
            .keys()
            .map(|i| i.order())
            .max()
            .unwrap_or(0)
    }

    pub fn part_of_degree(&self, k: usize) -> MomentumPolynomial {
        let comps = self.components();
        Self::from_components(&self.base, comps.iter().filter(|(i, _)| i.order() == k))
    }

    /// Coefficients `c^a` of the degree-one part `c^a p_a`.
    pub fn linear_components(&self) -> Vec<GradedScalar> {
        let comps = self.components();
        (0..self.base.dim())
            .map(|a| {
                comps
                    .get(&DerivIndex::single(&self.base, a))
                    .cloned()
                    .unwrap_or_else(|| GradedScalar::zero(&self.base))
            })
            .collect()
    }

    /// The momentum-independent part as a base function.
    pub fn constant_part(&self) -> GradedScalar {
        self.components()
            .remove(&DerivIndex::identity(&self.base))
            .unwrap_or_else(|| GradedScalar::zero(&self.base))
    }

    pub fn scale(&self, c: &Q) -> MomentumPolynomial {
        MomentumPolynomial {
            base: self.base.clone(),
            inner: self.inner.scale(c),
        }
    }

    fn mul_unchecked(&self, other: &MomentumPolynomial) -> MomentumPolynomial {
        MomentumPolynomial {
            base: self.base.clone(),
            inner: &self.inner * &other.inner,
        }
    }

    pub fn try_mul(&self, other: &MomentumPolynomial) -> Result<MomentumPolynomial> {
        if self.base != other.base {
            return Err(Error::ChartMismatch);
        }
        let out = self.mul_unchecked(other);
        let deg = out.degree();
        if deg > MAX_MOMENTUM_DEGREE {
            return Err(Error::OrderTooHigh {
                found: deg,
                max: MAX_MOMENTUM_DEGREE,
            });
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &MomentumPolynomial) -> Result<MomentumPolynomial> {
        if self.base != other.base {
            return Err(Error::ChartMismatch);
        }
        Ok(MomentumPolynomial {
            base: self.base.clone(),
            inner: &self.inner + &other.inner,
        })
    }
}

impl Add for &MomentumPolynomial {
    type Output = MomentumPolynomial;
    fn add(self, rhs: &MomentumPolynomial) -> MomentumPolynomial {
        self.try_add(rhs)
            .expect("momentum polynomials on one chart")
    }
}

impl Sub for &MomentumPolynomial {
    type Output = MomentumPolynomial;
    fn sub(self, rhs: &MomentumPolynomial) -> MomentumPolynomial {
        self.try_add(&-rhs)
            .expect("momentum polynomials on one chart")
    }
}

impl Mul for &MomentumPolynomial {
    type Output = MomentumPolynomial;
    fn mul(self, rhs: &MomentumPolynomial) -> MomentumPolynomial {
        self.try_mul(rhs)
            .expect("momentum product within the degree bound")
    }
}

impl Neg for &MomentumPolynomial {
    type Output = MomentumPolynomial;
    fn neg(self) -> MomentumPolynomial {
        MomentumPolynomial {
            base: self.base.clone(),
            inner: -&self.inner,
        }
    }
}

impl fmt::Display for MomentumPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inner)
    }
}
