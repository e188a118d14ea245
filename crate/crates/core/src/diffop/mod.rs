//! Normal-ordered differential operators `Σ f_α ∂^α` with coefficients on
//! the left.

mod adjoint;
mod pullback;

pub use adjoint::{adjoint_certificate, formal_adjoint, DivergenceCertificate, WeightedOperator};
pub use pullback::op_pullback;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::graded::{Chart, GradedScalar, GrassMono, Parity, Q};

/// Operators above this order are outside the engine's scope. Four is the
/// square of a second-order operator.
pub const MAX_ORDER: usize = 4;

/// Derivative multi-index: a multiset over even coordinates (exponents by
/// even slot) and a subset over odd coordinates (bit mask by odd slot).
///
/// The derivative word it stands for lists even derivatives first, then odd
/// ones by increasing slot: `∂_{x}^{e} … ∂_{ξ_i} ∂_{ξ_j}` with `i < j`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DerivIndex {
    pub even: Vec<u32>,
    pub odd: GrassMono,
}

impl DerivIndex {
    pub fn identity(chart: &Chart) -> Self {
        DerivIndex {
            even: vec![0; chart.n_even()],
            odd: 0,
        }
    }

    pub fn single(chart: &Chart, a: usize) -> Self {
        let mut idx = Self::identity(chart);
        let c = chart.coord(a);
        match c.parity {
            Parity::Even => idx.even[c.slot] = 1,
            Parity::Odd => idx.odd = 1 << c.slot,
        }
        idx
    }

    pub fn order(&self) -> usize {
        self.even.iter().map(|&e| e as usize).sum::<usize>() + self.odd.count_ones() as usize
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.odd.count_ones())
    }

    /// Chart indices of the derivative word, leftmost first.
    pub fn word(&self, chart: &Chart) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.order());
        for (slot, &e) in self.even.iter().enumerate() {
            for _ in 0..e {
                w.push(chart.even_index(slot));
            }
        }
        let mut rest = self.odd;
        while rest != 0 {
            let s = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            w.push(chart.odd_index(s));
        }
        w
    }

    /// `∂_a ∂^self` in normal form, with a negation flag; `None` when an odd
    /// derivative would repeat.
    pub fn left_mul(&self, chart: &Chart, a: usize) -> Option<(DerivIndex, bool)> {
        let c = chart.coord(a);
        let mut out = self.clone();
        match c.parity {
            Parity::Even => {
                out.even[c.slot] += 1;
                Some((out, false))
            }
            Parity::Odd => {
                let bit = 1u32 << c.slot;
                if self.odd & bit != 0 {
                    return None;
                }
                out.odd |= bit;
                Some((out, (self.odd & (bit - 1)).count_ones() % 2 == 1))
            }
        }
    }
}

/// A homogeneous linear differential operator of parity `ε`.
///
/// Every stored coefficient `f_α` has parity `ε + |α|_odd` and is nonzero,
/// so equality is structural. The order is recomputed from the terms.
#[derive(Clone, PartialEq)]
pub struct DiffOperator {
    chart: Chart,
    parity: Parity,
    terms: BTreeMap<DerivIndex, GradedScalar>,
}

impl DiffOperator {
    pub fn zero(chart: &Chart, parity: Parity) -> Self {
        DiffOperator {
            chart: chart.clone(),
            parity,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(chart: &Chart) -> Self {
        Self::multiplication(&GradedScalar::one(chart)).unwrap()
    }

    /// The operator `g ↦ f g`. `f` must be homogeneous.
    pub fn multiplication(f: &GradedScalar) -> Result<Self> {
        let parity = f.parity().ok_or_else(|| Error::ParityMismatch {
            expected: Parity::Even,
            found: alloc::format!("inhomogeneous coefficient {}", f),
        })?;
        let mut d = Self::zero(f.chart(), parity);
        d.add_term(DerivIndex::identity(f.chart()), f.clone());
        Ok(d)
    }

    pub fn partial(chart: &Chart, a: usize) -> Self {
        let mut d = Self::zero(chart, chart.parity(a));
        d.add_term(DerivIndex::single(chart, a), GradedScalar::one(chart));
        d
    }

    pub fn from_terms(
        chart: &Chart,
        parity: Parity,
        terms: impl IntoIterator<Item = (DerivIndex, GradedScalar)>,
    ) -> Result<Self> {
        let mut d = Self::zero(chart, parity);
        for (idx, c) in terms {
            if c.chart() != chart {
                return Err(Error::ChartMismatch);
            }
            if idx.even.len() != chart.n_even()
                || (chart.n_odd() < 32 && idx.odd >> chart.n_odd() != 0)
            {
                return Err(Error::Dimension(String::from(
                    "derivative index does not fit the chart",
                )));
            }
            if idx.order() > MAX_ORDER {
                return Err(Error::OrderTooHigh {
                    found: idx.order(),
                    max: MAX_ORDER,
                });
            }
            let want = parity + idx.parity();
            if !c.has_parity(want) {
                return Err(Error::ParityMismatch {
                    expected: want,
                    found: alloc::format!("{}", c),
                });
            }
            d.add_term(idx, c);
        }
        Ok(d)
    }

    fn add_term(&mut self, idx: DerivIndex, c: GradedScalar) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(idx) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DerivIndex, &GradedScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, idx: &DerivIndex) -> GradedScalar {
        self.terms
            .get(idx)
            .cloned()
            .unwrap_or_else(|| GradedScalar::zero(&self.chart))
    }

    /// Coefficient of `∂_a` alone.
    pub fn first_order_coefficient(&self, a: usize) -> GradedScalar {
        self.coefficient(&DerivIndex::single(&self.chart, a))
    }

    /// The order-zero coefficient `R = Δ(1)`.
    pub fn zeroth_order_coefficient(&self) -> GradedScalar {
        self.coefficient(&DerivIndex::identity(&self.chart))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest order with a nonzero coefficient; 0 for the zero operator.
    pub fn order(&self) -> usize {
        self.terms.keys().map(|i| i.order()).max().unwrap_or(0)
    }

    /// The terms of exactly order `k`.
    pub fn part_of_order(&self, k: usize) -> DiffOperator {
        DiffOperator {
            chart: self.chart.clone(),
            parity: self.parity,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.order() == k)
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    /// The operator with `R` replaced by `r`.
    pub fn with_zeroth_order(&self, r: &GradedScalar) -> Result<DiffOperator> {
        let mut d = self.clone();
        d.terms.remove(&DerivIndex::identity(&self.chart));
        d.try_add(&Self::multiplication(r)?)
    }

    fn check(&self, other: &DiffOperator) -> Result<()> {
        if self.chart != other.chart {
            Err(Error::ChartMismatch)
        } else {
            Ok(())
        }
    }

    /// Sum of two operators of the same parity. A zero summand adapts.
    pub fn try_add(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.check(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.parity != other.parity {
            return Err(Error::ParityMismatch {
                expected: self.parity,
                found: alloc::format!("{} operator", other.parity),
            });
        }
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> DiffOperator {
        let mut out = Self::zero(&self.chart, self.parity);
        for (i, f) in &self.terms {
            out.add_term(i.clone(), f.scale(c));
        }
        out
    }

    /// `f ∘ self` for a homogeneous `f`.
    pub fn left_mul_scalar(&self, f: &GradedScalar) -> Result<DiffOperator> {
        if f.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        let fp = f.parity().ok_or_else(|| Error::ParityMismatch {
            expected: Parity::Even,
            found: alloc::format!("inhomogeneous coefficient {}", f),
        })?;
        let mut out = Self::zero(&self.chart, self.parity + fp);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), f * c);
        }
        Ok(out)
    }

    /// `∂_a ∘ self`, normal-ordered by the graded Leibniz rule
    /// `∂_a ∘ c = (∂_a c) + (−1)^{ã c̃} c ∘ ∂_a`.
    pub fn left_mul_partial(&self, a: usize) -> DiffOperator {
        let pa = self.chart.parity(a);
        let mut out = Self::zero(&self.chart, self.parity + pa);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), c.partial(a));
            if let Some((idx2, neg)) = idx.left_mul(&self.chart, a) {
                let cp = self.parity + idx.parity();
                out.add_term(idx2, c.signed(neg ^ pa.sign_with(cp)));
            }
        }
        out
    }

    /// `self(f)`.
    pub fn apply(&self, f: &GradedScalar) -> Result<GradedScalar> {
        if f.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        let mut out = GradedScalar::zero(&self.chart);
        for (idx, c) in &self.terms {
            let mut g = f.clone();
            for &a in idx.word(&self.chart).iter().rev() {
                g = g.partial(a);
                if g.is_zero() {
                    break;
                }
            }
            if !g.is_zero() {
                out = &out + &(c * &g);
            }
        }
        Ok(out)
    }

    /// `self ∘ other` in normal form.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.check(other)?;
        let mut out = Self::zero(&self.chart, self.parity + other.parity);
        for (idx, c) in &self.terms {
            let mut inner = other.clone();
            for &a in idx.word(&self.chart).iter().rev() {
                inner = inner.left_mul_partial(a);
            }
            for (j, g) in &inner.terms {
                out.add_term(j.clone(), c * g);
            }
        }
        if out.order() > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                found: out.order(),
                max: MAX_ORDER,
            });
        }
        Ok(out)
    }

    /// Graded commutator `[a, b] = ab − (−1)^{ε_a ε_b} ba`.
    pub fn commutator(&self, other: &DiffOperator) -> Result<DiffOperator> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        let ba = if self.parity.sign_with(other.parity) {
            -ba
        } else {
            ba
        };
        ab.try_add(&-ba)
    }
}

impl Add for &DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        self.try_add(rhs).expect("operator sum")
    }
}

impl Sub for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        self.try_add(&-rhs).expect("operator difference")
    }
}

impl Neg for &DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        DiffOperator {
            chart: self.chart.clone(),
            parity: self.parity,
            terms: self.terms.iter().map(|(i, c)| (i.clone(), -c)).collect(),
        }
    }
}

impl Neg for DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        -&self
    }
}

/// Wrap a coefficient in parentheses unless it is a single factor string.
fn coefficient_text(c: &GradedScalar) -> (bool, String) {
    let s = alloc::format!("{}", c);
    let tail = s.get(1..).unwrap_or("");
    let single = !tail.contains(" + ") && !tail.contains(" - ") && !s.contains(")/(");
    match (single, s.strip_prefix('-')) {
        (true, Some(rest)) => (true, String::from(rest)),
        (true, None) => (false, s),
        (false, _) => (false, alloc::format!("({})", s)),
    }
}

/// Prints in the textual operator syntax, e.g. `1/2*d[x]*d[x] + x*d[x] + 1`,
/// highest order first.
impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOperator[{}]({self})", self.parity)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut items: Vec<(&DerivIndex, &GradedScalar)> = self.terms.iter().collect();
        items.sort_by(|a, b| b.0.order().cmp(&a.0.order()).then_with(|| b.0.cmp(a.0)));
        for (k, (idx, c)) in items.into_iter().enumerate() {
            let derivs: Vec<String> = idx
                .word(&self.chart)
                .into_iter()
                .map(|a| alloc::format!("d[{}]", self.chart.coord(a).name))
                .collect();
            let (neg, coef) = coefficient_text(c);
            let body = if derivs.is_empty() {
                coef
            } else if coef == "1" {
                derivs.join("*")
            } else {
                alloc::format!("{}*{}", coef, derivs.join("*"))
            };
            match (k, neg) {
                (0, false) => write!(f, "{}", body)?,
                (0, true) => write!(f, "-{}", body)?,
                (_, false) => write!(f, " + {}", body)?,
                (_, true) => write!(f, " - {}", body)?,
            }
        }
        Ok(())
    }
}
