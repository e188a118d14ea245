//! Functions on a super chart: `Q(x_even) ⊗ Λ(ξ_odd)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::chart::{Chart, Parity};
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::Q;
use crate::error::{Error, Result};

/// Grassmann monomial: bit `i` set means the `i`-th odd coordinate occurs.
/// Factors are always ordered by increasing slot.
pub type GrassMono = u32;

/// Product of two Grassmann monomials: `None` if they share a generator,
/// otherwise the union and whether reordering produced a minus sign.
pub fn grass_mul(a: GrassMono, b: GrassMono) -> Option<(GrassMono, bool)> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (a >> (j + 1)).count_ones();
    }
    Some((a | b, swaps & 1 == 1))
}

/// Left derivative of a Grassmann monomial with respect to generator `k`.
pub fn grass_left_derivative(m: GrassMono, k: usize) -> Option<(GrassMono, bool)> {
    let bit = 1u32 << k;
    if m & bit == 0 {
        return None;
    }
    let before = (m & (bit - 1)).count_ones();
    Some((m ^ bit, before & 1 == 1))
}

/// An element of the function algebra of a chart, in canonical form.
///
/// Each Grassmann monomial carries a reduced rational function in the even
/// coordinates; zero coefficients are never stored, so two scalars are equal
/// exactly when their term maps are.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedScalar {
    chart: Chart,
    terms: BTreeMap<GrassMono, RatFunc>,
}

impl GradedScalar {
    pub fn zero(chart: &Chart) -> Self {
        GradedScalar {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(chart: &Chart) -> Self {
        Self::constant(chart, Q::one())
    }

    pub fn constant(chart: &Chart, c: Q) -> Self {
        Self::from_ratfunc(chart, RatFunc::constant(chart.n_even(), c))
    }

    pub fn int(chart: &Chart, n: i64) -> Self {
        Self::constant(chart, Q::from_integer(BigInt::from(n)))
    }

    pub fn from_ratfunc(chart: &Chart, rf: RatFunc) -> Self {
        Self::from_terms(chart, core::iter::once((0, rf)))
    }

    pub fn from_terms(
        chart: &Chart,
        terms: impl IntoIterator<Item = (GrassMono, RatFunc)>,
    ) -> Self {
        let mut out = Self::zero(chart);
        for (m, rf) in terms {
            out.add_term(m, rf);
        }
        out
    }

    /// The coordinate function `x^i`.
    pub fn coord(chart: &Chart, i: usize) -> Self {
        let c = chart.coord(i);
        match c.parity {
            Parity::Even => {
                Self::from_ratfunc(chart, RatFunc::from_poly(Poly::var(chart.n_even(), c.slot)))
            }
            Parity::Odd => {
                Self::from_terms(chart, [(1u32 << c.slot, RatFunc::one(chart.n_even()))])
            }
        }
    }

    pub fn named(chart: &Chart, name: &str) -> Result<Self> {
        Ok(Self::coord(chart, chart.index_of(name)?))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GrassMono, &RatFunc)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: GrassMono) -> RatFunc {
        self.terms
            .get(&m)
            .cloned()
            .unwrap_or_else(|| RatFunc::zero(self.chart.n_even()))
    }

    fn add_term(&mut self, m: GrassMono, rf: RatFunc) {
        if rf.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(rf);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&rf);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|r| r.is_one())
    }

    /// Body: the coefficient of the empty Grassmann monomial.
    pub fn body(&self) -> RatFunc {
        self.coefficient(0)
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&0).and_then(|r| r.as_constant()),
            _ => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.values().all(|r| r.is_polynomial())
    }

    /// Parity when homogeneous. Zero reports `Even`.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| Parity::from_bit(m.count_ones()));
        let first = match it.next() {
            None => return Some(Parity::Even),
            Some(p) => p,
        };
        it.all(|p| p == first).then_some(first)
    }

    /// True when every term has parity `p` (zero has every parity).
    pub fn has_parity(&self, p: Parity) -> bool {
        self.terms
            .keys()
            .all(|m| Parity::from_bit(m.count_ones()) == p)
    }

    /// Split into the even and the odd part.
    pub fn parity_parts(&self) -> [GradedScalar; 2] {
        let mut even = Self::zero(&self.chart);
        let mut odd = Self::zero(&self.chart);
        for (m, rf) in &self.terms {
            if m.count_ones() % 2 == 0 {
                even.terms.insert(*m, rf.clone());
            } else {
                odd.terms.insert(*m, rf.clone());
            }
        }
        [even, odd]
    }

    /// Homogeneous components paired with their parity, zero parts skipped.
    pub fn homogeneous_parts(&self) -> Vec<(Parity, GradedScalar)> {
        let [e, o] = self.parity_parts();
        let mut out = Vec::new();
        if !e.is_zero() {
            out.push((Parity::Even, e));
        }
        if !o.is_zero() {
            out.push((Parity::Odd, o));
        }
        out
    }

    fn check_chart(&self, other: &GradedScalar) -> Result<()> {
        if self.chart == other.chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }

    pub fn try_add(&self, other: &GradedScalar) -> Result<GradedScalar> {
        self.check_chart(other)?;
        let mut out = self.clone();
        for (m, rf) in &other.terms {
            out.add_term(*m, rf.clone());
        }
        Ok(out)
    }

    /// Supercommutative product with Koszul signs.
    pub fn try_mul(&self, other: &GradedScalar) -> Result<GradedScalar> {
        self.check_chart(other)?;
        let mut out = Self::zero(&self.chart);
        for (ma, ra) in &self.terms {
            for (mb, rb) in &other.terms {
                if let Some((m, neg)) = grass_mul(*ma, *mb) {
                    let p = ra.mul(rb);
                    out.add_term(m, if neg { p.neg() } else { p });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> GradedScalar {
        if c.is_zero() {
            return Self::zero(&self.chart);
        }
        GradedScalar {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, r)| (*m, r.scale(c))).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> GradedScalar {
        self.scale(&Q::from_integer(BigInt::from(n)))
    }

    /// Multiply by `-1` when `negate` is set.
    pub fn signed(&self, negate: bool) -> GradedScalar {
        if negate {
            -self
        } else {
            self.clone()
        }
    }

    pub fn mul_ratfunc(&self, rf: &RatFunc) -> GradedScalar {
        Self::from_terms(&self.chart, self.terms.iter().map(|(m, r)| (*m, r.mul(rf))))
    }

    /// Left partial derivative with respect to coordinate `i`.
    pub fn partial(&self, i: usize) -> GradedScalar {
        let c = self.chart.coord(i);
        let mut out = Self::zero(&self.chart);
        match c.parity {
            Parity::Even => {
                for (m, rf) in &self.terms {
                    out.add_term(*m, rf.derivative(c.slot));
                }
            }
            Parity::Odd => {
                for (m, rf) in &self.terms {
                    if let Some((m2, neg)) = grass_left_derivative(*m, c.slot) {
                        out.add_term(m2, if neg { rf.neg() } else { rf.clone() });
                    }
                }
            }
        }
        out
    }

    pub fn partial_named(&self, name: &str) -> Result<GradedScalar> {
        Ok(self.partial(self.chart.index_of(name)?))
    }

    /// Inverse via body inversion and the terminating nilpotent series.
    pub fn inverse(&self) -> Result<GradedScalar> {
        let body = self.body();
        let body_inv = body.inv().ok_or(Error::ZeroBody)?;
        let chart = &self.chart;
        let b_inv = Self::from_ratfunc(chart, body_inv);
        let mut nil = self.clone();
        nil.terms.remove(&0);
        if nil.is_zero() {
            return Ok(b_inv);
        }
        // u = n b^{-1}; inverse = b^{-1} Σ (-u)^k
        let minus_u = -(&nil * &b_inv);
        let mut sum = Self::one(chart);
        let mut power = Self::one(chart);
        loop {
            power = &power * &minus_u;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(&b_inv * &sum)
    }

    pub fn pow(&self, e: i32) -> Result<GradedScalar> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one(&self.chart);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Split a polynomial scalar by total degree (even exponents plus
    /// Grassmann length). `None` if some coefficient has a denominator.
    pub fn total_degree_parts(&self) -> Option<BTreeMap<u32, GradedScalar>> {
        let mut out: BTreeMap<u32, GradedScalar> = BTreeMap::new();
        for (m, rf) in &self.terms {
            if !rf.is_polynomial() {
                return None;
            }
            for (mono, c) in rf.num().terms() {
                let d = mono.iter().sum::<u32>() + m.count_ones();
                out.entry(d)
                    .or_insert_with(|| Self::zero(&self.chart))
                    .add_term(
                        *m,
                        RatFunc::from_poly(Poly::monomial(mono.clone(), c.clone())),
                    );
            }
        }
        Some(out)
    }

    /// Berezin integral over a purely odd chart with the normalization
    /// `∫ ξ_1 ξ_2 … ξ_n Dξ = 1` (chart order). `None` if the chart has even
    /// coordinates.
    pub fn berezin_integral(&self) -> Option<Q> {
        if !self.chart.is_purely_odd() {
            return None;
        }
        let top: GrassMono = if self.chart.n_odd() == 32 {
            u32::MAX
        } else {
            (1u32 << self.chart.n_odd()) - 1
        };
        Some(self.coefficient(top).as_constant().unwrap_or_else(Q::zero))
    }

    /// Substitute `images[i]` (scalars over `target`) for coordinate `i`.
    pub fn substitute(&self, images: &[GradedScalar], target: &Chart) -> Result<GradedScalar> {
        if images.len() != self.chart.dim() {
            return Err(Error::Dimension(alloc::format!(
                "{} images for {} coordinates",
                images.len(),
                self.chart.dim()
            )));
        }
        if images.iter().any(|g| g.chart != *target) {
            return Err(Error::ChartMismatch);
        }
        let mut subst = Substitution::new(&self.chart, images, target);
        let mut out = Self::zero(target);
        for (m, rf) in &self.terms {
            let mut val = subst.eval_ratfunc(rf)?;
            let mut rest = *m;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                val = &val * &images[self.chart.odd_index(s)];
            }
            out = &out + &val;
        }
        Ok(out)
    }

    /// Move to another chart, sending even slot `i` to `even_map[i]` and odd
    /// slot `i` to `odd_map[i]`. `odd_map` must be increasing so no sign
    /// arises.
    pub fn reindex(&self, chart: &Chart, even_map: &[usize], odd_map: &[usize]) -> GradedScalar {
        debug_assert!(odd_map.windows(2).all(|w| w[0] < w[1]));
        let n = chart.n_even();
        let mut out = Self::zero(chart);
        for (m, rf) in &self.terms {
            let mut m2 = 0u32;
            let mut rest = *m;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                m2 |= 1 << odd_map[s];
            }
            let rf2 = RatFunc::new(rf.num().reindex(n, even_map), rf.den().reindex(n, even_map));
            out.add_term(m2, rf2);
        }
        out
    }

    fn format_terms(&self) -> Vec<(bool, String)> {
        let names = self.chart.even_names();
        let mut items = Vec::new();
        for (m, rf) in &self.terms {
            let mut grass: Vec<&str> = Vec::new();
            let mut rest = *m;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                grass.push(self.chart.coord(self.chart.odd_index(s)).name.as_str());
            }
            if rf.is_polynomial() {
                for (mono, c) in rf.num().terms().rev() {
                    let mut factors: Vec<String> = Vec::new();
                    for (v, &e) in mono.iter().enumerate() {
                        match e {
                            0 => {}
                            1 => factors.push(String::from(names[v])),
                            _ => factors.push(alloc::format!("{}^{}", names[v], e)),
                        }
                    }
                    factors.extend(grass.iter().map(|g| String::from(*g)));
                    let a = c.abs();
                    let s = if factors.is_empty() {
                        alloc::format!("{}", a)
                    } else if a.is_one() {
                        factors.join("*")
                    } else {
                        alloc::format!("{}*{}", a, factors.join("*"))
                    };
                    items.push((c.is_negative(), s));
                }
            } else {
                let mut s = rf.format_with(&names);
                for g in &grass {
                    s.push('*');
                    s.push_str(g);
                }
                items.push((false, s));
            }
        }
        items
    }
}

struct Substitution<'a> {
    source: &'a Chart,
    images: &'a [GradedScalar],
    target: &'a Chart,
    powers: Vec<Vec<GradedScalar>>,
}

impl<'a> Substitution<'a> {
    fn new(source: &'a Chart, images: &'a [GradedScalar], target: &'a Chart) -> Self {
        let powers = (0..source.n_even())
            .map(|_| vec![GradedScalar::one(target)])
            .collect();
        Substitution {
            source,
            images,
            target,
            powers,
        }
    }

    fn power(&mut self, slot: usize, e: u32) -> GradedScalar {
        let e = e as usize;
        while self.powers[slot].len() <= e {
            let last = self.powers[slot].last().unwrap().clone();
            let img = &self.images[self.source.even_index(slot)];
            self.powers[slot].push(&last * img);
        }
        self.powers[slot][e].clone()
    }

    fn eval_poly(&mut self, p: &Poly) -> GradedScalar {
        let mut out = GradedScalar::zero(self.target);
        for (mono, c) in p.terms() {
            let mut t = GradedScalar::constant(self.target, c.clone());
            for (slot, &e) in mono.iter().enumerate() {
                if e > 0 {
                    t = &t * &self.power(slot, e);
                }
            }
            out = &out + &t;
        }
        out
    }

    fn eval_ratfunc(&mut self, rf: &RatFunc) -> Result<GradedScalar> {
        let num = self.eval_poly(rf.num());
        if rf.den().is_one() {
            return Ok(num);
        }
        let den = self.eval_poly(rf.den());
        Ok(&num * &den.inverse()?)
    }
}

impl<'a> Add<&'a GradedScalar> for &'a GradedScalar {
    type Output = GradedScalar;
    fn add(self, rhs: &GradedScalar) -> GradedScalar {
        self.try_add(rhs).expect("chart mismatch in addition")
    }
}

impl<'a> Sub<&'a GradedScalar> for &'a GradedScalar {
    type Output = GradedScalar;
    fn sub(self, rhs: &GradedScalar) -> GradedScalar {
        self.try_add(&-rhs).expect("chart mismatch in subtraction")
    }
}

impl<'a> Mul<&'a GradedScalar> for &'a GradedScalar {
    type Output = GradedScalar;
    fn mul(self, rhs: &GradedScalar) -> GradedScalar {
        self.try_mul(rhs).expect("chart mismatch in multiplication")
    }
}

impl Neg for &GradedScalar {
    type Output = GradedScalar;
    fn neg(self) -> GradedScalar {
        GradedScalar {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, r)| (*m, r.neg())).collect(),
        }
    }
}

impl Neg for GradedScalar {
    type Output = GradedScalar;
    fn neg(self) -> GradedScalar {
        -&self
    }
}

impl fmt::Debug for GradedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedScalar({self})")
    }
}

impl fmt::Display for GradedScalar {
    /// Prints in the expression grammar accepted by the manifest parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items = self.format_terms();
        if items.is_empty() {
            return f.write_str("0");
        }
        for (i, (neg, s)) in items.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{s}")?,
                (0, false) => f.write_str(s)?,
                (_, true) => write!(f, " - {s}")?,
                (_, false) => write!(f, " + {s}")?,
            }
        }
        Ok(())
    }
}
