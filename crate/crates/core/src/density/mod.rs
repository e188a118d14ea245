//! The algebra of densities of rational weights, written as generating
//! functions `ψ(x,t) = Σ t^w ψ_w(x)`, and weight-zero brackets on it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graded::{Chart, GradedScalar, Parity, Q};
use crate::symbol::{Bracket, MomentumPolynomial};

/// A finite sum `Σ t^w ψ_w` of densities; `t` tracks the weight.
#[derive(Clone, PartialEq, Debug)]
pub struct DensityElement {
    chart: Chart,
    terms: BTreeMap<Q, GradedScalar>,
}

impl DensityElement {
    pub fn zero(chart: &Chart) -> Self {
        DensityElement {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(chart: &Chart) -> Self {
        Self::pure(Q::zero(), GradedScalar::one(chart))
    }

    /// `t^w f`.
    pub fn pure(w: Q, f: GradedScalar) -> Self {
        let mut d = Self::zero(f.chart());
        d.add_term(w, f);
        d
    }

    pub fn from_terms(
        chart: &Chart,
        terms: impl IntoIterator<Item = (Q, GradedScalar)>,
    ) -> Result<Self> {
        let mut d = Self::zero(chart);
        for (w, f) in terms {
            if f.chart() != chart {
                return Err(Error::ChartMismatch);
            }
            d.add_term(w, f);
        }
        Ok(d)
    }

    fn add_term(&mut self, w: Q, f: GradedScalar) {
        if f.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&w) {
            Some(old) => &old + &f,
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(w, sum);
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `t^w`.
    pub fn component(&self, w: &Q) -> GradedScalar {
        self.terms
            .get(w)
            .cloned()
            .unwrap_or_else(|| GradedScalar::zero(&self.chart))
    }

    /// The support, sorted by weight.
    pub fn weight_decompose(&self) -> Vec<(Q, GradedScalar)> {
        self.terms
            .iter()
            .map(|(w, f)| (w.clone(), f.clone()))
            .collect()
    }

    /// The weight when exactly one weight occurs.
    pub fn pure_weight(&self) -> Option<Q> {
        match self.terms.len() {
            1 => self.terms.keys().next().cloned(),
            _ => None,
        }
    }

    /// Parity when every coefficient has the same parity.
    pub fn parity(&self) -> Option<Parity> {
        let mut ps = self.terms.values().map(|f| f.parity());
        let first = match ps.next() {
            None => return Some(Parity::Even),
            Some(p) => p?,
        };
        ps.all(|p| p == Some(first)).then_some(first)
    }

    /// Split into the even and the odd part.
    pub fn parity_parts(&self) -> [DensityElement; 2] {
        let mut even = Self::zero(&self.chart);
        let mut odd = Self::zero(&self.chart);
        for (w, f) in &self.terms {
            let [e, o] = f.parity_parts();
            even.add_term(w.clone(), e);
            odd.add_term(w.clone(), o);
        }
        [even, odd]
    }

    pub fn try_add(&self, other: &DensityElement) -> Result<DensityElement> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch);
        }
        let mut out = self.clone();
        for (w, f) in &other.terms {
            out.add_term(w.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> DensityElement {
        DensityElement {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(w, f)| (w.clone(), -f)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> DensityElement {
        let mut out = Self::zero(&self.chart);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), f.scale(c));
        }
        out
    }

    /// Product with weights adding.
    pub fn mul(&self, other: &DensityElement) -> Result<DensityElement> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch);
        }
        let mut out = Self::zero(&self.chart);
        for (u, f) in &self.terms {
            for (v, g) in &other.terms {
                out.add_term(u + v, f * g);
            }
        }
        Ok(out)
    }
}

/// Product in the algebra of densities.
pub fn dens_mul(a: &DensityElement, b: &DensityElement) -> Result<DensityElement> {
    a.mul(b)
}

impl fmt::Display for DensityElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                if w.is_zero() {
                    format!("({})", c)
                } else if c.is_one() {
                    format!("t^{{{}}}", w)
                } else {
                    format!("t^{{{}}}*({})", w, c)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `⟨ψ, χ⟩`: the weight-one integrand `Σ_w ψ_w χ_{1−w}` and, on purely
/// odd charts, its Berezin integral.
#[derive(Clone, PartialEq, Debug)]
pub struct ScalarProduct {
    pub integrand: GradedScalar,
    pub berezin: Option<Q>,
}

pub fn dens_scalar_product(a: &DensityElement, b: &DensityElement) -> Result<ScalarProduct> {
    if a.chart != b.chart {
        return Err(Error::ChartMismatch);
    }
    let one = Q::one();
    let mut integrand = GradedScalar::zero(&a.chart);
    for (w, f) in &a.terms {
        if let Some(g) = b.terms.get(&(&one - w)) {
            integrand = &integrand + &(f * g);
        }
    }
    let berezin = integrand.berezin_integral();
    Ok(ScalarProduct { integrand, berezin })
}

/// Data `(S, γ, θ)` of a weight-zero bracket on densities: the matrix
/// `[[S^{ab}, tγ^a], [tγ^a, t²θ]]` on the extended chart `(x, t)`.
#[derive(Clone, PartialEq, Debug)]
pub struct ExtendedBracketData {
    pub s: Bracket,
    pub gamma: Vec<GradedScalar>,
    pub theta: GradedScalar,
}

impl ExtendedBracketData {
    pub fn new(s: Bracket, gamma: Vec<GradedScalar>, theta: GradedScalar) -> Result<Self> {
        let c = s.chart().clone();
        let eps = s.parity();
        if gamma.len() != c.dim() {
            return Err(Error::Dimension(format!(
                "{} connection components for {} coordinates",
                gamma.len(),
                c.dim()
            )));
        }
        for (a, g) in gamma.iter().enumerate() {
            if g.chart() != &c {
                return Err(Error::ChartMismatch);
            }
            if !g.has_parity(c.parity(a) + eps) {
                return Err(Error::ParityMismatch {
                    expected: c.parity(a) + eps,
                    found: format!("gamma^{} = {}", c.coord(a).name, g),
                });
            }
        }
        if theta.chart() != &c {
            return Err(Error::ChartMismatch);
        }
        if !theta.has_parity(eps) {
            return Err(Error::ParityMismatch {
                expected: eps,
                found: format!("theta = {}", theta),
            });
        }
        Ok(ExtendedBracketData { s, gamma, theta })
    }

    pub fn chart(&self) -> &Chart {
        self.s.chart()
    }

    pub fn parity(&self) -> Parity {
        self.s.parity()
    }

    /// `S = ½ S^{ab} p_b p_a`.
    pub fn s_symbol(&self) -> MomentumPolynomial {
        self.s.to_symbol()
    }

    /// `γ = γ^a p_a`.
    pub fn gamma_symbol(&self) -> MomentumPolynomial {
        MomentumPolynomial::linear(self.chart(), &self.gamma)
    }

    pub fn theta_symbol(&self) -> MomentumPolynomial {
        MomentumPolynomial::from_function(&self.theta)
    }
}

/// The bracket on densities defined by `(S, γ, θ)`. On `t^u f`, `t^v g`:
///
/// `t^{u+v} ( {f,g}_S + u γ^a f ∂_a g (−1)^{ãf̃} + v γ^b ∂_b f g + uv θ f g )`.
pub fn densities_bracket(
    data: &ExtendedBracketData,
    a: &DensityElement,
    b: &DensityElement,
) -> Result<DensityElement> {
    let c = data.chart();
    if a.chart() != c || b.chart() != c {
        return Err(Error::ChartMismatch);
    }
    let n = c.dim();
    let mut out = DensityElement::zero(c);
    for (v, g) in &b.terms {
        let dg: Vec<GradedScalar> = (0..n).map(|i| g.partial(i)).collect();
        for (u, f_all) in &a.terms {
            let mut val = data.s.eval(f_all, g)?;
            for (fp, f) in f_all.homogeneous_parts() {
                if !u.is_zero() {
                    let mut t = GradedScalar::zero(c);
                    for i in 0..n {
                        t = &t
                            + &(&(&data.gamma[i] * &f) * &dg[i]).signed(c.parity(i).sign_with(fp));
                    }
                    val = &val + &t.scale(u);
                }
                if !v.is_zero() {
                    let mut t = GradedScalar::zero(c);
                    for i in 0..n {
                        t = &t + &(&(&data.gamma[i] * &f.partial(i)) * g);
                    }
                    val = &val + &t.scale(v);
                }
            }
            let uv = u * v;
            if !uv.is_zero() {
                val = &val + &(&(&data.theta * f_all) * g).scale(&uv);
            }
            out.add_term(u + v, val);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::q;
    use alloc::string::ToString;

    fn chart() -> Chart {
        Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap()
    }

    #[test]
    fn products_add_weights() {
        let c = chart();
        let x = GradedScalar::coord(&c, 0);
        let xi = GradedScalar::coord(&c, 1);
        let a =
            DensityElement::from_terms(&c, [(q(0, 1), x.clone()), (q(1, 1), xi.clone())]).unwrap();
        let b = DensityElement::pure(q(0, 1), x.clone());
        let got = dens_mul(&a, &b).unwrap();
        assert_eq!(
            got.weight_decompose(),
            alloc::vec![(q(0, 1), &x * &x), (q(1, 1), &x * &xi)]
        );
        let h = DensityElement::pure(q(1, 2), x.clone());
        assert_eq!(dens_mul(&h, &h).unwrap().pure_weight(), Some(q(1, 1)));
        assert_eq!(dens_mul(&DensityElement::one(&c), &a).unwrap(), a);
        assert_eq!(a.to_string(), "(x) + t^{1}*(xi)");
    }

    #[test]
    fn residue_pairs_complementary_weights() {
        let c = Chart::new(&[("xi", Parity::Odd)]).unwrap();
        let xi = GradedScalar::coord(&c, 0);
        let zero_w = DensityElement::pure(q(0, 1), xi.clone());
        assert!(dens_scalar_product(&zero_w, &zero_w)
            .unwrap()
            .integrand
            .is_zero());
        let a = DensityElement::pure(q(1, 2), xi);
        let b = DensityElement::pure(q(1, 2), GradedScalar::one(&c));
        assert_eq!(dens_scalar_product(&a, &b).unwrap().berezin, Some(q(1, 1)));
    }

    #[test]
    fn extended_corner_entries() {
        let c = Chart::new(&[("x", Parity::Even)]).unwrap();
        let x = GradedScalar::coord(&c, 0);
        let s = Bracket::new(&c, Parity::Even, alloc::vec![alloc::vec![&x * &x]]).unwrap();
        let data = ExtendedBracketData::new(s, alloc::vec![x.clone()], x.scale_int(5)).unwrap();
        let fx = DensityElement::pure(q(0, 1), x.clone());
        assert_eq!(
            densities_bracket(&data, &fx, &fx).unwrap(),
            DensityElement::pure(q(0, 1), &x * &x)
        );
        let t = DensityElement::pure(q(1, 1), GradedScalar::one(&c));
        assert_eq!(
            densities_bracket(&data, &t, &t).unwrap(),
            DensityElement::pure(q(2, 1), x.scale_int(5))
        );
        assert_eq!(
            densities_bracket(&data, &fx, &t).unwrap(),
            DensityElement::pure(q(1, 1), x.clone())
        );
    }
}
