//! Formal adjoints with respect to the coordinate volume, by rewriting
//! generator words, together with an explicit total-divergence witness.

use alloc::vec::Vec;

use super::DiffOperator;
use crate::error::{Error, Result};
use crate::graded::{GradedScalar, Parity, Q};

/// An operator read as acting on densities of weight `weight`.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightedOperator {
    pub op: DiffOperator,
    pub weight: Q,
}

impl WeightedOperator {
    pub fn new(op: DiffOperator, weight: Q) -> Self {
        WeightedOperator { op, weight }
    }

    /// `(d on w-densities)* = d* on (1−w)-densities`.
    pub fn formal_adjoint(&self) -> Result<WeightedOperator> {
        Ok(WeightedOperator {
            op: formal_adjoint(&self.op)?,
            weight: Q::from_integer(1.into()) - &self.weight,
        })
    }
}

#[derive(Clone)]
enum Gen {
    Mult(GradedScalar),
    Partial(usize),
}

fn gen_parity(chart: &crate::graded::Chart, g: &Gen) -> Parity {
    match g {
        Gen::Mult(f) => f.parity().unwrap_or(Parity::Even),
        Gen::Partial(a) => chart.parity(*a),
    }
}

/// Generator words `[f, ∂_{w1}, …, ∂_{wk}]`, one per normal-form term.
fn words(d: &DiffOperator) -> Vec<Vec<Gen>> {
    d.terms()
        .map(|(idx, c)| {
            let mut w = Vec::with_capacity(1 + idx.order());
            w.push(Gen::Mult(c.clone()));
            w.extend(idx.word(d.chart()).into_iter().map(Gen::Partial));
            w
        })
        .collect()
}

fn gen_op(chart: &crate::graded::Chart, g: &Gen) -> DiffOperator {
    match g {
        Gen::Mult(f) => DiffOperator::multiplication(f).expect("homogeneous coefficient"),
        Gen::Partial(a) => DiffOperator::partial(chart, *a),
    }
}

fn word_op(chart: &crate::graded::Chart, w: &[Gen]) -> Result<DiffOperator> {
    let mut acc = DiffOperator::identity(chart);
    for g in w.iter().rev() {
        acc = gen_op(chart, g).compose(&acc)?;
    }
    Ok(acc)
}

fn word_parity(chart: &crate::graded::Chart, w: &[Gen]) -> Parity {
    w.iter().fold(Parity::Even, |p, g| p + gen_parity(chart, g))
}

/// `f* = f`, `∂_a* = −∂_a`, `(XY)* = (−1)^{ε_X ε_Y} Y* X*`.
fn word_adjoint(chart: &crate::graded::Chart, w: &[Gen]) -> Result<DiffOperator> {
    match w {
        [] => Ok(DiffOperator::identity(chart)),
        [Gen::Mult(f)] => DiffOperator::multiplication(f),
        [Gen::Partial(a)] => Ok(-DiffOperator::partial(chart, *a)),
        [x, rest @ ..] => {
            let prod = word_adjoint(chart, rest)?
                .compose(&word_adjoint(chart, core::slice::from_ref(x))?)?;
            Ok(
                if gen_parity(chart, x).sign_with(word_parity(chart, rest)) {
                    -prod
                } else {
                    prod
                },
            )
        }
    }
}

/// Formal adjoint of `d` with respect to the coordinate volume.
pub fn formal_adjoint(d: &DiffOperator) -> Result<DiffOperator> {
    let mut out = DiffOperator::zero(d.chart(), d.parity());
    for w in words(d) {
        out = out.try_add(&word_adjoint(d.chart(), &w)?)?;
    }
    Ok(out)
}

/// `K_{XY}(ψ, χ) = K_X(Yψ, χ) + (−1)^{ε_X(ε_Y + ψ̃)} K_Y(ψ, X*χ)`, with
/// `K_f = 0` and `K_{∂_a}(ψ, χ) = ψχ` in slot `a`.
fn word_flux(
    chart: &crate::graded::Chart,
    w: &[Gen],
    psi: &GradedScalar,
    p: Parity,
    chi: &GradedScalar,
) -> Result<Vec<GradedScalar>> {
    let mut flux = alloc::vec![GradedScalar::zero(chart); chart.dim()];
    match w {
        [] | [Gen::Mult(_)] => {}
        [Gen::Partial(a)] => flux[*a] = psi * chi,
        [x, rest @ ..] => {
            let x1 = core::slice::from_ref(x);
            let y_psi = word_op(chart, rest)?.apply(psi)?;
            let ey = word_parity(chart, rest);
            let first = word_flux(chart, x1, &y_psi, ey + p, chi)?;
            let x_adj_chi = word_adjoint(chart, x1)?.apply(chi)?;
            let second = word_flux(chart, rest, psi, p, &x_adj_chi)?;
            let neg = gen_parity(chart, x).sign_with(ey + p);
            for (i, (f, s)) in first.into_iter().zip(second).enumerate() {
                flux[i] = &f + &s.signed(neg);
            }
        }
    }
    Ok(flux)
}

/// Witness that `(dψ)χ − (−1)^{εψ̃} ψ (d*χ)` is a total divergence.
#[derive(Clone, PartialEq, Debug)]
pub struct DivergenceCertificate {
    /// The integrand `(dψ)χ − (−1)^{εψ̃} ψ (d*χ)`.
    pub integrand: GradedScalar,
    /// `K^a`, one per coordinate.
    pub flux: Vec<GradedScalar>,
}

impl DivergenceCertificate {
    /// `Σ_a ∂_a K^a`.
    pub fn divergence(&self) -> GradedScalar {
        let chart = self.integrand.chart();
        self.flux
            .iter()
            .enumerate()
            .fold(GradedScalar::zero(chart), |acc, (a, k)| {
                &acc + &k.partial(a)
            })
    }

    /// Re-check the witness by differentiation.
    pub fn holds(&self) -> bool {
        self.divergence() == self.integrand
    }
}

/// Build the divergence witness for `d` on test functions `ψ`, `χ`. `ψ` may
/// be inhomogeneous; it is split by parity.
pub fn adjoint_certificate(
    d: &DiffOperator,
    psi: &GradedScalar,
    chi: &GradedScalar,
) -> Result<DivergenceCertificate> {
    let chart = d.chart();
    if psi.chart() != chart || chi.chart() != chart {
        return Err(Error::ChartMismatch);
    }
    let adj = formal_adjoint(d)?;
    let adj_chi = adj.apply(chi)?;
    let mut integrand = GradedScalar::zero(chart);
    let mut flux = alloc::vec![GradedScalar::zero(chart); chart.dim()];
    for (p, part) in psi.homogeneous_parts() {
        let lhs = &d.apply(&part)? * chi;
        let rhs = (&part * &adj_chi).signed(d.parity().sign_with(p));
        integrand = &integrand + &(&lhs - &rhs);
        for w in words(d) {
            for (i, k) in word_flux(chart, &w, &part, p, chi)?.into_iter().enumerate() {
                flux[i] = &flux[i] + &k;
            }
        }
    }
    Ok(DivergenceCertificate { integrand, flux })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{q, Chart};

    fn chart() -> Chart {
        Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap()
    }

    #[test]
    fn derivative_adjoint_flips_sign_and_weight() {
        let c = chart();
        let d = WeightedOperator::new(DiffOperator::partial(&c, 0), q(0, 1));
        let adj = d.formal_adjoint().unwrap();
        assert_eq!(adj.op, -DiffOperator::partial(&c, 0));
        assert_eq!(adj.weight, q(1, 1));
    }

    #[test]
    fn adjoint_is_an_involution_on_a_laplacian() {
        let c = chart();
        let dx = DiffOperator::partial(&c, 0);
        let lap = dx.compose(&dx).unwrap().scale(&q(1, 2));
        let adj = formal_adjoint(&lap).unwrap();
        assert_eq!(adj, lap);
        assert_eq!(formal_adjoint(&adj).unwrap(), lap);
    }

    #[test]
    fn certificate_for_x_dx() {
        let c = chart();
        let x = GradedScalar::coord(&c, 0);
        let xi = GradedScalar::coord(&c, 1);
        let op = DiffOperator::multiplication(&x)
            .unwrap()
            .compose(&DiffOperator::partial(&c, 1))
            .unwrap();
        let psi = &(&x * &x) + &(&x * &xi);
        let chi = &xi + &GradedScalar::int(&c, 3);
        let cert = adjoint_certificate(&op, &psi, &chi).unwrap();
        assert!(cert.holds());
    }
}
