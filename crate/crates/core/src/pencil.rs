//! Quadratic operator pencils `Δ_w = Δ_0 + wA + w²B` on densities.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::density::ExtendedBracketData;
use crate::diffop::{formal_adjoint, op_pullback, DiffOperator, WeightedOperator};
use crate::error::{Error, Result};
use crate::graded::{q, Chart, CoordinateChange, GradedScalar, Parity, Q};
use crate::symbol::{bracket_from_operator, Bracket};

/// Probe weights that determine a quadratic pencil.
pub fn probe_weights() -> [Q; 3] {
    [q(0, 1), q(1, 2), q(2, 1)]
}

#[derive(Clone, PartialEq, Debug)]
pub struct OperatorPencil {
    parity: Parity,
    delta0: DiffOperator,
    a: DiffOperator,
    b: DiffOperator,
}

impl OperatorPencil {
    pub fn new(delta0: DiffOperator, a: DiffOperator, b: DiffOperator) -> Result<Self> {
        if a.chart() != delta0.chart() || b.chart() != delta0.chart() {
            return Err(Error::ChartMismatch);
        }
        for (op, max) in [(&delta0, 2), (&a, 1), (&b, 0)] {
            if op.order() > max {
                return Err(Error::OrderTooHigh {
                    found: op.order(),
                    max,
                });
            }
        }
        let parity = [&delta0, &a, &b]
            .iter()
            .find(|op| !op.is_zero())
            .map_or(delta0.parity(), |op| op.parity());
        for op in [&delta0, &a, &b] {
            if !op.is_zero() && op.parity() != parity {
                return Err(Error::ParityMismatch {
                    expected: parity,
                    found: alloc::format!("{} coefficient", op.parity()),
                });
            }
        }
        let fix = |op: DiffOperator| {
            if op.is_zero() {
                DiffOperator::zero(op.chart(), parity)
            } else {
                op
            }
        };
        Ok(OperatorPencil {
            parity,
            delta0: fix(delta0),
            a: fix(a),
            b: fix(b),
        })
    }

    pub fn zero(chart: &Chart, parity: Parity) -> Self {
        let z = DiffOperator::zero(chart, parity);
        OperatorPencil {
            parity,
            delta0: z.clone(),
            a: z.clone(),
            b: z,
        }
    }

    pub fn chart(&self) -> &Chart {
        self.delta0.chart()
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn delta0(&self) -> &DiffOperator {
        &self.delta0
    }

    pub fn a(&self) -> &DiffOperator {
        &self.a
    }

    pub fn b(&self) -> &DiffOperator {
        &self.b
    }

    /// `Δ_0 + wA + w²B`.
    pub fn at(&self, w: &Q) -> DiffOperator {
        &(&self.delta0 + &self.a.scale(w)) + &self.b.scale(&(w * w))
    }

    pub fn specialize(&self, w: &Q) -> WeightedOperator {
        WeightedOperator::new(self.at(w), w.clone())
    }
}

/// `½ S^{ab} ∂_b ∂_a`.
pub fn second_order_part(s: &Bracket) -> Result<DiffOperator> {
    let c = s.chart();
    let mut out = DiffOperator::zero(c, s.parity());
    for a in 0..c.dim() {
        for b in 0..c.dim() {
            let sab = s.component(a, b);
            if sab.is_zero() {
                continue;
            }
            let dd = DiffOperator::partial(c, b).compose(&DiffOperator::partial(c, a))?;
            out = out.try_add(&dd.left_mul_scalar(sab)?)?;
        }
    }
    Ok(out.scale(&q(1, 2)))
}

/// `Σ_b ∂_b S^{ba} (−1)^{b̃(ε+1)}`, one entry per `a`.
pub fn bracket_divergence(s: &Bracket) -> Vec<GradedScalar> {
    let c = s.chart();
    let eps1 = s.parity() + Parity::Odd;
    (0..c.dim())
        .map(|a| {
            (0..c.dim()).fold(GradedScalar::zero(c), |acc, b| {
                &acc + &s
                    .component(b, a)
                    .partial(b)
                    .signed(c.parity(b).sign_with(eps1))
            })
        })
        .collect()
}

/// `Σ_a ∂_a v^a (−1)^{ã(ε+1)}`.
fn vector_divergence(c: &Chart, eps: Parity, v: &[GradedScalar]) -> GradedScalar {
    let eps1 = eps + Parity::Odd;
    v.iter()
        .enumerate()
        .fold(GradedScalar::zero(c), |acc, (a, va)| {
            &acc + &va.partial(a).signed(c.parity(a).sign_with(eps1))
        })
}

fn first_order(c: &Chart, eps: Parity, v: &[GradedScalar]) -> Result<DiffOperator> {
    let mut out = DiffOperator::zero(c, eps);
    for (a, va) in v.iter().enumerate() {
        if !va.is_zero() {
            out = out.try_add(&DiffOperator::partial(c, a).left_mul_scalar(va)?)?;
        }
    }
    Ok(out)
}

/// The canonical pencil of `(S, γ, θ)`:
///
/// `Δ_w = ½(S^{ab}∂_b∂_a + (∂_bS^{ba}(−1)^{b̃(ε+1)} + (2w−1)γ^a)∂_a
///        + w ∂_aγ^a (−1)^{ã(ε+1)} + w(w−1)θ)`.
pub fn canonical_pencil(data: &ExtendedBracketData) -> Result<OperatorPencil> {
    let c = data.chart();
    let eps = data.parity();
    let half = q(1, 2);
    let div_s = bracket_divergence(&data.s);
    let t0: Vec<GradedScalar> = div_s
        .iter()
        .zip(&data.gamma)
        .map(|(d, g)| (d - g).scale(&half))
        .collect();
    let delta0 = second_order_part(&data.s)?.try_add(&first_order(c, eps, &t0)?)?;
    let r_a = &vector_divergence(c, eps, &data.gamma) - &data.theta;
    let a = first_order(c, eps, &data.gamma)?
        .try_add(&DiffOperator::multiplication(&r_a.scale(&half))?)?;
    let b = DiffOperator::multiplication(&data.theta.scale(&half))?;
    OperatorPencil::new(delta0, a, b)
}

/// Defects `(Δ_w)* − Δ_{1−w}` at the probe weights.
#[derive(Clone, PartialEq, Debug)]
pub struct SelfAdjointCertificate {
    pub defects: Vec<(Q, DiffOperator)>,
}

impl SelfAdjointCertificate {
    pub fn holds(&self) -> bool {
        self.defects.iter().all(|(_, d)| d.is_zero())
    }
}

pub fn check_selfadjoint(p: &OperatorPencil) -> Result<SelfAdjointCertificate> {
    let one = Q::one();
    let defects = probe_weights()
        .into_iter()
        .map(|w| {
            let adj = formal_adjoint(&p.at(&w))?;
            let other = p.at(&(&one - &w));
            Ok((w, adj.try_add(&-other)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelfAdjointCertificate { defects })
}

/// Recover `(S, γ, θ)` from an operator on `w0`-densities, inverting the
/// canonical pencil formula. Needs `w0 ∉ {0, ½, 1}`.
pub fn pencil_from_operator(d: &DiffOperator, w0: &Q) -> Result<ExtendedBracketData> {
    let one = Q::one();
    if w0.is_zero() || *w0 == one || *w0 == q(1, 2) {
        return Err(Error::SingularWeight(w0.clone()));
    }
    let s = bracket_from_operator(d)?;
    let c = d.chart();
    let eps = d.parity();
    let div_s = bracket_divergence(&s);
    let k = (w0 + w0 - &one).recip();
    let gamma: Vec<GradedScalar> = (0..c.dim())
        .map(|a| (&d.first_order_coefficient(a).scale_int(2) - &div_s[a]).scale(&k))
        .collect();
    let r = d.zeroth_order_coefficient();
    let m = (w0 * (w0 - &one)).recip();
    let theta = (&r.scale_int(2) - &vector_divergence(c, eps, &gamma).scale(w0)).scale(&m);
    ExtendedBracketData::new(s, gamma, theta)
}

/// `Δ` with every `∂_a` replaced by `∂_a − w L_a`, returned as the
/// coefficients of `w⁰, w¹, …`.
fn twist_by_log(d: &DiffOperator, log: &[GradedScalar]) -> Result<Vec<DiffOperator>> {
    let c = d.chart();
    let mut out: Vec<DiffOperator> = Vec::new();
    let shifts = log
        .iter()
        .map(|l| DiffOperator::multiplication(&-l))
        .collect::<Result<Vec<_>>>()?;
    for (idx, coef) in d.terms() {
        let mut acc = alloc::vec![DiffOperator::multiplication(coef)?];
        for u in idx.word(c) {
            let mut next =
                alloc::vec![DiffOperator::zero(c, acc[0].parity() + c.parity(u)); acc.len() + 1];
            for (k, op) in acc.iter().enumerate() {
                next[k] = next[k].try_add(&op.compose(&DiffOperator::partial(c, u))?)?;
                next[k + 1] = next[k + 1].try_add(&op.compose(&shifts[u])?)?;
            }
            acc = next;
        }
        for (k, op) in acc.into_iter().enumerate() {
            if out.len() <= k {
                out.push(DiffOperator::zero(c, d.parity()));
            }
            out[k] = out[k].try_add(&op)?;
        }
    }
    Ok(out)
}

/// Rewrite a pencil on the target chart in source coordinates. The
/// specialization at `w` acts on `w`-densities, so it is conjugated by
/// `J^w` with `J` the Berezinian: `Δ_src = J^w ∘ pullback(Δ) ∘ J^{−w}`,
/// which amounts to `∂_a ↦ ∂_a − w (∂_a J) J⁻¹`.
pub fn pencil_pullback(p: &OperatorPencil, change: &CoordinateChange) -> Result<OperatorPencil> {
    let log = change.log_derivative()?;
    let parts = [p.delta0(), p.a(), p.b()];
    let src = change.source();
    let mut coeffs = alloc::vec![DiffOperator::zero(src, p.parity()); 3];
    for (shift, op) in parts.iter().enumerate() {
        let pulled = op_pullback(op, change)?;
        for (k, t) in twist_by_log(&pulled, &log)?.into_iter().enumerate() {
            let deg = k + shift;
            if deg > 2 {
                if t.is_zero() {
                    continue;
                }
                return Err(Error::Internal(alloc::format!(
                    "pulled-back pencil has a w^{deg} term"
                )));
            }
            coeffs[deg] = coeffs[deg].try_add(&t)?;
        }
    }
    let [delta0, a, b]: [DiffOperator; 3] = coeffs.try_into().expect("three coefficients");
    OperatorPencil::new(delta0, a, b)
}

/// Rewrite one operator on `w`-densities in source coordinates. Integral
/// weights conjugate by the rational function `J^w` directly; other weights
/// use the logarithmic-derivative substitution at that weight.
pub fn twisted_pullback(
    d: &DiffOperator,
    change: &CoordinateChange,
    w: &Q,
) -> Result<DiffOperator> {
    let pulled = op_pullback(d, change)?;
    if w.is_integer() {
        let n: i32 = i32::try_from(w.to_integer())
            .map_err(|_| Error::Precondition(alloc::format!("weight {w} too large")))?;
        let j = change.berezinian()?;
        let left = DiffOperator::multiplication(&j.pow(n)?)?;
        let right = DiffOperator::multiplication(&j.pow(-n)?)?;
        return left.compose(&pulled)?.compose(&right);
    }
    let log = change.log_derivative()?;
    let mut acc = DiffOperator::zero(change.source(), d.parity());
    let mut wk = Q::one();
    for t in twist_by_log(&pulled, &log)? {
        acc = acc.try_add(&t.scale(&wk))?;
        wk *= w;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Bracket;

    fn line() -> Chart {
        Chart::new(&[("x", Parity::Even)]).unwrap()
    }

    #[test]
    fn constant_symbol_gives_a_constant_pencil() {
        let c = line();
        let s = Bracket::new(
            &c,
            Parity::Even,
            alloc::vec![alloc::vec![GradedScalar::one(&c)]],
        )
        .unwrap();
        let data = ExtendedBracketData::new(
            s,
            alloc::vec![GradedScalar::zero(&c)],
            GradedScalar::zero(&c),
        )
        .unwrap();
        let p = canonical_pencil(&data).unwrap();
        assert!(p.a().is_zero() && p.b().is_zero());
        assert!(check_selfadjoint(&p).unwrap().holds());
    }

    #[test]
    fn one_dimensional_formula() {
        // ½(∂² + (2w−1)g∂ + wg' + w(w−1)h) with g = x², h = x
        let c = line();
        let x = GradedScalar::coord(&c, 0);
        let g = &x * &x;
        let s = Bracket::new(
            &c,
            Parity::Even,
            alloc::vec![alloc::vec![GradedScalar::one(&c)]],
        )
        .unwrap();
        let data = ExtendedBracketData::new(s, alloc::vec![g.clone()], x.clone()).unwrap();
        let p = canonical_pencil(&data).unwrap();
        let dx = DiffOperator::partial(&c, 0);
        for w in [q(0, 1), q(1, 2), q(3, 1), q(-2, 5)] {
            let two_w_1 = &w + &w - Q::one();
            let expect = &(&dx.compose(&dx).unwrap()
                + &dx.left_mul_scalar(&g.scale(&two_w_1)).unwrap())
                + &DiffOperator::multiplication(
                    &(&g.partial(0).scale(&w) + &x.scale(&(&w * (&w - Q::one())))),
                )
                .unwrap();
            assert_eq!(p.at(&w), expect.scale(&q(1, 2)));
        }
        assert!(check_selfadjoint(&p).unwrap().holds());
        assert_eq!(
            pencil_from_operator(&p.at(&q(2, 1)), &q(2, 1)).unwrap(),
            data
        );
    }

    #[test]
    fn singular_weights_are_rejected() {
        let c = line();
        let d = DiffOperator::partial(&c, 0);
        for w in [q(0, 1), q(1, 2), q(1, 1)] {
            assert!(matches!(
                pencil_from_operator(&d, &w),
                Err(Error::SingularWeight(_))
            ));
        }
    }

    #[test]
    fn perturbed_top_coefficient_breaks_selfadjointness() {
        let c = line();
        let mut p = OperatorPencil::zero(&c, Parity::Even);
        p.b = DiffOperator::multiplication(&GradedScalar::int(&c, 3)).unwrap();
        let cert = check_selfadjoint(&p).unwrap();
        // 3(w² − (1−w)²) = 3(2w − 1)
        let expect: Vec<Q> = probe_weights()
            .iter()
            .map(|w| q(3, 1) * (w + w - Q::one()))
            .collect();
        for ((_, defect), e) in cert.defects.iter().zip(expect) {
            assert_eq!(defect.zeroth_order_coefficient().as_constant(), Some(e));
        }
    }

    #[test]
    fn pullback_by_linear_change_at_weight_one() {
        let c = line();
        let t = Chart::new(&[("x'", Parity::Even)]).unwrap();
        let x = GradedScalar::coord(&c, 0);
        let ch = CoordinateChange::new(&c, &t, alloc::vec![x.scale_int(3)], None).unwrap();
        let xp = GradedScalar::coord(&t, 0);
        let s = Bracket::new(&t, Parity::Even, alloc::vec![alloc::vec![&xp * &xp]]).unwrap();
        let data =
            ExtendedBracketData::new(s, alloc::vec![xp.clone()], GradedScalar::int(&t, 1)).unwrap();
        let p = canonical_pencil(&data).unwrap();
        let pulled = pencil_pullback(&p, &ch).unwrap();
        for w in [q(0, 1), q(1, 1), q(2, 1), q(-1, 1), q(1, 2)] {
            assert_eq!(pulled.at(&w), twisted_pullback(&p.at(&w), &ch, &w).unwrap());
        }
        assert_eq!(pulled.at(&q(0, 1)), op_pullback(p.delta0(), &ch).unwrap());
    }
}
