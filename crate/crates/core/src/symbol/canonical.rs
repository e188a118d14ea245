use super::MomentumPolynomial;
use crate::error::{Error, Result};
use crate::graded::{GradedScalar, Parity};

/// The canonical even Poisson bracket on `T*M`:
///
/// `(F,G) = Σ_a (−1)^{ãF̃} [(−1)^{ã} ∂_{p_a}F ∂_{x^a}G − ∂_{x^a}F ∂_{p_a}G]`
///
/// normalized by `(p_a, x^a) = 1` for both parities, which makes the top
/// symbol of a graded commutator the bracket of the top symbols. It is
/// graded antisymmetric, `(G,F) = −(−1)^{F̃G̃}(F,G)`, and satisfies the
/// graded Jacobi identity.
pub fn canonical_bracket(
    h: &MomentumPolynomial,
    k: &MomentumPolynomial,
) -> Result<MomentumPolynomial> {
    if h.base() != k.base() {
        return Err(Error::ChartMismatch);
    }
    let base = h.base();
    let g = k.as_phase();
    let mut out = GradedScalar::zero(base.phase_space());
    for (fp, f) in h.as_phase().homogeneous_parts() {
        for a in 0..base.dim() {
            let pa = base.parity(a);
            let m = base.momentum_of(a);
            let t = &(&f.partial(m) * &g.partial(a)).signed(pa.is_odd())
                - &(&f.partial(a) * &g.partial(m));
            out = &out + &t.signed(pa.sign_with(fp));
        }
    }
    MomentumPolynomial::from_phase(base, out)
}

/// `F = (S, γ)`, together with whether `(S, S) = 0` so that `D = (S, ·)`
/// is a differential.
#[derive(Clone, PartialEq, Debug)]
pub struct Curvature {
    pub value: MomentumPolynomial,
    pub jacobi_ok: bool,
}

pub fn curvature(s: &MomentumPolynomial, gamma: &MomentumPolynomial) -> Result<Curvature> {
    if s.parity() != Some(Parity::Odd) && !s.is_zero() {
        return Err(Error::ExpectedOdd);
    }
    if gamma.degree() > 1 {
        return Err(Error::Precondition(alloc::format!(
            "connection form {} is not linear in momenta",
            gamma
        )));
    }
    let jacobi_ok = canonical_bracket(s, s)?.is_zero();
    Ok(Curvature {
        value: canonical_bracket(s, gamma)?,
        jacobi_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{Chart, Q};
    use alloc::string::ToString;

    #[test]
    fn canonical_pair_and_free_flow() {
        let c = Chart::new(&[("x", Parity::Even)]).unwrap();
        let x = MomentumPolynomial::from_function(&GradedScalar::coord(&c, 0));
        let p = MomentumPolynomial::momentum(&c, 0);
        assert!(canonical_bracket(&p, &x).unwrap().as_phase().is_one());
        assert_eq!(canonical_bracket(&x, &p).unwrap().to_string(), "-1");
        let half_p2 = (&p * &p).scale(&Q::new(1.into(), 2.into()));
        let f = MomentumPolynomial::from_function(&GradedScalar::coord(&c, 0).pow(3).unwrap());
        assert_eq!(
            canonical_bracket(&half_p2, &f).unwrap().to_string(),
            "3*x^2*p[x]"
        );
    }

    #[test]
    fn odd_pair_is_normalized() {
        let c = Chart::new(&[("xi", Parity::Odd)]).unwrap();
        let xi = MomentumPolynomial::from_function(&GradedScalar::coord(&c, 0));
        let p = MomentumPolynomial::momentum(&c, 0);
        assert!(canonical_bracket(&xi, &p).unwrap().as_phase().is_one());
        assert!(canonical_bracket(&p, &xi).unwrap().as_phase().is_one());
    }

    #[test]
    fn constant_odd_symbol_is_jacobi() {
        let c = Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap();
        let s = &MomentumPolynomial::momentum(&c, 0) * &MomentumPolynomial::momentum(&c, 1);
        assert!(canonical_bracket(&s, &s).unwrap().is_zero());
        let zero = MomentumPolynomial::zero(&c);
        assert!(curvature(&s, &zero).unwrap().value.is_zero());
    }
}
