use alloc::vec::Vec;

use super::{bracket_from_operator, subprincipal_components, Bracket, MomentumPolynomial};
use crate::density::DensityElement;
use crate::diffop::{op_pullback, DiffOperator};
use crate::error::{Error, Result};
use crate::graded::{CoordinateChange, GradedScalar, Q};

/// `∇^a ρ = S^{ab} ∂_b ρ + γ^a ρ` for a density `ρ` of pure weight one.
pub fn upper_connection_derivative(
    s: &Bracket,
    gamma: &MomentumPolynomial,
    rho: &DensityElement,
) -> Result<Vec<GradedScalar>> {
    let c = s.chart();
    if gamma.base() != c || rho.chart() != c {
        return Err(Error::ChartMismatch);
    }
    let one = Q::from_integer(1.into());
    let r = match rho.pure_weight() {
        Some(w) if w == one => rho.component(&one),
        None if rho.is_zero() => GradedScalar::zero(c),
        _ => return Err(Error::WrongWeight { expected: one }),
    };
    let g = gamma.linear_components();
    let dr: Vec<GradedScalar> = (0..c.dim()).map(|b| r.partial(b)).collect();
    Ok((0..c.dim())
        .map(|a| {
            let mut acc = &g[a] * &r;
            for (b, drb) in dr.iter().enumerate() {
                acc = &acc + &(s.component(a, b) * drb);
            }
            acc
        })
        .collect())
}

/// Both sides of the transformation law for `γ`, in source coordinates.
#[derive(Clone, PartialEq, Debug)]
pub struct ConnectionLawCertificate {
    /// `γ^{a'}` computed in the target chart, then rewritten over the source.
    pub direct: Vec<GradedScalar>,
    /// `(γ^a + S^{ab} ∂_b ln J) ∂_a x^{a'}` from the pulled-back operator.
    pub law: Vec<GradedScalar>,
    /// `S^{a'b'}` rewritten over the source, against `{x^{a'}, x^{b'}}` in
    /// the source bracket.
    pub tensor_law_holds: bool,
}

impl ConnectionLawCertificate {
    pub fn holds(&self) -> bool {
        self.tensor_law_holds && self.direct == self.law
    }

    pub fn difference(&self) -> Vec<GradedScalar> {
        self.direct
            .iter()
            .zip(&self.law)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Compare `γ` of `d` (over `change.target()`) with the law applied to the
/// pulled-back operator. `∂_b ln J` is `(∂_b J) J⁻¹`.
pub fn verify_connection_law(
    d: &DiffOperator,
    change: &CoordinateChange,
) -> Result<ConnectionLawCertificate> {
    let src = change.source();
    let tgt = change.target();
    let direct = subprincipal_components(d)?
        .iter()
        .map(|g| change.pull(g))
        .collect::<Result<Vec<_>>>()?;
    let d_src = op_pullback(d, change)?;
    let s_src = bracket_from_operator(&d_src)?;
    let gamma_src = subprincipal_components(&d_src)?;
    let log_j = change.log_derivative()?;
    let shifted: Vec<GradedScalar> = (0..src.dim())
        .map(|a| {
            let mut acc = gamma_src[a].clone();
            for (b, l) in log_j.iter().enumerate() {
                acc = &acc + &(s_src.component(a, b) * l);
            }
            acc
        })
        .collect();
    let jac = change.jacobian();
    let law = (0..tgt.dim())
        .map(|ap| {
            let mut acc = GradedScalar::zero(src);
            for (a, sh) in shifted.iter().enumerate() {
                acc = &acc + &(sh * jac.get(a, ap));
            }
            acc
        })
        .collect();
    let s_tgt = bracket_from_operator(d)?;
    let images = change.forward();
    let mut tensor_law_holds = true;
    'outer: for ap in 0..tgt.dim() {
        for bp in 0..tgt.dim() {
            if change.pull(s_tgt.component(ap, bp))? != s_src.eval(&images[ap], &images[bp])? {
                tensor_law_holds = false;
                break 'outer;
            }
        }
    }
    Ok(ConnectionLawCertificate {
        direct,
        law,
        tensor_law_holds,
    })
}
