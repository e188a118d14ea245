use alloc::vec::Vec;

use super::DiffOperator;
use crate::error::{Error, Result};
use crate::graded::{CoordinateChange, GradedScalar};

/// Rewrite `d` (over `change.target()`) in the source coordinates, so that
/// `pull(d f) = op_pullback(d)(pull f)`.
///
/// Uses `∂_{a'} = Σ_a K[a'][a] ∂_a` with `K` the inverse Jacobian.
pub fn op_pullback(d: &DiffOperator, change: &CoordinateChange) -> Result<DiffOperator> {
    if d.chart() != change.target() {
        return Err(Error::ChartMismatch);
    }
    let src = change.source();
    let k = change.jacobian_inverse();
    let new_partials: Vec<DiffOperator> = (0..change.target().dim())
        .map(|ap| {
            let mut op = DiffOperator::zero(src, change.target().parity(ap));
            for a in 0..src.dim() {
                let coef = k.get(ap, a);
                if !coef.is_zero() {
                    op = op.try_add(&DiffOperator::partial(src, a).left_mul_scalar(coef)?)?;
                }
            }
            Ok(op)
        })
        .collect::<Result<_>>()?;
    let mut out = DiffOperator::zero(src, d.parity());
    for (idx, c) in d.terms() {
        let mut term = DiffOperator::identity(src);
        for &ap in idx.word(d.chart()).iter().rev() {
            term = new_partials[ap].compose(&term)?;
        }
        let coef: GradedScalar = change.pull(c)?;
        out = out.try_add(&term.left_mul_scalar(&coef)?)?;
    }
    Ok(out)
}
