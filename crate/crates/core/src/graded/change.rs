use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::chart::Chart;
use super::matrix::SuperMatrix;
use super::scalar::GradedScalar;
use crate::error::{Error, Result};

/// A change of coordinates `x ↦ x'(x)` from `source` to `target`.
///
/// `forward[a']` expresses target coordinate `a'` over the source chart.
/// The inverse `x(x')` is optional: many polynomial changes (`x' = x³`)
/// have no rational inverse. When given, it is checked on construction.
///
/// The Jacobian has rows indexed by source coordinates and columns by
/// target coordinates: `J[a][a'] = ∂_a x^{a'}` (left derivatives). With
/// this layout the chain rule reads `∂_a F = Σ J[a][a'] · ∂_{a'} f`.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    source: Chart,
    target: Chart,
    forward: Vec<GradedScalar>,
    inverse: Option<Vec<GradedScalar>>,
    jacobian: SuperMatrix,
    jacobian_inv: SuperMatrix,
}

impl CoordinateChange {
    pub fn new(
        source: &Chart,
        target: &Chart,
        forward: Vec<GradedScalar>,
        inverse: Option<Vec<GradedScalar>>,
    ) -> Result<Self> {
        if source.n_even() != target.n_even() || source.n_odd() != target.n_odd() {
            return Err(Error::Dimension(format!(
                "change from {} to {}",
                source.signature(),
                target.signature()
            )));
        }
        if forward.len() != target.dim() {
            return Err(Error::Dimension(format!(
                "{} images for {} coordinates",
                forward.len(),
                target.dim()
            )));
        }
        for (i, f) in forward.iter().enumerate() {
            if f.chart() != source {
                return Err(Error::ChartMismatch);
            }
            if !f.has_parity(target.parity(i)) {
                return Err(Error::ParityMismatch {
                    expected: target.parity(i),
                    found: format!("{} for {}", f, target.coord(i).name),
                });
            }
        }
        let entries = (0..source.dim())
            .map(|a| forward.iter().map(|f| f.partial(a)).collect())
            .collect();
        let rows = source.coords().iter().map(|c| c.parity).collect();
        let cols = target.coords().iter().map(|c| c.parity).collect();
        let jacobian = SuperMatrix::new(source, rows, cols, entries)?;
        let jacobian_inv = jacobian.inverse()?;
        if let Some(inv) = &inverse {
            if inv.len() != source.dim() {
                return Err(Error::Dimension(format!(
                    "{} inverse images for {} coordinates",
                    inv.len(),
                    source.dim()
                )));
            }
            for (a, g) in inv.iter().enumerate() {
                if g.chart() != target {
                    return Err(Error::ChartMismatch);
                }
                let back = g.substitute(&forward, source)?;
                if back != GradedScalar::coord(source, a) {
                    return Err(Error::InverseMismatch(format!(
                        "{} maps back to {}",
                        source.coord(a).name,
                        back
                    )));
                }
            }
        }
        Ok(CoordinateChange {
            source: source.clone(),
            target: target.clone(),
            forward,
            inverse,
            jacobian,
            jacobian_inv,
        })
    }

    pub fn identity(chart: &Chart) -> Self {
        let images: Vec<GradedScalar> = (0..chart.dim())
            .map(|i| GradedScalar::coord(chart, i))
            .collect();
        Self::new(chart, chart, images.clone(), Some(images)).expect("identity change")
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn forward(&self) -> &[GradedScalar] {
        &self.forward
    }

    pub fn inverse_images(&self) -> Option<&[GradedScalar]> {
        self.inverse.as_deref()
    }

    /// `f(x')` rewritten as a function of the source coordinates.
    pub fn pull(&self, f: &GradedScalar) -> Result<GradedScalar> {
        if f.chart() != &self.target {
            return Err(Error::ChartMismatch);
        }
        f.substitute(&self.forward, &self.source)
    }

    pub fn jacobian(&self) -> &SuperMatrix {
        &self.jacobian
    }

    /// `K` with `K · J = 1`: rows indexed by target, columns by source, so
    /// that `∂_{a'} = Σ_a K[a'][a] ∂_a`.
    pub fn jacobian_inverse(&self) -> &SuperMatrix {
        &self.jacobian_inv
    }

    /// `Ber(∂x'/∂x)` as a function of the source coordinates.
    pub fn berezinian(&self) -> Result<GradedScalar> {
        self.jacobian.berezinian()
    }

    /// `L_a = (∂_a J) J⁻¹` with `J` the Berezinian, one entry per source
    /// coordinate.
    pub fn log_derivative(&self) -> Result<Vec<GradedScalar>> {
        let j = self.berezinian()?;
        let j_inv = j.inverse()?;
        Ok((0..self.source.dim())
            .map(|a| &j.partial(a) * &j_inv)
            .collect())
    }

    /// Compose with a second change `target → next`.
    pub fn then(&self, next: &CoordinateChange) -> Result<CoordinateChange> {
        if next.source != self.target {
            return Err(Error::ChartMismatch);
        }
        let forward = next
            .forward
            .iter()
            .map(|f| self.pull(f))
            .collect::<Result<Vec<_>>>()?;
        let inverse = match (&self.inverse, &next.inverse) {
            (Some(a), Some(b)) => Some(
                a.iter()
                    .map(|g| g.substitute(b, &next.target))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        CoordinateChange::new(&self.source, &next.target, forward, inverse)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .forward
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{} = {}", self.target.coord(i).name, f))
            .collect();
        parts.join(", ")
    }
}
