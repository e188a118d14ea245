use alloc::format;
use alloc::vec::Vec;

use super::MomentumPolynomial;
use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::graded::{q, Chart, GradedScalar, Parity};

/// A symmetric bi-derivation of parity `ε`, given by its components
/// `S^{ab} = {x^a, x^b}`.
///
/// Symmetry rule: `S^{ab} = (−1)^{ãb̃} S^{ba}`, and `S^{ab}` has parity
/// `ã + b̃ + ε`. Evaluation is `{f,g} = S^{ab} ∂_b f ∂_a g (−1)^{ãf̃}`; with
/// these conventions `{g,f} = (−1)^{f̃g̃} {f,g}` for every parity `ε`.
#[derive(Clone, PartialEq, Debug)]
pub struct Bracket {
    chart: Chart,
    parity: Parity,
    comps: Vec<Vec<GradedScalar>>,
}

impl Bracket {
    pub fn new(chart: &Chart, parity: Parity, comps: Vec<Vec<GradedScalar>>) -> Result<Self> {
        let n = chart.dim();
        if comps.len() != n || comps.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "bracket needs {n}x{n} components"
            )));
        }
        for a in 0..n {
            for b in 0..n {
                let s = &comps[a][b];
                if s.chart() != chart {
                    return Err(Error::ChartMismatch);
                }
                let want = chart.parity(a) + chart.parity(b) + parity;
                if !s.has_parity(want) {
                    return Err(Error::ParityMismatch {
                        expected: want,
                        found: format!(
                            "S^{{{},{}}} = {}",
                            chart.coord(a).name,
                            chart.coord(b).name,
                            s
                        ),
                    });
                }
                let mirrored = comps[b][a].signed(chart.parity(a).sign_with(chart.parity(b)));
                if *s != mirrored {
                    return Err(Error::Precondition(format!(
                        "S^{{{a},{b}}} = {} breaks the graded symmetry",
                        s,
                        a = chart.coord(a).name,
                        b = chart.coord(b).name
                    )));
                }
            }
        }
        Ok(Bracket {
            chart: chart.clone(),
            parity,
            comps,
        })
    }

    pub fn zero(chart: &Chart, parity: Parity) -> Self {
        let n = chart.dim();
        Bracket {
            chart: chart.clone(),
            parity,
            comps: alloc::vec![alloc::vec![GradedScalar::zero(chart); n]; n],
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn component(&self, a: usize, b: usize) -> &GradedScalar {
        &self.comps[a][b]
    }

    pub fn components(&self) -> &[Vec<GradedScalar>] {
        &self.comps
    }

    /// `{f, g}` from the components.
    pub fn eval(&self, f: &GradedScalar, g: &GradedScalar) -> Result<GradedScalar> {
        if f.chart() != &self.chart || g.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        let n = self.chart.dim();
        let dg: Vec<GradedScalar> = (0..n).map(|a| g.partial(a)).collect();
        let mut out = GradedScalar::zero(&self.chart);
        for (fp, part) in f.homogeneous_parts() {
            for b in 0..n {
                let dfb = part.partial(b);
                if dfb.is_zero() {
                    continue;
                }
                for a in 0..n {
                    if self.comps[a][b].is_zero() || dg[a].is_zero() {
                        continue;
                    }
                    let t = &(&self.comps[a][b] * &dfb) * &dg[a];
                    out = &out + &t.signed(self.chart.parity(a).sign_with(fp));
                }
            }
        }
        Ok(out)
    }

    /// `½ S^{ab} p_b p_a`.
    pub fn to_symbol(&self) -> MomentumPolynomial {
        let c = &self.chart;
        let mut acc = MomentumPolynomial::zero(c);
        for a in 0..c.dim() {
            for b in 0..c.dim() {
                if self.comps[a][b].is_zero() {
                    continue;
                }
                let t = &(&MomentumPolynomial::from_function(&self.comps[a][b])
                    * &MomentumPolynomial::momentum(c, b))
                    * &MomentumPolynomial::momentum(c, a);
                acc = &acc + &t;
            }
        }
        acc.scale(&q(1, 2))
    }

    /// Read `S^{ab}` off a quadratic Hamiltonian `½ S^{ab} p_b p_a`.
    ///
    /// For a normal-form term `c p_u p_v`: `S^{vu} = c` and `S^{uv} =
    /// (−1)^{ũṽ} c` when `u ≠ v`, and `S^{uu} = 2c` for even `u`.
    pub fn from_symbol(sym: &MomentumPolynomial, parity: Parity) -> Result<Self> {
        let c = sym.base();
        let n = c.dim();
        let mut comps = alloc::vec![alloc::vec![GradedScalar::zero(c); n]; n];
        for (idx, coef) in sym.components() {
            if idx.order() != 2 {
                return Err(Error::Precondition(format!(
                    "symbol term of momentum degree {}",
                    idx.order()
                )));
            }
            let w = idx.word(c);
            let (u, v) = (w[0], w[1]);
            if u == v {
                comps[u][u] = coef.scale_int(2);
            } else {
                comps[v][u] = coef.clone();
                comps[u][v] = coef.signed(c.parity(u).sign_with(c.parity(v)));
            }
        }
        Bracket::new(c, parity, comps)
    }
}

/// `Δ(fg) − (Δf)g − (−1)^{εf̃} f(Δg) + Δ(1)fg`.
pub fn bracket_combination(
    d: &DiffOperator,
    f: &GradedScalar,
    g: &GradedScalar,
) -> Result<GradedScalar> {
    let r = d.zeroth_order_coefficient();
    let dg = d.apply(g)?;
    let mut out = GradedScalar::zero(d.chart());
    for (fp, part) in f.homogeneous_parts() {
        let fg = &part * g;
        let t = &(&d.apply(&fg)? - &(&d.apply(&part)? * g))
            - &(&part * &dg).signed(d.parity().sign_with(fp));
        out = &out + &(&t + &(&r * &fg));
    }
    Ok(out)
}

/// Search small monomials for `f, g, h` violating
/// `{f, gh} = {f,g}h + (−1)^{(f̃+ε)g̃} g{f,h}`.
fn biderivation_witness(d: &DiffOperator) -> Result<Option<[GradedScalar; 3]>> {
    let c = d.chart();
    let coords: Vec<GradedScalar> = (0..c.dim()).map(|i| GradedScalar::coord(c, i)).collect();
    let mut probes = coords.clone();
    for i in 0..coords.len() {
        for j in i..coords.len() {
            let m = &coords[i] * &coords[j];
            if !m.is_zero() {
                probes.push(m);
            }
        }
    }
    for f in &probes {
        let fp = f.parity().unwrap_or(Parity::Even);
        for g in &probes {
            let gp = g.parity().unwrap_or(Parity::Even);
            for h in &probes {
                let lhs = bracket_combination(d, f, &(g * h))?;
                let rhs = &(&bracket_combination(d, f, g)? * h)
                    + &(g * &bracket_combination(d, f, h)?).signed((fp + d.parity()).sign_with(gp));
                if lhs != rhs {
                    return Ok(Some([f.clone(), g.clone(), h.clone()]));
                }
            }
        }
    }
    Ok(None)
}

/// The bracket generated by `d`, with `S^{ab} = {x^a, x^b}` evaluated
/// through the defining combination.
pub fn bracket_from_operator(d: &DiffOperator) -> Result<Bracket> {
    let ord = d.order();
    if ord > 2 {
        return Err(match biderivation_witness(d)? {
            Some([f, g, h]) => Error::NotBiderivation {
                order: ord,
                witness: format!("f = {f}, g = {g}, h = {h}"),
            },
            None => Error::OrderTooHigh { found: ord, max: 2 },
        });
    }
    let c = d.chart();
    let coords: Vec<GradedScalar> = (0..c.dim()).map(|i| GradedScalar::coord(c, i)).collect();
    let comps = coords
        .iter()
        .map(|xa| {
            coords
                .iter()
                .map(|xb| bracket_combination(d, xa, xb))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Bracket::new(c, d.parity(), comps)
}

fn require_order_two(d: &DiffOperator) -> Result<()> {
    if d.order() > 2 {
        Err(Error::OrderTooHigh {
            found: d.order(),
            max: 2,
        })
    } else {
        Ok(())
    }
}

/// `½ S^{ab} p_b p_a`: the order-two part with `∂` replaced by `p`.
pub fn principal_symbol(d: &DiffOperator) -> Result<MomentumPolynomial> {
    require_order_two(d)?;
    let top = d.part_of_order(2);
    Ok(MomentumPolynomial::from_components(d.chart(), top.terms()))
}

/// `γ^a = ∂_b S^{ba} (−1)^{b̃(ε+1)} − 2T^a`.
pub fn subprincipal_components(d: &DiffOperator) -> Result<Vec<GradedScalar>> {
    require_order_two(d)?;
    let c = d.chart();
    let s = Bracket::from_symbol(&principal_symbol(d)?, d.parity())?;
    let eps1 = d.parity() + Parity::Odd;
    Ok((0..c.dim())
        .map(|a| {
            let mut g = d.first_order_coefficient(a).scale_int(-2);
            for b in 0..c.dim() {
                g = &g
                    + &s.component(b, a)
                        .partial(b)
                        .signed(c.parity(b).sign_with(eps1));
            }
            g
        })
        .collect())
}

/// `γ = γ^a p_a`.
pub fn subprincipal_symbol(d: &DiffOperator) -> Result<MomentumPolynomial> {
    Ok(MomentumPolynomial::linear(
        d.chart(),
        &subprincipal_components(d)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn chart() -> Chart {
        Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap()
    }

    fn dd(c: &Chart, a: usize, b: usize) -> DiffOperator {
        DiffOperator::partial(c, a)
            .compose(&DiffOperator::partial(c, b))
            .unwrap()
    }

    #[test]
    fn half_laplacian_bracket() {
        let c = chart();
        let d = dd(&c, 0, 0).scale(&q(1, 2));
        let br = bracket_from_operator(&d).unwrap();
        assert!(br.component(0, 0).is_one());
        let x = GradedScalar::coord(&c, 0);
        assert!(bracket_combination(&d, &GradedScalar::one(&c), &x)
            .unwrap()
            .is_zero());
        assert_eq!(principal_symbol(&d).unwrap().to_string(), "1/2*p[x]^2");
    }

    #[test]
    fn odd_laplacian_bracket() {
        let c = chart();
        let d = dd(&c, 0, 1);
        let br = bracket_from_operator(&d).unwrap();
        assert!(br.component(0, 1).is_one());
        assert!(br.component(1, 0).is_one());
        assert!(br.component(0, 0).is_zero());
        assert!(br.component(1, 1).is_zero());
        assert_eq!(principal_symbol(&d).unwrap().to_string(), "p[x]*p[xi]");
        assert_eq!(
            Bracket::from_symbol(&principal_symbol(&d).unwrap(), Parity::Odd).unwrap(),
            br
        );
        assert_eq!(br.to_symbol(), principal_symbol(&d).unwrap());
    }

    #[test]
    fn subprincipal_examples() {
        let c = Chart::new(&[("x", Parity::Even)]).unwrap();
        let x = GradedScalar::coord(&c, 0);
        let dx = DiffOperator::partial(&c, 0);
        let d = &dd(&c, 0, 0).scale(&q(1, 2)) + &dx.left_mul_scalar(&x).unwrap();
        assert_eq!(subprincipal_symbol(&d).unwrap().to_string(), "-2*x*p[x]");
        // ½(f ∂² + f' ∂) with f = x³ + 1
        let f = &(&(&x * &x) * &x) + &GradedScalar::one(&c);
        let d = &dd(&c, 0, 0).left_mul_scalar(&f).unwrap()
            + &dx.left_mul_scalar(&f.partial(0)).unwrap();
        assert!(subprincipal_symbol(&d.scale(&q(1, 2))).unwrap().is_zero());
    }

    #[test]
    fn third_order_operator_has_a_witness() {
        let c = chart();
        let d = dd(&c, 0, 0).compose(&DiffOperator::partial(&c, 0)).unwrap();
        assert!(matches!(
            bracket_from_operator(&d),
            Err(Error::NotBiderivation { order: 3, .. })
        ));
    }
}
