//! Odd operators: Jacobi identities, flatness, the modular field, effective
//! actions and the master equation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::density::{densities_bracket, DensityElement, ExtendedBracketData};
use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::graded::{q, Chart, GradedScalar, Parity, Poly, RatFunc, SuperMatrix, Q};
use crate::pencil::{canonical_pencil, probe_weights};
use crate::symbol::{
    bracket_combination, bracket_from_operator, canonical_bracket, principal_symbol,
    subprincipal_symbol, Bracket, MomentumPolynomial,
};

/// Total degree bound of the monomials used to test the derivation property.
pub const DERIVATION_DEGREE_BOUND: u32 = 3;

fn require_odd(d: &DiffOperator) -> Result<()> {
    if d.parity().is_odd() {
        Ok(())
    } else {
        Err(Error::ExpectedOdd)
    }
}

/// Top-order part of an operator with `∂` replaced by `p`.
pub fn symbol_of_order(d: &DiffOperator, k: usize) -> MomentumPolynomial {
    MomentumPolynomial::from_components(d.chart(), d.part_of_order(k).terms())
}

#[derive(Clone, PartialEq, Debug)]
pub struct JacobiBaseCertificate {
    pub square_order: usize,
    /// `(S, S)` for `S` the principal symbol.
    pub schouten: MomentumPolynomial,
    pub holds: bool,
}

/// `ord Δ² ≤ 2` against `(S, S) = 0`. The order-three symbol of `Δ²` must
/// equal `½(S, S)`; anything else is reported as an internal error.
pub fn jacobi_check_base(d: &DiffOperator) -> Result<JacobiBaseCertificate> {
    require_odd(d)?;
    let s = principal_symbol(d)?;
    let sq = d.compose(d)?;
    let schouten = canonical_bracket(&s, &s)?;
    if symbol_of_order(&sq, 3) != schouten.scale(&q(1, 2)) {
        return Err(Error::Internal(String::from(
            "order-three symbol of the square is not half the Schouten square",
        )));
    }
    let square_order = sq.order();
    let holds = schouten.is_zero();
    if holds != (square_order <= 2) {
        return Err(Error::Internal(format!(
            "ord Δ² = {square_order} disagrees with (S,S) = {schouten}"
        )));
    }
    Ok(JacobiBaseCertificate {
        square_order,
        schouten,
        holds,
    })
}

/// Every monomial of total degree at most `bound`, including `1`.
pub fn monomials(chart: &Chart, bound: u32) -> Vec<GradedScalar> {
    let mut out = Vec::new();
    let ne = chart.n_even();
    let mut exps = alloc::vec![0u32; ne];
    fn rec(chart: &Chart, exps: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<GradedScalar>) {
        if i == exps.len() {
            for mask in 0u32..(1 << chart.n_odd()) {
                if mask.count_ones() <= left {
                    let rf =
                        RatFunc::from_poly(Poly::monomial(exps.clone(), Q::from_integer(1.into())));
                    out.push(GradedScalar::from_terms(chart, [(mask, rf)]));
                }
            }
            return;
        }
        for e in 0..=left {
            exps[i] = e;
            rec(chart, exps, i + 1, left - e, out);
        }
        exps[i] = 0;
    }
    rec(chart, &mut exps, 0, bound, &mut out);
    out
}

/// `Φ(f,g) = Δ₁{f,g} + {Δ₁f, g} + (−1)^{f̃}{f, Δ₁g}` with `Δ₁ = Δ − Δ(1)`,
/// which vanishes when `Δ₁` is a derivation of the generated bracket.
pub fn derivation_defect(
    d: &DiffOperator,
    f: &GradedScalar,
    g: &GradedScalar,
) -> Result<GradedScalar> {
    let r = d.zeroth_order_coefficient();
    let d1 = d.try_add(&-DiffOperator::multiplication(&r)?)?;
    let mut out = GradedScalar::zero(d.chart());
    for (fp, part) in f.homogeneous_parts() {
        let lhs = d1.apply(&bracket_combination(d, &part, g)?)?;
        let t1 = bracket_combination(d, &d1.apply(&part)?, g)?;
        let t2 = bracket_combination(d, &part, &d1.apply(g)?)?.signed(fp.is_odd());
        out = &out + &(&(&lhs + &t1) + &t2);
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Debug)]
pub struct FlatnessCertificate {
    /// A pair on which the derivation property fails, with the defect.
    pub derivation_witness: Option<(GradedScalar, GradedScalar, GradedScalar)>,
    pub square_order: usize,
    /// `(S, γ)`.
    pub curvature: MomentumPolynomial,
    pub holds: bool,
}

/// The three equivalent forms of flatness for an odd Jacobi operator: the
/// derivation property (on all monomial pairs up to
/// [`DERIVATION_DEGREE_BOUND`] and on `extra_pairs`), `ord Δ² ≤ 1`, and
/// `(S, γ) = 0`. Disagreement is an internal error.
pub fn flatness_check(
    d: &DiffOperator,
    extra_pairs: &[(GradedScalar, GradedScalar)],
) -> Result<FlatnessCertificate> {
    let base = jacobi_check_base(d)?;
    if !base.holds {
        return Err(Error::Precondition(format!(
            "bracket is not Jacobi: (S,S) = {}",
            base.schouten
        )));
    }
    let probes = monomials(d.chart(), DERIVATION_DEGREE_BOUND);
    let pairs = probes
        .iter()
        .flat_map(|f| probes.iter().map(move |g| (f, g)))
        .chain(extra_pairs.iter().map(|(f, g)| (f, g)));
    let mut derivation_witness = None;
    for (f, g) in pairs {
        let defect = derivation_defect(d, f, g)?;
        if !defect.is_zero() {
            derivation_witness = Some((f.clone(), g.clone(), defect));
            break;
        }
    }
    let square_order = d.compose(d)?.order();
    let curvature = canonical_bracket(&principal_symbol(d)?, &subprincipal_symbol(d)?)?;
    let verdicts = [
        derivation_witness.is_none(),
        square_order <= 1,
        curvature.is_zero(),
    ];
    if verdicts.iter().any(|v| *v != verdicts[0]) {
        return Err(Error::Internal(format!(
            "flatness predicates disagree: derivation {}, ord Δ² = {square_order}, (S,γ) = {curvature}",
            verdicts[0]
        )));
    }
    Ok(FlatnessCertificate {
        derivation_witness,
        square_order,
        curvature,
        holds: verdicts[0],
    })
}

/// Jacobiator of an odd bracket on densities,
/// `{a,{b,c}} − (−1)^{ã+1}{{a,b},c} − (−1)^{(ã+1)(b̃+1)}{b,{a,c}}`,
/// for homogeneous `a, b`.
pub fn density_jacobiator(
    data: &ExtendedBracketData,
    a: &DensityElement,
    b: &DensityElement,
    c: &DensityElement,
) -> Result<DensityElement> {
    let pa = a.parity().unwrap_or(Parity::Even);
    let pb = b.parity().unwrap_or(Parity::Even);
    let br = |u: &DensityElement, v: &DensityElement| densities_bracket(data, u, v);
    let lhs = br(a, &br(b, c)?)?;
    let t1 = br(&br(a, b)?, c)?;
    let t2 = br(b, &br(a, c)?)?;
    let t1 = if pa.is_odd() { t1 } else { t1.neg() };
    let t2 = if (pa + Parity::Odd).sign_with(pb + Parity::Odd) {
        t2.neg()
    } else {
        t2
    };
    lhs.try_add(&t1.neg())?.try_add(&t2.neg())
}

/// Coordinates (weight 0) and `t` (weight 1). These generate polynomial
/// densities, and the Jacobiator is a derivation in each slot.
pub fn density_spanning_set(chart: &Chart) -> Vec<DensityElement> {
    let mut gens: Vec<DensityElement> = (0..chart.dim())
        .map(|a| DensityElement::pure(Q::zero(), GradedScalar::coord(chart, a)))
        .collect();
    gens.push(DensityElement::pure(q(1, 1), GradedScalar::one(chart)));
    gens
}

#[derive(Clone, PartialEq, Debug)]
pub struct DensityJacobiCertificate {
    /// `(S,S)`, `(S,γ)`, `(S,θ) + (γ,γ)`, `(γ,θ)`.
    pub residuals: [MomentumPolynomial; 4],
    pub jacobi_witness: Option<[DensityElement; 3]>,
    pub holds: bool,
}

impl DensityJacobiCertificate {
    pub fn failing_equations(&self) -> Vec<usize> {
        (0..4).filter(|&i| !self.residuals[i].is_zero()).collect()
    }
}

/// The four equations on `(S, γ, θ)` against the graded Jacobi identity of
/// the densities bracket on generator triples. Disagreement is an internal
/// error.
pub fn jacobi_check_densities(data: &ExtendedBracketData) -> Result<DensityJacobiCertificate> {
    if !data.parity().is_odd() {
        return Err(Error::ExpectedOdd);
    }
    let s = data.s_symbol();
    let g = data.gamma_symbol();
    let th = data.theta_symbol();
    let b = |x: &MomentumPolynomial, y: &MomentumPolynomial| canonical_bracket(x, y);
    let residuals = [
        b(&s, &s)?,
        b(&s, &g)?,
        (&b(&s, &th)? + &b(&g, &g)?),
        b(&g, &th)?,
    ];
    let equations_hold = residuals.iter().all(|r| r.is_zero());
    let span = density_spanning_set(data.chart());
    let mut jacobi_witness = None;
    'search: for a in &span {
        for bb in &span {
            for c in &span {
                if !density_jacobiator(data, a, bb, c)?.is_zero() {
                    jacobi_witness = Some([a.clone(), bb.clone(), c.clone()]);
                    break 'search;
                }
            }
        }
    }
    if equations_hold != jacobi_witness.is_none() {
        return Err(Error::Internal(String::from(
            "four equations disagree with the Jacobi identity on densities",
        )));
    }
    Ok(DensityJacobiCertificate {
        residuals,
        jacobi_witness,
        holds: equations_hold,
    })
}

/// `X = X^a p_a`, with `Δ_w² = X^a ∂_a + w div X` on `w`-densities.
#[derive(Clone, PartialEq, Debug)]
pub struct ModularField {
    pub x: MomentumPolynomial,
}

impl ModularField {
    pub fn chart(&self) -> &Chart {
        self.x.base()
    }

    pub fn components(&self) -> Vec<GradedScalar> {
        self.x.linear_components()
    }

    /// `div X = Σ_a (−1)^{ã} ∂_a X^a` for even `X`.
    pub fn divergence(&self) -> GradedScalar {
        let c = self.chart();
        self.components()
            .iter()
            .enumerate()
            .fold(GradedScalar::zero(c), |acc, (a, xa)| {
                &acc + &xa.partial(a).signed(c.parity(a).is_odd())
            })
    }

    /// The Lie derivative on `w`-densities.
    pub fn lie_derivative(&self, w: &Q) -> Result<DiffOperator> {
        let c = self.chart();
        let mut op = DiffOperator::multiplication(&self.divergence().scale(w))?;
        for (a, xa) in self.components().iter().enumerate() {
            op = op.try_add(&DiffOperator::partial(c, a).left_mul_scalar(xa)?)?;
        }
        Ok(op)
    }
}

/// Square the canonical pencil at the probe weights and read off `X`.
pub fn extract_modular_field(data: &ExtendedBracketData) -> Result<ModularField> {
    let cert = jacobi_check_densities(data)?;
    if !cert.holds {
        return Err(Error::Precondition(format!(
            "Jacobi fails on densities: equations {:?}",
            cert.failing_equations()
        )));
    }
    let p = canonical_pencil(data)?;
    let c = data.chart();
    let sq0 = p.at(&Q::zero()).compose(&p.at(&Q::zero()))?;
    if sq0.order() > 1 || !sq0.zeroth_order_coefficient().is_zero() {
        return Err(Error::Internal(format!(
            "square on functions is not a vector field: {sq0}"
        )));
    }
    let comps: Vec<GradedScalar> = (0..c.dim())
        .map(|a| sq0.first_order_coefficient(a))
        .collect();
    let field = ModularField {
        x: MomentumPolynomial::linear(c, &comps),
    };
    for w in probe_weights() {
        let dw = p.at(&w);
        let sq = dw.compose(&dw)?;
        if sq != field.lie_derivative(&w)? {
            return Err(Error::Internal(format!(
                "square at weight {w} is not a Lie derivative: {sq}"
            )));
        }
    }
    if !canonical_bracket(&data.s_symbol(), &field.x)?.is_zero() {
        return Err(Error::Internal(String::from(
            "modular field is not Poisson",
        )));
    }
    Ok(field)
}

/// An odd bracket whose symbol satisfies `(S,S) = 0`.
#[derive(Clone, PartialEq, Debug)]
pub struct OddPoissonStructure {
    s: Bracket,
}

impl OddPoissonStructure {
    pub fn new(s: Bracket) -> Result<Self> {
        if !s.parity().is_odd() {
            return Err(Error::ExpectedOdd);
        }
        let sym = s.to_symbol();
        let ss = canonical_bracket(&sym, &sym)?;
        if !ss.is_zero() {
            return Err(Error::Precondition(format!("(S,S) = {ss}")));
        }
        Ok(OddPoissonStructure { s })
    }

    /// `S^{x_i ξ_i} = S^{ξ_i x_i} = 1` pairing the `i`-th even and odd
    /// coordinates.
    pub fn darboux(chart: &Chart) -> Result<Self> {
        let (ne, no) = (chart.n_even(), chart.n_odd());
        if ne != no {
            return Err(Error::Dimension(format!(
                "{ne}|{no} chart has no Darboux pairing"
            )));
        }
        let evens: Vec<usize> = (0..chart.dim())
            .filter(|&a| !chart.parity(a).is_odd())
            .collect();
        let odds: Vec<usize> = (0..chart.dim())
            .filter(|&a| chart.parity(a).is_odd())
            .collect();
        let n = chart.dim();
        let mut comps = alloc::vec![alloc::vec![GradedScalar::zero(chart); n]; n];
        for (&x, &xi) in evens.iter().zip(&odds) {
            comps[x][xi] = GradedScalar::one(chart);
            comps[xi][x] = GradedScalar::one(chart);
        }
        Self::new(Bracket::new(chart, Parity::Odd, comps)?)
    }

    pub fn bracket(&self) -> &Bracket {
        &self.s
    }

    pub fn chart(&self) -> &Chart {
        self.s.chart()
    }

    fn matrix(&self) -> Result<SuperMatrix> {
        let c = self.chart();
        let rows: Vec<Parity> = (0..c.dim()).map(|a| c.parity(a)).collect();
        let cols: Vec<Parity> = rows.iter().map(|p| *p + Parity::Odd).collect();
        SuperMatrix::new(c, rows, cols, self.s.components().to_vec())
    }

    /// Solve `v^a = S^{ab} u_b` for `u`.
    pub fn lower(&self, upper: &[GradedScalar]) -> Result<Vec<GradedScalar>> {
        self.matrix()?.solve(upper).map_err(|e| match e {
            Error::ZeroBody => Error::Degenerate,
            e => e,
        })
    }

    pub fn raise(&self, lower: &[GradedScalar]) -> Vec<GradedScalar> {
        let c = self.chart();
        (0..c.dim())
            .map(|a| {
                (0..c.dim()).fold(GradedScalar::zero(c), |acc, b| {
                    &acc + &(self.s.component(a, b) * &lower[b])
                })
            })
            .collect()
    }
}

/// An even function `𝒜` standing for the volume form `e^𝒜`, which is never
/// built; only `γ_a = −∂_a 𝒜` is used.
#[derive(Clone, PartialEq, Debug)]
pub struct EffectiveAction {
    a: GradedScalar,
}

impl EffectiveAction {
    pub fn new(a: GradedScalar) -> Result<Self> {
        if !a.has_parity(Parity::Even) {
            return Err(Error::ParityMismatch {
                expected: Parity::Even,
                found: format!("{a}"),
            });
        }
        Ok(EffectiveAction { a })
    }

    pub fn value(&self) -> &GradedScalar {
        &self.a
    }

    pub fn gamma_lower(&self) -> Vec<GradedScalar> {
        (0..self.a.chart().dim())
            .map(|i| -&self.a.partial(i))
            .collect()
    }
}

/// `γ^a = S^{ab} γ_b` and `θ = γ^a γ_a` with `γ_a = −∂_a 𝒜`.
pub fn data_from_action(
    structure: &OddPoissonStructure,
    action: &EffectiveAction,
) -> Result<ExtendedBracketData> {
    if structure.chart() != action.value().chart() {
        return Err(Error::ChartMismatch);
    }
    let lower = action.gamma_lower();
    let upper = structure.raise(&lower);
    let theta = contract(structure.chart(), &upper, &lower);
    ExtendedBracketData::new(structure.s.clone(), upper, theta)
}

fn contract(c: &Chart, upper: &[GradedScalar], lower: &[GradedScalar]) -> GradedScalar {
    upper
        .iter()
        .zip(lower)
        .fold(GradedScalar::zero(c), |acc, (u, l)| &acc + &(u * l))
}

#[derive(Clone, PartialEq, Debug)]
pub struct Reduction {
    pub gamma_lower: Vec<GradedScalar>,
    /// `∂_a γ_b − (−1)^{ãb̃} ∂_b γ_a` vanishes for every pair.
    pub closed: bool,
    /// A polynomial `𝒜` with `γ_a = −∂_a 𝒜`, normalized to vanish at the
    /// origin.
    pub potential: Option<GradedScalar>,
}

/// Lower `γ` through a non-degenerate `S`, check `θ = γ^a γ_a`, and look for
/// a polynomial effective action.
pub fn nondegenerate_reduction(data: &ExtendedBracketData) -> Result<Reduction> {
    let cert = jacobi_check_densities(data)?;
    if !cert.holds {
        return Err(Error::Precondition(format!(
            "Jacobi fails on densities: equations {:?}",
            cert.failing_equations()
        )));
    }
    let c = data.chart();
    let structure = OddPoissonStructure { s: data.s.clone() };
    let gamma_lower = structure.lower(&data.gamma)?;
    let defect = &data.theta - &contract(c, &data.gamma, &gamma_lower);
    if !defect.is_zero() {
        return Err(Error::Internal(format!("θ − γ^a γ_a = {defect}")));
    }
    let closed = (0..c.dim()).all(|a| {
        (0..c.dim()).all(|b| {
            gamma_lower[b].partial(a)
                == gamma_lower[a]
                    .partial(b)
                    .signed(c.parity(a).sign_with(c.parity(b)))
        })
    });
    let potential = if closed {
        euler_potential(c, &gamma_lower)
    } else {
        None
    };
    Ok(Reduction {
        gamma_lower,
        closed,
        potential,
    })
}

/// Invert `γ_a = −∂_a 𝒜` degree by degree: on the part of total degree `k`,
/// `x^a ∂_a 𝒜 = k 𝒜`.
fn euler_potential(c: &Chart, gamma_lower: &[GradedScalar]) -> Option<GradedScalar> {
    let mut euler = GradedScalar::zero(c);
    for (a, g) in gamma_lower.iter().enumerate() {
        euler = &euler - &(&GradedScalar::coord(c, a) * g);
    }
    let parts = euler.total_degree_parts()?;
    let mut pot = GradedScalar::zero(c);
    for (k, part) in parts {
        if k == 0 {
            continue;
        }
        pot = &pot + &part.scale(&Q::new(1.into(), k.into()));
    }
    let ok = gamma_lower
        .iter()
        .enumerate()
        .all(|(a, g)| -&pot.partial(a) == *g);
    ok.then_some(pot)
}

#[derive(Clone, PartialEq, Debug)]
pub struct MasterCertificate {
    pub weight: Q,
    /// `Δ_w²`.
    pub square: DiffOperator,
    /// `σ = e^{−𝒜/2} Δ₀(e^{𝒜/2}) = Δ₀(φ) + ½{φ,φ}` with `φ = 𝒜/2` and `Δ₀`
    /// the operator of `(S, 0, 0)` on half-densities.
    pub scalar_defect: GradedScalar,
    pub holds: bool,
}

/// `Δ_w² = 0` for the pencil of `(S, 𝒜)`, against vanishing of the
/// conjugation scalar `σ`. The reference pencil of `(S, 0, 0)` must square
/// to zero on half-densities, which holds in Darboux coordinates.
pub fn master_equation_check(
    structure: &OddPoissonStructure,
    action: &EffectiveAction,
    w: &Q,
) -> Result<MasterCertificate> {
    let c = structure.chart();
    structure.lower(&alloc::vec![GradedScalar::zero(c); c.dim()])?;
    let flat = ExtendedBracketData::new(
        structure.s.clone(),
        alloc::vec![GradedScalar::zero(c); c.dim()],
        GradedScalar::zero(c),
    )?;
    let half = q(1, 2);
    let k = canonical_pencil(&flat)?.at(&half);
    if !k.compose(&k)?.is_zero() {
        return Err(Error::Precondition(String::from(
            "the reference operator on half-densities does not square to zero",
        )));
    }
    let data = data_from_action(structure, action)?;
    let dw = canonical_pencil(&data)?.at(w);
    let square = dw.compose(&dw)?;
    let phi = action.value().scale(&half);
    let scalar_defect = &k.apply(&phi)? + &bracket_combination(&k, &phi, &phi)?.scale(&half);
    let operator_holds = square.is_zero();
    let scalar_holds = scalar_defect.is_zero();
    if operator_holds != scalar_holds {
        return Err(Error::Internal(format!(
            "Δ² = {square} but σ = {scalar_defect}"
        )));
    }
    Ok(MasterCertificate {
        weight: w.clone(),
        square,
        scalar_defect,
        holds: operator_holds,
    })
}

/// `S` read off a bracket-generating operator, as an odd Poisson structure
/// when it is Jacobi.
pub fn structure_of(d: &DiffOperator) -> Result<OddPoissonStructure> {
    OddPoissonStructure::new(bracket_from_operator(d)?)
}
