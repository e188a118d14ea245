//! Seedable generators of random polynomial objects for property checks.

use alloc::vec::Vec;

use rand::Rng;

use crate::density::ExtendedBracketData;
use crate::diffop::{DerivIndex, DiffOperator};
use crate::graded::{Chart, CoordinateChange, GradedScalar, Parity, Poly, RatFunc, Q};
use crate::symbol::Bracket;

/// Shape parameters for random polynomials.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_degree: u32,
    pub max_terms: usize,
    pub max_coeff: i64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_degree: 2,
            max_terms: 3,
            max_coeff: 3,
        }
    }
}

fn random_coeff<R: Rng + ?Sized>(rng: &mut R, max: i64) -> Q {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-max..=max);
    }
    let d = if rng.gen_bool(0.25) { 2 } else { 1 };
    Q::new(n.into(), d.into())
}

fn random_mask<R: Rng + ?Sized>(rng: &mut R, n_odd: usize, parity: Option<Parity>) -> Option<u32> {
    let all = if n_odd == 0 {
        0
    } else {
        rng.gen_range(0..(1u32 << n_odd))
    };
    match parity {
        None => Some(all),
        Some(p) if Parity::from_bit(all.count_ones()) == p => Some(all),
        Some(p) => {
            if n_odd == 0 {
                return None;
            }
            Some(all ^ (1 << rng.gen_range(0..n_odd)))
                .filter(|m| Parity::from_bit(m.count_ones()) == p)
        }
    }
}

/// A random polynomial scalar, homogeneous of `parity` when given. May be
/// zero (always zero when an odd parity is asked of a purely even chart).
pub fn random_scalar<R: Rng + ?Sized>(
    rng: &mut R,
    chart: &Chart,
    parity: Option<Parity>,
    shape: Shape,
) -> GradedScalar {
    let ne = chart.n_even();
    let mut acc = GradedScalar::zero(chart);
    let terms = rng.gen_range(0..=shape.max_terms);
    for _ in 0..terms {
        let Some(mask) = random_mask(rng, chart.n_odd(), parity) else {
            continue;
        };
        let budget = shape.max_degree.saturating_sub(mask.count_ones());
        let mut exps = alloc::vec![0u32; ne];
        if ne > 0 && budget > 0 {
            let deg = rng.gen_range(0..=budget);
            for _ in 0..deg {
                exps[rng.gen_range(0..ne)] += 1;
            }
        }
        let rf = RatFunc::from_poly(Poly::monomial(exps, random_coeff(rng, shape.max_coeff)));
        acc = &acc + &GradedScalar::from_terms(chart, [(mask, rf)]);
    }
    acc
}

/// Every derivative index of order at most `max_order`.
pub fn all_indices(chart: &Chart, max_order: usize) -> Vec<DerivIndex> {
    let mut out = Vec::new();
    let ne = chart.n_even();
    let n_masks = 1u32 << chart.n_odd();
    let mut exps = alloc::vec![0u32; ne];
    fn rec(
        exps: &mut Vec<u32>,
        i: usize,
        left: usize,
        n_masks: u32,
        max_order: usize,
        out: &mut Vec<DerivIndex>,
    ) {
        if i == exps.len() {
            for mask in 0..n_masks {
                let idx = DerivIndex {
                    even: exps.clone(),
                    odd: mask,
                };
                if idx.order() <= max_order {
                    out.push(idx);
                }
            }
            return;
        }
        for e in 0..=left {
            exps[i] = e as u32;
            rec(exps, i + 1, left - e, n_masks, max_order, out);
        }
        exps[i] = 0;
    }
    rec(&mut exps, 0, max_order, n_masks, max_order, &mut out);
    out.sort();
    out
}

/// A random homogeneous operator of order at most `max_order`.
pub fn random_operator<R: Rng + ?Sized>(
    rng: &mut R,
    chart: &Chart,
    parity: Parity,
    max_order: usize,
    shape: Shape,
) -> DiffOperator {
    let mut terms: Vec<(DerivIndex, GradedScalar)> = Vec::new();
    for idx in all_indices(chart, max_order) {
        if rng.gen_bool(0.6) {
            let c = random_scalar(rng, chart, Some(parity + idx.parity()), shape);
            terms.push((idx, c));
        }
    }
    DiffOperator::from_terms(chart, parity, terms).expect("generated terms are well formed")
}

/// A random bracket of parity `parity` with polynomial components.
pub fn random_bracket<R: Rng + ?Sized>(
    rng: &mut R,
    chart: &Chart,
    parity: Parity,
    shape: Shape,
) -> Bracket {
    let n = chart.dim();
    let mut comps = alloc::vec![alloc::vec![GradedScalar::zero(chart); n]; n];
    for a in 0..n {
        for b in a..n {
            let (pa, pb) = (chart.parity(a), chart.parity(b));
            if a == b && pa.is_odd() {
                continue;
            }
            let s = random_scalar(rng, chart, Some(pa + pb + parity), shape);
            comps[b][a] = s.signed(pa.sign_with(pb));
            comps[a][b] = s;
        }
    }
    Bracket::new(chart, parity, comps).expect("generated bracket is graded symmetric")
}

/// Random `(S, γ, θ)`.
pub fn random_data<R: Rng + ?Sized>(
    rng: &mut R,
    chart: &Chart,
    parity: Parity,
    shape: Shape,
) -> ExtendedBracketData {
    let s = random_bracket(rng, chart, parity, shape);
    let gamma = (0..chart.dim())
        .map(|a| random_scalar(rng, chart, Some(chart.parity(a) + parity), shape))
        .collect();
    let theta = random_scalar(rng, chart, Some(parity), shape);
    ExtendedBracketData::new(s, gamma, theta).expect("generated data has consistent parities")
}

/// A random invertible polynomial change of coordinates `x'^a = c_a x^a +
/// (perturbation)`. Perturbations are filtered so that the body of the
/// Jacobian is triangular with nonzero diagonal; nilpotent mixing of even
/// and odd coordinates is unrestricted.
pub fn random_change<R: Rng + ?Sized>(
    rng: &mut R,
    source: &Chart,
    target: &Chart,
    shape: Shape,
) -> CoordinateChange {
    let forward: Vec<GradedScalar> = (0..source.dim())
        .map(|a| {
            let p = source.parity(a);
            let lead = GradedScalar::coord(source, a).scale(&random_coeff(rng, 2));
            let pert = random_scalar(rng, source, Some(p), shape);
            &lead + &triangular_part(&pert, source.coord(a).slot, p)
        })
        .collect();
    CoordinateChange::new(source, target, forward, None).expect("triangular change is invertible")
}

/// Keep the terms of a perturbation of the coordinate in `slot` whose
/// derivatives cannot put a body on or above the Jacobian diagonal.
fn triangular_part(f: &GradedScalar, slot: usize, parity: Parity) -> GradedScalar {
    let chart = f.chart();
    let mut terms = Vec::new();
    for (m, rf) in f.terms() {
        match (parity, m.count_ones()) {
            (Parity::Even, 0) => {
                let kept = rf
                    .num()
                    .terms()
                    .filter(|(mono, _)| mono[slot..].iter().all(|&e| e == 0))
                    .fold(Poly::zero(chart.n_even()), |acc, (mono, c)| {
                        acc.add(&Poly::monomial(mono.clone(), c.clone()))
                    });
                terms.push((*m, RatFunc::new(kept, rf.den().clone())));
            }
            (Parity::Odd, 1) if m.trailing_zeros() as usize >= slot => {}
            _ => terms.push((*m, rf.clone())),
        }
    }
    GradedScalar::from_terms(chart, terms)
}
