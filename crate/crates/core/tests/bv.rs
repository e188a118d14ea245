use densalg_core::bv::*;
use densalg_core::density::ExtendedBracketData;
use densalg_core::diffop::{op_pullback, DiffOperator};
use densalg_core::pencil::{canonical_pencil, pencil_from_operator, pencil_pullback};
use densalg_core::random::{random_change, random_data, random_operator, random_scalar, Shape};
use densalg_core::symbol::{canonical_bracket, Bracket, MomentumPolynomial};
use densalg_core::{q, Chart, CoordinateChange, Error, GradedScalar, Parity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chart11() -> Chart {
    Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).unwrap()
}

fn chart22() -> Chart {
    Chart::new(&[
        ("x", Parity::Even),
        ("y", Parity::Even),
        ("xi", Parity::Odd),
        ("eta", Parity::Odd),
    ])
    .unwrap()
}

fn chart22_primed() -> Chart {
    Chart::new(&[
        ("x'", Parity::Even),
        ("y'", Parity::Even),
        ("xi'", Parity::Odd),
        ("eta'", Parity::Odd),
    ])
    .unwrap()
}

fn coord(c: &Chart, name: &str) -> GradedScalar {
    let i = c.coords().iter().position(|k| k.name == name).unwrap();
    GradedScalar::coord(c, i)
}

fn prod(fs: &[&GradedScalar]) -> GradedScalar {
    fs.iter()
        .fold(GradedScalar::one(fs[0].chart()), |acc, f| &acc * *f)
}

fn idx(c: &Chart, name: &str) -> usize {
    c.coords().iter().position(|k| k.name == name).unwrap()
}

/// `Σ ∂_{x_i} ∂_{ξ_i}` over the Darboux pairs.
fn odd_laplacian(c: &Chart) -> DiffOperator {
    let evens: Vec<usize> = (0..c.dim()).filter(|&a| !c.parity(a).is_odd()).collect();
    let odds: Vec<usize> = (0..c.dim()).filter(|&a| c.parity(a).is_odd()).collect();
    evens
        .iter()
        .zip(&odds)
        .fold(DiffOperator::zero(c, Parity::Odd), |acc, (&x, &xi)| {
            acc.try_add(
                &DiffOperator::partial(c, x)
                    .compose(&DiffOperator::partial(c, xi))
                    .unwrap(),
            )
            .unwrap()
        })
}

/// `d + f ∂_a`.
fn plus_first(d: &DiffOperator, f: &GradedScalar, a: usize) -> DiffOperator {
    d.try_add(
        &DiffOperator::partial(d.chart(), a)
            .left_mul_scalar(f)
            .unwrap(),
    )
    .unwrap()
}

fn darboux_data(c: &Chart, gamma: Vec<GradedScalar>, theta: GradedScalar) -> ExtendedBracketData {
    ExtendedBracketData::new(
        OddPoissonStructure::darboux(c).unwrap().bracket().clone(),
        gamma,
        theta,
    )
    .unwrap()
}

fn zeros(c: &Chart) -> Vec<GradedScalar> {
    vec![GradedScalar::zero(c); c.dim()]
}

fn random_even(rng: &mut ChaCha8Rng, c: &Chart) -> GradedScalar {
    random_scalar(
        rng,
        c,
        Some(Parity::Even),
        Shape {
            max_degree: 3,
            max_terms: 3,
            max_coeff: 3,
        },
    )
}

/// `γ = (S, σ)` read as components `γ^a`.
fn exact_gamma(c: &Chart, sigma: &GradedScalar) -> Vec<GradedScalar> {
    let s = OddPoissonStructure::darboux(c)
        .unwrap()
        .bracket()
        .to_symbol();
    canonical_bracket(&s, &MomentumPolynomial::from_function(sigma))
        .unwrap()
        .linear_components()
}

/// The even vector field `X` as a derivation of the bracket, checked on
/// monomial pairs without going through the canonical bracket.
fn preserves_bracket(s: &Bracket, x: &[GradedScalar]) -> bool {
    let c = s.chart();
    let apply = |f: &GradedScalar| {
        (0..c.dim()).fold(GradedScalar::zero(c), |acc, a| {
            &acc + &(&x[a] * &f.partial(a))
        })
    };
    let probes = monomials(c, 2);
    probes.iter().all(|f| {
        probes.iter().all(|g| {
            let lhs = apply(&s.eval(f, g).unwrap());
            lhs == &s.eval(&apply(f), g).unwrap() + &s.eval(f, &apply(g)).unwrap()
        })
    })
}

#[test]
fn base_jacobi_fixtures() {
    let c = chart11();
    let lap = odd_laplacian(&c);
    let cert = jacobi_check_base(&lap).unwrap();
    assert!(cert.holds);
    assert!(lap.compose(&lap).unwrap().is_zero());

    // symplectic principal part with any first-order part
    let (x, xi) = (coord(&c, "x"), coord(&c, "xi"));
    let d = plus_first(&plus_first(&lap, &(&x * &xi), 0), &(&x * &x), 1);
    let cert = jacobi_check_base(&d).unwrap();
    assert!(cert.holds);
    assert_eq!(cert.square_order, 2);

    // S = p_x p_xi + x p_y p_eta on R^{2|2}
    let c = chart22();
    let x = coord(&c, "x");
    let (iy, ieta) = (idx(&c, "y"), idx(&c, "eta"));
    let bent = DiffOperator::partial(&c, iy)
        .compose(&DiffOperator::partial(&c, ieta))
        .unwrap()
        .left_mul_scalar(&x)
        .unwrap();
    let d = DiffOperator::partial(&c, 0)
        .compose(&DiffOperator::partial(&c, 2))
        .unwrap()
        .try_add(&bent)
        .unwrap();
    let cert = jacobi_check_base(&d).unwrap();
    assert!(!cert.holds);
    assert_eq!(cert.square_order, 3);
    assert!(!cert.schouten.is_zero());
    assert_eq!(
        symbol_of_order(&d.compose(&d).unwrap(), 3),
        cert.schouten.scale(&q(1, 2))
    );

    let even = DiffOperator::partial(&c, 0)
        .compose(&DiffOperator::partial(&c, 1))
        .unwrap();
    assert_eq!(jacobi_check_base(&even), Err(Error::ExpectedOdd));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn square_of_odd_operator_has_order_at_most_three(seed in any::<u64>(), big in any::<bool>()) {
        let c = if big { chart22() } else { chart11() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_operator(&mut rng, &c, Parity::Odd, 2, Shape::default());
        let cert = jacobi_check_base(&d).unwrap();
        prop_assert!(cert.square_order <= 3);
    }
}

/// Curved by construction: each adds a first-order term whose connection
/// has nonzero `(S, γ)`.
fn curved_fixtures() -> Vec<DiffOperator> {
    let c = chart11();
    let (x, xi) = (coord(&c, "x"), coord(&c, "xi"));
    let lap = odd_laplacian(&c);
    let mut out = vec![
        plus_first(&lap, &xi, 0),
        plus_first(&lap, &(&x * &xi), 0),
        plus_first(&plus_first(&lap, &xi, 0), &(&x * &x), 1),
    ];
    let c = chart22();
    let (x, y, xi, eta) = (
        coord(&c, "x"),
        coord(&c, "y"),
        coord(&c, "xi"),
        coord(&c, "eta"),
    );
    let lap = odd_laplacian(&c);
    out.push(plus_first(&lap, &xi, idx(&c, "y")));
    out.push(plus_first(&lap, &eta, idx(&c, "x")));
    out.push(plus_first(
        &plus_first(&lap, &prod(&[&x, &y, &xi]), 0),
        &y,
        idx(&c, "xi"),
    ));
    out
}

#[test]
fn curved_fixtures_fail_all_three_predicates() {
    for d in curved_fixtures() {
        let cert = flatness_check(&d, &[]).unwrap();
        assert!(!cert.holds, "{d}");
        assert!(cert.derivation_witness.is_some());
        assert!(cert.square_order >= 2);
        assert!(!cert.curvature.is_zero());
    }
}

#[test]
fn flat_fixtures_pass_all_three_predicates() {
    let c = chart11();
    let cert = flatness_check(&odd_laplacian(&c), &[]).unwrap();
    assert!(cert.holds);
    assert_eq!(cert.square_order, 0);

    // exact connection γ = (S, σ)
    let x = coord(&c, "x");
    for sigma in [&x * &x, prod(&[&x, &x, &x])] {
        let data = darboux_data(&c, exact_gamma(&c, &sigma), GradedScalar::zero(&c));
        let d = canonical_pencil(&data).unwrap().at(&q(2, 1));
        assert!(flatness_check(&d, &[]).unwrap().holds, "{d}");
    }
}

#[test]
fn flatness_corpus_agrees_on_every_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut flat, mut curved, mut total) = (0, 0, 0);
    let mut record = |holds: bool| {
        total += 1;
        if holds {
            flat += 1
        } else {
            curved += 1
        }
    };
    for d in curved_fixtures() {
        record(flatness_check(&d, &[]).unwrap().holds);
    }
    for (n, c) in [(12, chart11()), (8, chart22())] {
        for i in 0..n {
            let sigma = random_even(&mut rng, &c);
            let gamma = if i % 2 == 0 {
                exact_gamma(&c, &sigma)
            } else {
                (0..c.dim())
                    .map(|a| {
                        random_scalar(
                            &mut rng,
                            &c,
                            Some(c.parity(a) + Parity::Odd),
                            Shape::default(),
                        )
                    })
                    .collect()
            };
            let theta = random_scalar(&mut rng, &c, Some(Parity::Odd), Shape::default());
            let w = [q(0, 1), q(2, 1), q(-1, 1)][rng.gen_range(0..3)].clone();
            let d = canonical_pencil(&darboux_data(&c, gamma, theta))
                .unwrap()
                .at(&w);
            let f = random_scalar(&mut rng, &c, None, Shape::default());
            let g = random_scalar(&mut rng, &c, None, Shape::default());
            let cert = flatness_check(&d, &[(f, g)]).unwrap();
            if i % 2 == 0 {
                assert!(cert.holds, "{d}");
            }
            record(cert.holds);
        }
    }
    // pullbacks along random changes of R^{1|1}
    let (s, t) = (
        chart11(),
        Chart::new(&[("x'", Parity::Even), ("xi'", Parity::Odd)]).unwrap(),
    );
    for i in 0..8 {
        let ch = random_change(
            &mut rng,
            &s,
            &t,
            Shape {
                max_degree: 2,
                max_terms: 2,
                max_coeff: 2,
            },
        );
        let gamma = if i % 2 == 0 {
            exact_gamma(&t, &random_even(&mut rng, &t))
        } else {
            let xi = coord(&t, "xi'");
            vec![xi.scale_int(rng.gen_range(1..3)), GradedScalar::zero(&t)]
        };
        let d = canonical_pencil(&darboux_data(&t, gamma, GradedScalar::zero(&t)))
            .unwrap()
            .at(&q(0, 1));
        let pulled = op_pullback(&d, &ch).unwrap();
        let cert = flatness_check(&pulled, &[]).unwrap();
        assert_eq!(cert.holds, i % 2 == 0, "{pulled}");
        record(cert.holds);
    }
    assert!(
        total >= 30 && flat >= 5 && curved >= 5,
        "{total} {flat} {curved}"
    );
}

#[test]
fn flatness_requires_jacobi() {
    let c = chart22();
    let x = coord(&c, "x");
    let bent = DiffOperator::partial(&c, 1)
        .compose(&DiffOperator::partial(&c, 3))
        .unwrap()
        .left_mul_scalar(&x)
        .unwrap();
    let d = odd_laplacian(&c).try_add(&bent).unwrap();
    assert!(matches!(
        flatness_check(&d, &[]),
        Err(Error::Precondition(_))
    ));
}

/// `S` Darboux on `R^{1|1}`, `γ = 0`, `θ = ξ`: only `(S,θ) + (γ,γ)` is
/// nonzero.
fn third_equation_counterexample() -> ExtendedBracketData {
    let c = chart11();
    darboux_data(&c, zeros(&c), coord(&c, "xi"))
}

/// Data of `𝒜 = xy + ξη` on Darboux `R^{2|2}`: `(γ,γ) ≠ 0`, balanced by
/// `(S,θ)`.
fn compensated_fixture() -> ExtendedBracketData {
    let c = chart22();
    let (x, y, xi, eta) = (
        coord(&c, "x"),
        coord(&c, "y"),
        coord(&c, "xi"),
        coord(&c, "eta"),
    );
    let act = &(&x * &y) + &(&xi * &eta);
    data_from_action(
        &OddPoissonStructure::darboux(&c).unwrap(),
        &EffectiveAction::new(act).unwrap(),
    )
    .unwrap()
}

#[test]
fn density_jacobi_fixtures() {
    let c = chart11();
    let trivial = darboux_data(&c, zeros(&c), GradedScalar::zero(&c));
    assert!(jacobi_check_densities(&trivial).unwrap().holds);

    let cert = jacobi_check_densities(&third_equation_counterexample()).unwrap();
    assert!(!cert.holds);
    assert_eq!(cert.failing_equations(), vec![2]);
    assert!(cert.jacobi_witness.is_some());
    assert_eq!(cert.residuals[2].to_string(), "p[x]");

    let data = compensated_fixture();
    let g = data.gamma_symbol();
    let gg = canonical_bracket(&g, &g).unwrap();
    assert_eq!(
        gg.to_string(),
        "2*x*p[x] - 2*y*p[y] - 2*xi*p[xi] + 2*eta*p[eta]"
    );
    assert_eq!(
        canonical_bracket(&data.s_symbol(), &data.theta_symbol()).unwrap(),
        -&gg
    );
    let cert = jacobi_check_densities(&data).unwrap();
    assert!(cert.holds);

    let even = random_data(
        &mut ChaCha8Rng::seed_from_u64(1),
        &c,
        Parity::Even,
        Shape::default(),
    );
    assert_eq!(jacobi_check_densities(&even), Err(Error::ExpectedOdd));
}

#[test]
fn density_jacobi_corpus_agrees_on_every_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut corpus = vec![third_equation_counterexample(), compensated_fixture()];
    for c in [chart11(), chart22()] {
        let st = OddPoissonStructure::darboux(&c).unwrap();
        for _ in 0..6 {
            corpus.push(random_data(&mut rng, &c, Parity::Odd, Shape::default()));
            corpus.push(
                data_from_action(
                    &st,
                    &EffectiveAction::new(random_even(&mut rng, &c)).unwrap(),
                )
                .unwrap(),
            );
            corpus.push(darboux_data(
                &c,
                exact_gamma(&c, &random_even(&mut rng, &c)),
                GradedScalar::zero(&c),
            ));
        }
    }
    let mut holding = 0;
    for data in &corpus {
        let cert = jacobi_check_densities(data).unwrap();
        if cert.holds {
            holding += 1;
            let field = extract_modular_field(data).unwrap();
            assert!(canonical_bracket(&data.s_symbol(), &field.x)
                .unwrap()
                .is_zero());
            assert!(preserves_bracket(&data.s, &field.components()));
        } else {
            assert!(cert.jacobi_witness.is_some());
            assert!(matches!(
                extract_modular_field(data),
                Err(Error::Precondition(_))
            ));
        }
    }
    assert!(
        corpus.len() >= 30 && holding >= 10,
        "{} {holding}",
        corpus.len()
    );
}

#[test]
fn modular_field_fixtures() {
    let c = chart11();
    let flat = darboux_data(&c, zeros(&c), GradedScalar::zero(&c));
    assert!(extract_modular_field(&flat).unwrap().x.is_zero());

    // exact γ from an action on R^{1|1}: X cancels and the half-density
    // operator squares to zero
    let x = coord(&c, "x");
    let st = OddPoissonStructure::darboux(&c).unwrap();
    let data = data_from_action(&st, &EffectiveAction::new(prod(&[&x, &x, &x])).unwrap()).unwrap();
    assert!(extract_modular_field(&data).unwrap().x.is_zero());
    let half = canonical_pencil(&data).unwrap().at(&q(1, 2));
    assert!(half.compose(&half).unwrap().is_zero());

    // 𝒜 = xξη on R^{2|2}
    let c = chart22();
    let (x, xi, eta) = (coord(&c, "x"), coord(&c, "xi"), coord(&c, "eta"));
    let st = OddPoissonStructure::darboux(&c).unwrap();
    let data =
        data_from_action(&st, &EffectiveAction::new(prod(&[&x, &xi, &eta])).unwrap()).unwrap();
    let field = extract_modular_field(&data).unwrap();
    assert_eq!(field.x.to_string(), "-1/2*p[y]");
    assert!(preserves_bracket(&data.s, &field.components()));
    assert!(field.divergence().is_zero());
}

/// Pulling the data back along a change with a non-constant Berezinian
/// moves `X` as a vector field and gives it a divergence, which pins the
/// weight term of the Lie derivative.
#[test]
fn modular_field_transforms_as_a_vector_field() {
    let (s, t) = (chart22(), chart22_primed());
    let (x, y, xi, eta) = (
        coord(&s, "x"),
        coord(&s, "y"),
        coord(&s, "xi"),
        coord(&s, "eta"),
    );
    let st = OddPoissonStructure::darboux(&t).unwrap();
    let act = prod(&[&coord(&t, "x'"), &coord(&t, "xi'"), &coord(&t, "eta'")]);
    let data = data_from_action(&st, &EffectiveAction::new(act).unwrap()).unwrap();
    let target_field = extract_modular_field(&data).unwrap();
    let forward = vec![
        &x + &prod(&[&x, &x, &y]),
        &y + &(&y * &y),
        xi.clone(),
        &eta + &(&x * &xi),
    ];
    let ch = CoordinateChange::new(&s, &t, forward, None).unwrap();
    let pulled = pencil_pullback(&canonical_pencil(&data).unwrap(), &ch).unwrap();
    let source_data = pencil_from_operator(&pulled.at(&q(2, 1)), &q(2, 1)).unwrap();
    let field = extract_modular_field(&source_data).unwrap();
    // X^a = Σ_{a'} X'^{a'} K[a'][a], K the inverse Jacobian
    let k = ch.jacobian_inverse();
    let comps = target_field.components();
    for a in 0..s.dim() {
        let expect = (0..t.dim()).fold(GradedScalar::zero(&s), |acc, ap| {
            &acc + &(&ch.pull(&comps[ap]).unwrap() * k.get(ap, a))
        });
        assert_eq!(field.components()[a], expect);
    }
    assert!(!field.divergence().is_zero());
}

#[test]
fn reduction_fixtures() {
    let c = chart11();
    let red =
        nondegenerate_reduction(&darboux_data(&c, zeros(&c), GradedScalar::zero(&c))).unwrap();
    assert!(red.gamma_lower.iter().all(|g| g.is_zero()));
    assert_eq!(red.potential, Some(GradedScalar::zero(&c)));

    let x = coord(&c, "x");
    let st = OddPoissonStructure::darboux(&c).unwrap();
    let data = data_from_action(&st, &EffectiveAction::new(&x * &x).unwrap()).unwrap();
    assert_eq!(
        nondegenerate_reduction(&data).unwrap().potential,
        Some(&x * &x)
    );

    // body of S has rank one on R^{2|2}
    let c = chart22();
    let mut comps = vec![vec![GradedScalar::zero(&c); 4]; 4];
    comps[0][2] = GradedScalar::one(&c);
    comps[2][0] = GradedScalar::one(&c);
    let degenerate = ExtendedBracketData::new(
        Bracket::new(&c, Parity::Odd, comps).unwrap(),
        zeros(&c),
        GradedScalar::zero(&c),
    )
    .unwrap();
    assert_eq!(nondegenerate_reduction(&degenerate), Err(Error::Degenerate));
}

#[test]
fn actions_round_trip_through_the_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut count = 0;
    for (n, c) in [(12, chart11()), (12, chart22())] {
        let st = OddPoissonStructure::darboux(&c).unwrap();
        for _ in 0..n {
            let act = random_even(&mut rng, &c);
            let data = data_from_action(&st, &EffectiveAction::new(act.clone()).unwrap()).unwrap();
            let red = nondegenerate_reduction(&data).unwrap();
            assert!(red.closed);
            let pot = red.potential.expect("polynomial potential");
            let diff = &pot - &act;
            assert!(
                (0..c.dim()).all(|a| diff.partial(a).is_zero()),
                "{act} -> {pot}"
            );
            count += 1;
        }
    }
    assert!(count >= 20);
}

#[test]
fn master_equation_fixtures() {
    let c = chart11();
    let st = structure_of(&odd_laplacian(&c)).unwrap();
    let zero = EffectiveAction::new(GradedScalar::zero(&c)).unwrap();
    let constant = EffectiveAction::new(GradedScalar::one(&c).scale_int(7)).unwrap();
    for w in [q(0, 1), q(1, 2), q(1, 1)] {
        let a = master_equation_check(&st, &zero, &w).unwrap();
        assert!(a.holds);
        assert_eq!(
            master_equation_check(&st, &constant, &w).unwrap().holds,
            a.holds
        );
    }

    let c = chart22();
    let st = OddPoissonStructure::darboux(&c).unwrap();
    let (x, y, xi, eta) = (
        coord(&c, "x"),
        coord(&c, "y"),
        coord(&c, "xi"),
        coord(&c, "eta"),
    );
    let cases = [
        (prod(&[&x, &xi, &eta]), "1/2*eta"),
        (prod(&[&y, &xi, &eta]), "-1/2*xi"),
        (&(&x * &y) + &(&xi * &eta), "-1/4*x*xi + 1/4*y*eta"),
        (prod(&[&x, &x, &y, &y, &y]), "0"),
    ];
    for (act, sigma) in cases {
        let cert =
            master_equation_check(&st, &EffectiveAction::new(act).unwrap(), &q(1, 2)).unwrap();
        assert_eq!(cert.scalar_defect.to_string(), sigma);
        assert_eq!(cert.holds, sigma == "0");
    }
}

#[test]
fn master_verdicts_agree_on_random_actions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failing = 0;
    for c in [chart11(), chart22()] {
        let st = OddPoissonStructure::darboux(&c).unwrap();
        for _ in 0..10 {
            let act = EffectiveAction::new(random_even(&mut rng, &c)).unwrap();
            let verdicts: Vec<bool> = [q(0, 1), q(1, 2), q(3, 1)]
                .iter()
                .map(|w| master_equation_check(&st, &act, w).unwrap().holds)
                .collect();
            assert!(verdicts.iter().all(|v| *v == verdicts[0]));
            if !verdicts[0] {
                failing += 1;
            }
        }
    }
    assert!(failing > 0);
}
