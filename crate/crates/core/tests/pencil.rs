use densalg_core::graded::{Chart, Parity, Q};
use densalg_core::pencil::{
    canonical_pencil, check_selfadjoint, pencil_from_operator, pencil_pullback, twisted_pullback,
};
use densalg_core::q;
use densalg_core::random::{random_change, random_data, Shape};
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

fn parity(rng: &mut ChaCha8Rng) -> Parity {
    if rng.gen_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn canonical_pencil_is_selfadjoint(seed in any::<u64>(), big in any::<bool>()) {
        let c = if big { chart22() } else { chart11() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = parity(&mut rng);
        let data = random_data(&mut rng, &c, eps, Shape::default());
        let cert = check_selfadjoint(&canonical_pencil(&data).unwrap()).unwrap();
        prop_assert!(cert.holds(), "{:?}", cert.defects);
    }

    #[test]
    fn data_survives_a_round_trip(seed in any::<u64>()) {
        let c = chart22();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = parity(&mut rng);
        let data = random_data(&mut rng, &c, eps, Shape::default());
        let p = canonical_pencil(&data).unwrap();
        for w0 in [q(2, 1), q(-1, 1), q(3, 2)] {
            prop_assert_eq!(&pencil_from_operator(&p.at(&w0), &w0).unwrap(), &data);
        }
    }

    #[test]
    fn pullback_commutes_with_specialization(seed in any::<u64>()) {
        let (s, t) = (chart22(), chart22_primed());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = Shape { max_degree: 2, max_terms: 2, max_coeff: 2 };
        let ch = random_change(&mut rng, &s, &t, shape);
        let eps = parity(&mut rng);
        let data = random_data(&mut rng, &t, eps, shape);
        let p = canonical_pencil(&data).unwrap();
        let pulled = pencil_pullback(&p, &ch).unwrap();
        let weights: [Q; 5] = [q(0, 1), q(1, 2), q(2, 1), q(1, 1), q(-1, 1)];
        for w in weights {
            prop_assert_eq!(pulled.at(&w), twisted_pullback(&p.at(&w), &ch, &w).unwrap());
        }
        // the pulled-back pencil is again canonical
        let recovered = pencil_from_operator(&pulled.at(&q(2, 1)), &q(2, 1)).unwrap();
        prop_assert_eq!(canonical_pencil(&recovered).unwrap(), pulled);
    }
}
