//! Random, fully valid manifests.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use densalg::manifest::{Check, CheckKind, Manifest, Object, ObjectValue};
use densalg_core::density::DensityElement;
use densalg_core::pencil::OperatorPencil;
use densalg_core::random::{random_change, random_data, random_operator, random_scalar, Shape};
use densalg_core::symbol::MomentumPolynomial;
use densalg_core::{q, Chart, Parity};

fn parity(rng: &mut ChaCha8Rng) -> Parity {
    if rng.gen_bool(0.7) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

fn chart(rng: &mut ChaCha8Rng, suffix: &str) -> Chart {
    let names: &[(&str, Parity)] = match rng.gen_range(0..4) {
        0 => &[("x", Parity::Even), ("xi", Parity::Odd)],
        1 => &[
            ("x", Parity::Even),
            ("y", Parity::Even),
            ("xi", Parity::Odd),
            ("eta", Parity::Odd),
        ],
        2 => &[("x", Parity::Even), ("y", Parity::Even)],
        _ => &[
            ("x", Parity::Even),
            ("xi", Parity::Odd),
            ("eta", Parity::Odd),
        ],
    };
    let coords: Vec<(String, Parity)> = names
        .iter()
        .map(|(n, p)| (format!("{n}{suffix}"), *p))
        .collect();
    Chart::new(&coords).unwrap()
}

/// A random but fully valid manifest.
pub fn generate(seed: u64) -> Manifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape {
        max_degree: 2,
        max_terms: 3,
        max_coeff: 4,
    };
    let mut m = Manifest {
        seed: rng.gen_bool(0.5).then(|| rng.gen_range(0..1000)),
        ..Manifest::default()
    };
    let base = chart(&mut rng, "");
    let primed = Chart::new(
        &base
            .coords()
            .iter()
            .map(|c| (format!("{}1", c.name), c.parity))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    m.charts.push((String::from("M"), base.clone()));
    m.charts.push((String::from("N"), primed.clone()));

    let push = |m: &mut Manifest, name: String, chart: &str, value| {
        m.objects.push(Object {
            name,
            chart: chart.into(),
            value,
        })
    };
    let n = rng.gen_range(1..6);
    for i in 0..n {
        let value = match rng.gen_range(0..6) {
            0 => ObjectValue::Scalar(random_scalar(&mut rng, &base, None, shape)),
            1 => {
                let p = parity(&mut rng);
                ObjectValue::Operator(random_operator(&mut rng, &base, p, 2, shape))
            }
            2 => {
                let p = parity(&mut rng);
                ObjectValue::Data(random_data(&mut rng, &base, p, shape))
            }
            3 => {
                let p = parity(&mut rng);
                let ops: Vec<_> = (0..3)
                    .map(|k| random_operator(&mut rng, &base, p, 2 - k, shape))
                    .collect();
                ObjectValue::Pencil(
                    OperatorPencil::new(ops[0].clone(), ops[1].clone(), ops[2].clone()).unwrap(),
                )
            }
            4 => {
                let w = [q(0, 1), q(1, 2), q(-1, 1), q(3, 2)];
                let terms = (0..rng.gen_range(1..3)).map(|_| {
                    (
                        w[rng.gen_range(0..4)].clone(),
                        random_scalar(&mut rng, &base, None, shape),
                    )
                });
                ObjectValue::Density(DensityElement::from_terms(&base, terms).unwrap())
            }
            _ => {
                let a = random_scalar(&mut rng, &base, Some(Parity::Even), shape);
                let b = MomentumPolynomial::momentum(&base, rng.gen_range(0..base.dim()));
                ObjectValue::Symbol(&MomentumPolynomial::from_function(&a) * &b)
            }
        };
        push(&mut m, format!("o{i}"), "M", value);
    }
    let ch = random_change(&mut rng, &base, &primed, shape);
    push(
        &mut m,
        String::from("phi"),
        "M",
        ObjectValue::Change {
            target: String::from("N"),
            forward: ch.forward().to_vec(),
            inverse: ch.inverse_images().map(|v| v.to_vec()),
        },
    );
    let d = random_operator(&mut rng, &primed, Parity::Odd, 2, shape);
    push(&mut m, String::from("op"), "N", ObjectValue::Operator(d));

    let objects = m.objects.clone();
    for o in &objects {
        let mut params = BTreeMap::new();
        let kind = match &o.value {
            ObjectValue::Operator(_) if o.name == "op" => {
                params.insert(String::from("change"), String::from("phi"));
                CheckKind::Connection
            }
            ObjectValue::Operator(_) => {
                if rng.gen_bool(0.5) {
                    params.insert(
                        String::from("weight"),
                        q(rng.gen_range(-3..4), rng.gen_range(1..4)).to_string(),
                    );
                    CheckKind::Recover
                } else {
                    params.insert(String::from("degree"), rng.gen_range(0..4u32).to_string());
                    params.insert(String::from("pairs"), rng.gen_range(0..9u32).to_string());
                    CheckKind::Flatness
                }
            }
            ObjectValue::Data(_) => [
                CheckKind::Theorem3,
                CheckKind::Modular,
                CheckKind::Reduce,
                CheckKind::Selfadjoint,
            ][rng.gen_range(0..4)],
            ObjectValue::Pencil(_) => CheckKind::Selfadjoint,
            ObjectValue::Scalar(_) => {
                if !matches!(
                    objects[0].value,
                    ObjectValue::Operator(_) | ObjectValue::Data(_)
                ) {
                    continue;
                }
                params.insert(String::from("structure"), String::from("o0"));
                CheckKind::Master
            }
            _ => continue,
        };
        m.checks.push(Check {
            kind,
            target: o.name.clone(),
            params,
        });
    }
    m
}
