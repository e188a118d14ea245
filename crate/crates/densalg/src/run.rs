//! Execute manifest checks and assemble a deterministic report.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use densalg_core::bv::{
    extract_modular_field, flatness_check, jacobi_check_base, jacobi_check_densities,
    master_equation_check, nondegenerate_reduction, structure_of, EffectiveAction,
    OddPoissonStructure,
};
use densalg_core::density::ExtendedBracketData;
use densalg_core::diffop::{adjoint_certificate, DiffOperator};
use densalg_core::pencil::{
    canonical_pencil, check_selfadjoint, pencil_from_operator, pencil_pullback, probe_weights,
    twisted_pullback, OperatorPencil,
};
use densalg_core::random::{random_scalar, Shape};
use densalg_core::symbol::verify_connection_law;
use densalg_core::{q, CoordinateChange, Error, GradedScalar, Q};

use crate::manifest::{parse_q, Check, CheckKind, Manifest, ObjectValue};

pub const SCHEMA: &str = "densalg.report/1";
/// Bumped whenever a sign or normalization convention changes the output.
pub const CONVENTIONS: &str = "left-derivatives;(p,x)=1;odd-jacobi/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub index: usize,
    pub check: String,
    pub target: String,
    pub params: BTreeMap<String, String>,
    pub verdict: Verdict,
    pub residuals: BTreeMap<String, String>,
    pub witness: Option<String>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
    pub internal: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub conventions: String,
    pub seed: u64,
    pub summary: Summary,
    pub checks: Vec<CheckReport>,
}

impl Report {
    /// 3 if any check hit an internal error, 1 on any failure or error, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.summary.internal > 0 {
            3
        } else if self.summary.fail + self.summary.error > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Default)]
struct Outcome {
    pass: bool,
    residuals: BTreeMap<String, String>,
    witness: Option<String>,
}

impl Outcome {
    fn new(pass: bool) -> Self {
        Outcome {
            pass,
            ..Default::default()
        }
    }

    fn residual(mut self, key: &str, value: impl ToString) -> Self {
        self.residuals.insert(key.to_string(), value.to_string());
        self
    }

    fn witness(mut self, w: Option<String>) -> Self {
        self.witness = w;
        self
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    format!(
        "[{}]",
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
}

/// Run every check in order. The seed defaults to the manifest's, then 0.
pub fn run_checks(m: &Manifest, seed: Option<u64>) -> Report {
    let seed = seed.or(m.seed).unwrap_or(0);
    let mut summary = Summary::default();
    let checks: Vec<CheckReport> = m
        .checks
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
            let result = panic::catch_unwind(AssertUnwindSafe(|| run_one(m, c, &mut rng)));
            let (verdict, outcome, message) = match result {
                Ok(Ok(o)) => (if o.pass { Verdict::Pass } else { Verdict::Fail }, o, None),
                Ok(Err(Error::Internal(msg))) => (Verdict::Internal, Outcome::default(), Some(msg)),
                Ok(Err(e)) => (Verdict::Error, Outcome::default(), Some(e.to_string())),
                Err(p) => {
                    let msg = p
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| String::from("panic"));
                    (Verdict::Internal, Outcome::default(), Some(msg))
                }
            };
            summary.total += 1;
            match verdict {
                Verdict::Pass => summary.pass += 1,
                Verdict::Fail => summary.fail += 1,
                Verdict::Error => summary.error += 1,
                Verdict::Internal => summary.internal += 1,
            }
            CheckReport {
                index,
                check: c.kind.name().to_string(),
                target: c.target.clone(),
                params: c.params.clone(),
                verdict,
                residuals: outcome.residuals,
                witness: outcome.witness,
                message,
            }
        })
        .collect();
    Report {
        schema: SCHEMA.to_string(),
        conventions: CONVENTIONS.to_string(),
        seed,
        summary,
        checks,
    }
}

fn operator<'a>(m: &'a Manifest, name: &str) -> &'a DiffOperator {
    match &m.object(name).expect("resolved at parse time").value {
        ObjectValue::Operator(d) => d,
        _ => unreachable!("target kind checked at parse time"),
    }
}

fn data<'a>(m: &'a Manifest, name: &str) -> &'a ExtendedBracketData {
    match &m.object(name).expect("resolved at parse time").value {
        ObjectValue::Data(d) => d,
        _ => unreachable!("target kind checked at parse time"),
    }
}

fn pencil(m: &Manifest, name: &str) -> Result<OperatorPencil, Error> {
    match &m.object(name).expect("resolved at parse time").value {
        ObjectValue::Pencil(p) => Ok(p.clone()),
        ObjectValue::Data(d) => canonical_pencil(d),
        _ => unreachable!("target kind checked at parse time"),
    }
}

fn change(m: &Manifest, name: &str) -> Result<CoordinateChange, Error> {
    let obj = m.object(name).expect("resolved at parse time");
    match &obj.value {
        ObjectValue::Change {
            target,
            forward,
            inverse,
        } => CoordinateChange::new(
            m.chart(&obj.chart).expect("resolved"),
            m.chart(target).expect("resolved"),
            forward.clone(),
            inverse.clone(),
        ),
        _ => unreachable!("parameter kind checked at parse time"),
    }
}

fn param_q(c: &Check, key: &str, default: Q) -> Q {
    c.params
        .get(key)
        .map(|s| parse_q(s).expect("validated at parse time"))
        .unwrap_or(default)
}

fn param_n(c: &Check, key: &str, default: u32) -> u32 {
    c.params
        .get(key)
        .map(|s| s.parse().expect("validated at parse time"))
        .unwrap_or(default)
}

fn data_string(d: &ExtendedBracketData) -> String {
    format!(
        "S: {}; gamma: {}; theta: {}",
        d.s_symbol(),
        d.gamma_symbol(),
        d.theta
    )
}

fn run_one(m: &Manifest, c: &Check, rng: &mut ChaCha8Rng) -> Result<Outcome, Error> {
    match c.kind {
        CheckKind::Jacobi => {
            let cert = jacobi_check_base(operator(m, &c.target))?;
            Ok(Outcome::new(cert.holds)
                .residual("schouten", &cert.schouten)
                .residual("square_order", cert.square_order))
        }
        CheckKind::Flatness => {
            let d = operator(m, &c.target);
            let shape = Shape {
                max_degree: param_n(c, "degree", 2),
                ..Shape::default()
            };
            let pairs: Vec<(GradedScalar, GradedScalar)> = (0..param_n(c, "pairs", 0))
                .map(|_| {
                    (
                        random_scalar(rng, d.chart(), None, shape),
                        random_scalar(rng, d.chart(), None, shape),
                    )
                })
                .collect();
            let cert = flatness_check(d, &pairs)?;
            Ok(Outcome::new(cert.holds)
                .residual("curvature", &cert.curvature)
                .residual("square_order", cert.square_order)
                .witness(
                    cert.derivation_witness
                        .map(|(f, g, e)| format!("f = {f}; g = {g}; defect = {e}")),
                ))
        }
        CheckKind::Theorem3 => {
            let cert = jacobi_check_densities(data(m, &c.target))?;
            let mut o = Outcome::new(cert.holds);
            for (i, r) in cert.residuals.iter().enumerate() {
                o = o.residual(&format!("equation{}", i + 1), r);
            }
            Ok(o.witness(cert.jacobi_witness.map(|w| join(&w))))
        }
        CheckKind::Modular => {
            let x = extract_modular_field(data(m, &c.target))?;
            Ok(Outcome::new(true)
                .residual("field", &x.x)
                .residual("divergence", x.divergence()))
        }
        CheckKind::Reduce => {
            let r = nondegenerate_reduction(data(m, &c.target))?;
            let mut o = Outcome::new(r.closed).residual("gamma_lower", join(&r.gamma_lower));
            if let Some(p) = &r.potential {
                o = o.residual("potential", p);
            }
            Ok(o)
        }
        CheckKind::Master => {
            let action = match &m.object(&c.target).expect("resolved").value {
                ObjectValue::Scalar(s) => EffectiveAction::new(s.clone())?,
                _ => unreachable!("target kind checked at parse time"),
            };
            let sname = &c.params["structure"];
            let structure = match &m.object(sname).expect("resolved").value {
                ObjectValue::Operator(d) => structure_of(d)?,
                ObjectValue::Data(d) => OddPoissonStructure::new(d.s.clone())?,
                _ => unreachable!("parameter kind checked at parse time"),
            };
            let cert = master_equation_check(&structure, &action, &param_q(c, "weight", q(1, 2)))?;
            Ok(Outcome::new(cert.holds)
                .residual("square", &cert.square)
                .residual("sigma", &cert.scalar_defect))
        }
        CheckKind::Selfadjoint => {
            let cert = check_selfadjoint(&pencil(m, &c.target)?)?;
            let mut o = Outcome::new(cert.holds());
            for (w, d) in &cert.defects {
                o = o.residual(&format!("w={w}"), d);
            }
            Ok(o)
        }
        CheckKind::Recover => {
            let d = operator(m, &c.target);
            let w = param_q(c, "weight", q(2, 1));
            let rec = pencil_from_operator(d, &w)?;
            let rebuilt = canonical_pencil(&rec)?.at(&w);
            let defect = rebuilt.try_add(&-d)?;
            Ok(Outcome::new(defect.is_zero())
                .residual("data", data_string(&rec))
                .residual("defect", defect))
        }
        CheckKind::Roundtrip => {
            let d = data(m, &c.target);
            let p = canonical_pencil(d)?;
            let weights: Vec<Q> = match c.params.get("weights") {
                Some(s) => s
                    .split(',')
                    .map(|w| parse_q(w).expect("validated"))
                    .collect(),
                None => vec![q(-1, 1), q(2, 1), q(3, 1)],
            };
            let mut o = Outcome::new(true);
            for w in weights {
                let rec = pencil_from_operator(&p.at(&w), &w)?;
                let ok = rec == *d;
                o.pass &= ok;
                o = o.residual(
                    &format!("w={w}"),
                    if ok {
                        String::from("0")
                    } else {
                        data_string(&rec)
                    },
                );
            }
            Ok(o)
        }
        CheckKind::Connection => {
            let cert =
                verify_connection_law(operator(m, &c.target), &change(m, &c.params["change"])?)?;
            Ok(Outcome::new(cert.holds())
                .residual("difference", join(&cert.difference()))
                .residual("tensor_law", cert.tensor_law_holds))
        }
        CheckKind::Pullback => {
            let p = pencil(m, &c.target)?;
            let ch = change(m, &c.params["change"])?;
            let pulled = pencil_pullback(&p, &ch)?;
            let (before, after) = (
                check_selfadjoint(&p)?.holds(),
                check_selfadjoint(&pulled)?.holds(),
            );
            let mut o = Outcome::new(!before || after)
                .residual("selfadjoint", format!("{before} -> {after}"));
            for w in probe_weights() {
                let defect = pulled
                    .at(&w)
                    .try_add(&-twisted_pullback(&p.at(&w), &ch, &w)?)?;
                o.pass &= defect.is_zero();
                o = o.residual(&format!("w={w}"), defect);
            }
            Ok(o)
        }
        CheckKind::Adjoint => {
            let d = operator(m, &c.target);
            let mut o = Outcome::new(true);
            let samples = param_n(c, "samples", 8);
            for _ in 0..samples {
                let psi = random_scalar(rng, d.chart(), None, Shape::default());
                let chi = random_scalar(rng, d.chart(), None, Shape::default());
                let cert = adjoint_certificate(d, &psi, &chi)?;
                if !cert.holds() && o.pass {
                    o.pass = false;
                    o.witness = Some(format!(
                        "psi = {psi}; chi = {chi}; divergence = {}",
                        cert.divergence()
                    ));
                }
            }
            Ok(o.residual("samples", samples))
        }
    }
}

/// Report rendered as aligned text, one line per check.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    for c in &r.checks {
        let verdict = match c.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
            Verdict::Internal => "INTERNAL",
        };
        out.push_str(&format!(
            "[{}] {:<8} {} {}\n",
            c.index, verdict, c.check, c.target
        ));
        for (k, v) in &c.residuals {
            out.push_str(&format!("      {k}: {v}\n"));
        }
        if let Some(w) = &c.witness {
            out.push_str(&format!("      witness: {w}\n"));
        }
        if let Some(msg) = &c.message {
            out.push_str(&format!("      {msg}\n"));
        }
    }
    let s = &r.summary;
    out.push_str(&format!(
        "{} checks: {} pass, {} fail, {} error, {} internal\n",
        s.total, s.pass, s.fail, s.error, s.internal
    ));
    out
}
