//! Line-oriented manifests.
//!
//! ```text
//! # comment
//! [settings]
//! seed = 7
//!
//! [charts]
//! M = x:even, xi:odd
//!
//! [objects]
//! operator delta @ M odd = d[x]*d[xi]
//! data D @ M odd = S: p[x]*p[xi]; gamma: 0; theta: xi
//! change phi @ M -> N = x + x^2, xi
//!
//! [checks]
//! jacobi delta
//! master A structure=delta weight=1/2
//! ```

use std::collections::BTreeMap;
use std::fmt;

use densalg_core::density::{DensityElement, ExtendedBracketData};
use densalg_core::diffop::DiffOperator;
use densalg_core::pencil::OperatorPencil;
use densalg_core::symbol::{Bracket, MomentumPolynomial};
use densalg_core::{Chart, CoordinateChange, GradedScalar, Parity, Q};

use crate::expr::{self, Value};

/// A positioned problem in a manifest. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectValue {
    Scalar(GradedScalar),
    Symbol(MomentumPolynomial),
    Operator(DiffOperator),
    Density(DensityElement),
    Data(ExtendedBracketData),
    Pencil(OperatorPencil),
    Change {
        target: String,
        forward: Vec<GradedScalar>,
        inverse: Option<Vec<GradedScalar>>,
    },
}

impl ObjectValue {
    pub fn kind(&self) -> &'static str {
        match self {
            ObjectValue::Scalar(_) => "scalar",
            ObjectValue::Symbol(_) => "symbol",
            ObjectValue::Operator(_) => "operator",
            ObjectValue::Density(_) => "density",
            ObjectValue::Data(_) => "data",
            ObjectValue::Pencil(_) => "pencil",
            ObjectValue::Change { .. } => "change",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Object {
    pub name: String,
    pub chart: String,
    pub value: ObjectValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Jacobi,
    Flatness,
    Theorem3,
    Modular,
    Reduce,
    Master,
    Selfadjoint,
    Recover,
    Roundtrip,
    Connection,
    Pullback,
    Adjoint,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Jacobi,
        CheckKind::Flatness,
        CheckKind::Theorem3,
        CheckKind::Modular,
        CheckKind::Reduce,
        CheckKind::Master,
        CheckKind::Selfadjoint,
        CheckKind::Recover,
        CheckKind::Roundtrip,
        CheckKind::Connection,
        CheckKind::Pullback,
        CheckKind::Adjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Jacobi => "jacobi",
            CheckKind::Flatness => "flatness",
            CheckKind::Theorem3 => "theorem3",
            CheckKind::Modular => "modular",
            CheckKind::Reduce => "reduce",
            CheckKind::Master => "master",
            CheckKind::Selfadjoint => "selfadjoint",
            CheckKind::Recover => "recover",
            CheckKind::Roundtrip => "roundtrip",
            CheckKind::Connection => "connection",
            CheckKind::Pullback => "pullback",
            CheckKind::Adjoint => "adjoint",
        }
    }

    pub fn from_name(s: &str) -> Option<CheckKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Object kinds accepted as the check target.
    fn targets(self) -> &'static [&'static str] {
        match self {
            CheckKind::Jacobi
            | CheckKind::Flatness
            | CheckKind::Recover
            | CheckKind::Connection
            | CheckKind::Adjoint => &["operator"],
            CheckKind::Theorem3 | CheckKind::Modular | CheckKind::Reduce | CheckKind::Roundtrip => {
                &["data"]
            }
            CheckKind::Master => &["scalar"],
            CheckKind::Selfadjoint | CheckKind::Pullback => &["data", "pencil"],
        }
    }

    /// Recognized parameters.
    fn params(self) -> &'static [&'static str] {
        match self {
            CheckKind::Flatness => &["degree", "pairs"],
            CheckKind::Master => &["structure", "weight"],
            CheckKind::Recover => &["weight"],
            CheckKind::Roundtrip => &["weights"],
            CheckKind::Connection | CheckKind::Pullback => &["change"],
            CheckKind::Adjoint => &["samples"],
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub kind: CheckKind,
    pub target: String,
    /// Parameters in canonical text form, sorted by key.
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Manifest {
    pub seed: Option<u64>,
    pub charts: Vec<(String, Chart)>,
    pub objects: Vec<Object>,
    pub checks: Vec<Check>,
}

impl Manifest {
    pub fn chart(&self, name: &str) -> Option<&Chart> {
        self.charts.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn object(&self, name: &str) -> Option<&Object> {
        self.objects.iter().find(|o| o.name == name)
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

const RESERVED: [&str; 3] = ["t", "d", "p"];

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let q: Q = s.parse().ok()?;
    Some(q)
}

fn parse_parity(s: &str) -> Option<Parity> {
    match s {
        "even" => Some(Parity::Even),
        "odd" => Some(Parity::Odd),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Settings,
    Charts,
    Objects,
    Checks,
}

struct Ctx {
    diags: Vec<Diagnostic>,
}

impl Ctx {
    fn push(&mut self, line: usize, column: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            line,
            column,
            message: message.into(),
        });
    }
}

/// Column (1-based) of `part` inside `line`, which must be a subslice.
fn col(line: &str, part: &str) -> usize {
    (part.as_ptr() as usize).saturating_sub(line.as_ptr() as usize) + 1
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parse and fully resolve a manifest, or report every diagnostic found.
pub fn parse_manifest(text: &str) -> Result<Manifest, Vec<Diagnostic>> {
    let mut m = Manifest::default();
    let mut ctx = Ctx { diags: Vec::new() };
    let mut section = Section::None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(raw);
        let body = line.trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') {
            section = match body {
                "[settings]" => Section::Settings,
                "[charts]" => Section::Charts,
                "[objects]" => Section::Objects,
                "[checks]" => Section::Checks,
                _ => {
                    ctx.push(ln, col(raw, body), format!("unknown section `{body}`"));
                    Section::None
                }
            };
            continue;
        }
        match section {
            Section::None => ctx.push(ln, col(raw, body), "line outside any section"),
            Section::Settings => parse_setting(&mut m, &mut ctx, raw, body, ln),
            Section::Charts => parse_chart(&mut m, &mut ctx, raw, body, ln),
            Section::Objects => parse_object(&mut m, &mut ctx, raw, body, ln),
            Section::Checks => parse_check(&mut m, &mut ctx, raw, body, ln),
        }
    }
    if ctx.diags.is_empty() {
        Ok(m)
    } else {
        Err(ctx.diags)
    }
}

fn parse_setting(m: &mut Manifest, ctx: &mut Ctx, raw: &str, body: &str, ln: usize) {
    let Some((k, v)) = body.split_once('=') else {
        return ctx.push(ln, col(raw, body), "expected `key = value`");
    };
    match (k.trim(), v.trim().parse::<u64>()) {
        ("seed", Ok(s)) => m.seed = Some(s),
        ("seed", Err(_)) => ctx.push(
            ln,
            col(raw, v.trim()),
            "seed must be a non-negative integer",
        ),
        (other, _) => ctx.push(ln, col(raw, k.trim()), format!("unknown setting `{other}`")),
    }
}

fn parse_chart(m: &mut Manifest, ctx: &mut Ctx, raw: &str, body: &str, ln: usize) {
    let Some((name, rest)) = body.split_once('=') else {
        return ctx.push(ln, col(raw, body), "expected `Name = coord:parity, ...`");
    };
    let name = name.trim();
    if !is_name(name) {
        return ctx.push(ln, col(raw, name), format!("invalid chart name `{name}`"));
    }
    if m.chart(name).is_some() {
        return ctx.push(ln, col(raw, name), format!("chart `{name}` declared twice"));
    }
    let mut coords = Vec::new();
    for item in rest.split(',') {
        let item = item.trim();
        let Some((c, p)) = item.split_once(':') else {
            return ctx.push(ln, col(raw, item), "expected `coord:even` or `coord:odd`");
        };
        let c = c.trim();
        if !is_name(c) || RESERVED.contains(&c) {
            return ctx.push(ln, col(raw, c), format!("invalid coordinate name `{c}`"));
        }
        let Some(p) = parse_parity(p.trim()) else {
            return ctx.push(
                ln,
                col(raw, p.trim()),
                format!("unknown parity `{}`", p.trim()),
            );
        };
        coords.push((c.to_string(), p));
    }
    match Chart::new(&coords) {
        Ok(c) => m.charts.push((name.to_string(), c)),
        Err(e) => ctx.push(ln, col(raw, rest.trim()), e.to_string()),
    }
}

/// Evaluate an expression slice of `raw`, reporting errors at their column.
fn eval_at(ctx: &mut Ctx, raw: &str, src: &str, chart: &Chart, ln: usize) -> Option<Value> {
    let src_trim = src.trim();
    match expr::evaluate(src_trim, chart) {
        Ok(v) => Some(v),
        Err(e) => {
            ctx.push(ln, col(raw, src_trim) + e.offset, e.message);
            None
        }
    }
}

fn want_scalar(
    ctx: &mut Ctx,
    raw: &str,
    src: &str,
    chart: &Chart,
    ln: usize,
) -> Option<GradedScalar> {
    match eval_at(ctx, raw, src, chart, ln)? {
        Value::Scalar(s) => Some(s),
        other => {
            ctx.push(
                ln,
                col(raw, src.trim()),
                format!("expected a scalar, found a {}", other.kind()),
            );
            None
        }
    }
}

fn want_symbol(
    ctx: &mut Ctx,
    raw: &str,
    src: &str,
    chart: &Chart,
    ln: usize,
) -> Option<MomentumPolynomial> {
    match eval_at(ctx, raw, src, chart, ln)? {
        Value::Symbol(s) => Some(s),
        Value::Scalar(s) => Some(MomentumPolynomial::from_function(&s)),
        other => {
            ctx.push(
                ln,
                col(raw, src.trim()),
                format!("expected a symbol, found a {}", other.kind()),
            );
            None
        }
    }
}

fn want_operator(
    ctx: &mut Ctx,
    raw: &str,
    src: &str,
    chart: &Chart,
    parity: Option<Parity>,
    ln: usize,
) -> Option<DiffOperator> {
    let v = eval_at(ctx, raw, src, chart, ln)?;
    let d = match v {
        Value::Operator(d) => d,
        Value::Scalar(s) if s.is_zero() => {
            DiffOperator::zero(chart, parity.unwrap_or(Parity::Even))
        }
        Value::Scalar(s) => match DiffOperator::multiplication(&s) {
            Ok(d) => d,
            Err(e) => {
                ctx.push(ln, col(raw, src.trim()), e.to_string());
                return None;
            }
        },
        other => {
            ctx.push(
                ln,
                col(raw, src.trim()),
                format!("expected an operator, found a {}", other.kind()),
            );
            return None;
        }
    };
    match parity {
        Some(p) if d.parity() != p => {
            ctx.push(
                ln,
                col(raw, src.trim()),
                format!("operator is {}, declared {}", d.parity(), p),
            );
            None
        }
        _ => Some(d),
    }
}

/// Split `a: x; b: y` into named clauses.
fn clauses<'a>(
    ctx: &mut Ctx,
    raw: &str,
    body: &'a str,
    keys: &[&str],
    ln: usize,
) -> Option<BTreeMap<&'a str, &'a str>> {
    let mut out = BTreeMap::new();
    for part in body.split(';') {
        let Some((k, v)) = part.split_once(':') else {
            ctx.push(ln, col(raw, part.trim()), "expected `key: expression`");
            return None;
        };
        let k = k.trim();
        if !keys.contains(&k) {
            ctx.push(
                ln,
                col(raw, k),
                format!("unknown clause `{k}`; expected one of {}", keys.join(", ")),
            );
            return None;
        }
        if out.insert(k, v).is_some() {
            ctx.push(ln, col(raw, k), format!("clause `{k}` given twice"));
            return None;
        }
    }
    Some(out)
}

fn parse_object(m: &mut Manifest, ctx: &mut Ctx, raw: &str, body: &str, ln: usize) {
    let Some((head, rhs)) = body.split_once('=') else {
        return ctx.push(
            ln,
            col(raw, body),
            "expected `kind name @ chart [parity] = value`",
        );
    };
    let words: Vec<&str> = head.split_whitespace().collect();
    if words.len() < 4 || words[2] != "@" {
        return ctx.push(
            ln,
            col(raw, body),
            "expected `kind name @ chart [parity] = value`",
        );
    }
    let (kind, name, chart_name) = (words[0], words[1], words[3]);
    if !is_name(name) {
        return ctx.push(ln, col(raw, name), format!("invalid object name `{name}`"));
    }
    if m.object(name).is_some() {
        return ctx.push(
            ln,
            col(raw, name),
            format!("object `{name}` declared twice"),
        );
    }
    let Some(chart) = m.chart(chart_name).cloned() else {
        return ctx.push(
            ln,
            col(raw, chart_name),
            format!("unknown chart `{chart_name}`"),
        );
    };
    let tail = &words[4..];
    let value = match kind {
        "change" => {
            if tail.len() != 2 || tail[0] != "->" {
                return ctx.push(
                    ln,
                    col(raw, body),
                    "expected `change name @ source -> target = images`",
                );
            }
            let Some(target) = m.chart(tail[1]).cloned() else {
                return ctx.push(
                    ln,
                    col(raw, tail[1]),
                    format!("unknown chart `{}`", tail[1]),
                );
            };
            parse_change(ctx, raw, rhs, &chart, &target, tail[1], ln)
        }
        _ => {
            let parity = match tail {
                [] => None,
                [p] => match parse_parity(p) {
                    Some(p) => Some(p),
                    None => return ctx.push(ln, col(raw, p), format!("unknown parity `{p}`")),
                },
                _ => return ctx.push(ln, col(raw, tail[1]), "unexpected text before `=`"),
            };
            parse_value(ctx, raw, kind, head, rhs, &chart, parity, ln)
        }
    };
    if let Some(value) = value {
        m.objects.push(Object {
            name: name.to_string(),
            chart: chart_name.to_string(),
            value,
        });
    }
}

#[allow(clippy::too_many_arguments)]
fn parse_value(
    ctx: &mut Ctx,
    raw: &str,
    kind: &str,
    head: &str,
    rhs: &str,
    chart: &Chart,
    parity: Option<Parity>,
    ln: usize,
) -> Option<ObjectValue> {
    let need_parity = |ctx: &mut Ctx| {
        if parity.is_none() {
            ctx.push(
                ln,
                col(raw, head.trim()),
                format!("a {kind} needs a declared parity"),
            );
        }
        parity
    };
    let value = match kind {
        "scalar" => {
            let s = want_scalar(ctx, raw, rhs, chart, ln)?;
            if let Some(p) = parity {
                if !s.has_parity(p) {
                    ctx.push(ln, col(raw, rhs.trim()), format!("scalar is not {p}"));
                    return None;
                }
            }
            ObjectValue::Scalar(s)
        }
        "symbol" => ObjectValue::Symbol(want_symbol(ctx, raw, rhs, chart, ln)?),
        "operator" => ObjectValue::Operator(want_operator(ctx, raw, rhs, chart, parity, ln)?),
        "density" => match eval_at(ctx, raw, rhs, chart, ln)? {
            Value::Density(d) => ObjectValue::Density(d),
            Value::Scalar(s) => {
                ObjectValue::Density(DensityElement::pure(densalg_core::q(0, 1), s))
            }
            other => {
                ctx.push(
                    ln,
                    col(raw, rhs.trim()),
                    format!("expected a density, found a {}", other.kind()),
                );
                return None;
            }
        },
        "data" => {
            let p = need_parity(ctx)?;
            let cl = clauses(ctx, raw, rhs, &["S", "gamma", "theta"], ln)?;
            let get = |k: &str| cl.get(k).copied().unwrap_or("0");
            let s_sym = want_symbol(ctx, raw, get("S"), chart, ln)?;
            let s = match Bracket::from_symbol(&s_sym, p) {
                Ok(s) => s,
                Err(e) => {
                    ctx.push(ln, col(raw, get("S").trim()), format!("S: {e}"));
                    return None;
                }
            };
            let g_sym = want_symbol(ctx, raw, get("gamma"), chart, ln)?;
            if !(g_sym.is_zero() || g_sym.degree() == 1) || !g_sym.part_of_degree(0).is_zero() {
                ctx.push(
                    ln,
                    col(raw, get("gamma").trim()),
                    "gamma must be linear in the momenta",
                );
                return None;
            }
            let theta = want_scalar(ctx, raw, get("theta"), chart, ln)?;
            match ExtendedBracketData::new(s, g_sym.linear_components(), theta) {
                Ok(d) => ObjectValue::Data(d),
                Err(e) => {
                    ctx.push(ln, col(raw, rhs.trim()), e.to_string());
                    return None;
                }
            }
        }
        "pencil" => {
            let p = need_parity(ctx)?;
            let cl = clauses(ctx, raw, rhs, &["delta0", "a", "b"], ln)?;
            let get = |k: &str| cl.get(k).copied().unwrap_or("0");
            let d0 = want_operator(ctx, raw, get("delta0"), chart, Some(p), ln)?;
            let a = want_operator(ctx, raw, get("a"), chart, Some(p), ln)?;
            let b = want_operator(ctx, raw, get("b"), chart, Some(p), ln)?;
            match OperatorPencil::new(d0, a, b) {
                Ok(pen) => ObjectValue::Pencil(pen),
                Err(e) => {
                    ctx.push(ln, col(raw, rhs.trim()), e.to_string());
                    return None;
                }
            }
        }
        other => {
            ctx.push(
                ln,
                col(raw, head.trim()),
                format!("unknown object kind `{other}`"),
            );
            return None;
        }
    };
    Some(value)
}

fn parse_change(
    ctx: &mut Ctx,
    raw: &str,
    rhs: &str,
    source: &Chart,
    target: &Chart,
    target_name: &str,
    ln: usize,
) -> Option<ObjectValue> {
    let (fwd, inv) = match rhs.split_once(';') {
        Some((f, i)) => {
            let Some((k, v)) = i.split_once(':') else {
                ctx.push(ln, col(raw, i.trim()), "expected `inverse: images`");
                return None;
            };
            if k.trim() != "inverse" {
                ctx.push(ln, col(raw, k.trim()), "expected `inverse: images`");
                return None;
            }
            (f, Some(v))
        }
        None => (rhs, None),
    };
    let images = |ctx: &mut Ctx, src: &str, chart: &Chart, n: usize| -> Option<Vec<GradedScalar>> {
        let parts: Vec<&str> = src.split(',').collect();
        if parts.len() != n {
            ctx.push(
                ln,
                col(raw, src.trim()),
                format!("expected {n} images, found {}", parts.len()),
            );
            return None;
        }
        parts
            .into_iter()
            .map(|p| want_scalar(ctx, raw, p, chart, ln))
            .collect()
    };
    let forward = images(ctx, fwd, source, target.dim())?;
    let inverse = match inv {
        Some(v) => Some(images(ctx, v, target, source.dim())?),
        None => None,
    };
    if let Err(e) = CoordinateChange::new(source, target, forward.clone(), inverse.clone()) {
        ctx.push(ln, col(raw, fwd.trim()), e.to_string());
        return None;
    }
    Some(ObjectValue::Change {
        target: target_name.to_string(),
        forward,
        inverse,
    })
}

fn parse_check(m: &mut Manifest, ctx: &mut Ctx, raw: &str, body: &str, ln: usize) {
    let mut words = body.split_whitespace();
    let verb = words.next().expect("non-empty line");
    let Some(kind) = CheckKind::from_name(verb) else {
        return ctx.push(ln, col(raw, verb), format!("unknown check `{verb}`"));
    };
    let Some(target) = words.next() else {
        return ctx.push(ln, col(raw, verb), format!("`{verb}` needs a target"));
    };
    let Some(obj) = m.object(target) else {
        return ctx.push(ln, col(raw, target), format!("unknown object `{target}`"));
    };
    if !kind.targets().contains(&obj.value.kind()) {
        return ctx.push(
            ln,
            col(raw, target),
            format!(
                "`{verb}` expects {}, `{target}` is a {}",
                kind.targets().join(" or "),
                obj.value.kind()
            ),
        );
    }
    if let ObjectValue::Operator(d) = &obj.value {
        if d.order() > 2 {
            return ctx.push(
                ln,
                col(raw, target),
                format!(
                    "`{verb}` needs an operator of order at most 2, `{target}` has order {}",
                    d.order()
                ),
            );
        }
    }
    let target_chart = obj.chart.clone();
    let mut params = BTreeMap::new();
    for w in words {
        let Some((k, v)) = w.split_once('=') else {
            return ctx.push(ln, col(raw, w), "expected `key=value`");
        };
        if !kind.params().contains(&k) {
            return ctx.push(
                ln,
                col(raw, w),
                format!("`{verb}` takes no parameter `{k}`"),
            );
        }
        let canonical = match check_param(m, k, v, &target_chart) {
            Ok(c) => c,
            Err(msg) => return ctx.push(ln, col(raw, w) + k.len() + 1, msg),
        };
        params.insert(k.to_string(), canonical);
    }
    for required in match kind {
        CheckKind::Master => &["structure"][..],
        CheckKind::Connection | CheckKind::Pullback => &["change"][..],
        _ => &[][..],
    } {
        if !params.contains_key(*required) {
            return ctx.push(ln, col(raw, verb), format!("`{verb}` needs `{required}=`"));
        }
    }
    m.checks.push(Check {
        kind,
        target: target.to_string(),
        params,
    });
}

/// Validate one parameter and return its canonical text.
fn check_param(m: &Manifest, key: &str, v: &str, chart: &str) -> Result<String, String> {
    let q = |s: &str| parse_q(s).ok_or_else(|| format!("`{s}` is not a rational number"));
    match key {
        "degree" | "pairs" | "samples" => {
            let n: u32 = v
                .parse()
                .map_err(|_| format!("`{v}` is not a non-negative integer"))?;
            if key == "degree" && n > 4 {
                return Err(String::from("degree bound above 4"));
            }
            Ok(n.to_string())
        }
        "weight" => Ok(q(v)?.to_string()),
        "weights" => Ok(v
            .split(',')
            .map(q)
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(",")),
        "structure" => match m.object(v) {
            Some(o) if o.chart != chart => Err(format!("`{v}` lives on chart `{}`", o.chart)),
            Some(Object {
                value: ObjectValue::Operator(_) | ObjectValue::Data(_),
                ..
            }) => Ok(v.to_string()),
            Some(o) => Err(format!(
                "structure must be an operator or data, `{v}` is a {}",
                o.value.kind()
            )),
            None => Err(format!("unknown object `{v}`")),
        },
        "change" => match m.object(v) {
            Some(Object {
                value: ObjectValue::Change { target, .. },
                ..
            }) if target == chart => Ok(v.to_string()),
            Some(Object {
                value: ObjectValue::Change { target, .. },
                ..
            }) => Err(format!(
                "change `{v}` maps to chart `{target}`, the target lives on `{chart}`"
            )),
            Some(o) => Err(format!("`{v}` is a {}, not a change", o.value.kind())),
            None => Err(format!("unknown object `{v}`")),
        },
        _ => unreachable!("filtered by CheckKind::params"),
    }
}

fn parity_word(p: Parity) -> &'static str {
    if p.is_odd() {
        "odd"
    } else {
        "even"
    }
}

fn join_scalars(v: &[GradedScalar]) -> String {
    v.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical text; parses back to an equal manifest.
impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.seed {
            writeln!(f, "[settings]\nseed = {s}\n")?;
        }
        writeln!(f, "[charts]")?;
        for (name, c) in &self.charts {
            let coords: Vec<String> = c
                .coords()
                .iter()
                .map(|k| format!("{}:{}", k.name, parity_word(k.parity)))
                .collect();
            writeln!(f, "{name} = {}", coords.join(", "))?;
        }
        writeln!(f, "\n[objects]")?;
        for o in &self.objects {
            let head = |kind: &str, p: Option<Parity>| match p {
                Some(p) => format!("{kind} {} @ {} {}", o.name, o.chart, parity_word(p)),
                None => format!("{kind} {} @ {}", o.name, o.chart),
            };
            match &o.value {
                ObjectValue::Scalar(s) => writeln!(f, "{} = {s}", head("scalar", None))?,
                ObjectValue::Symbol(s) => writeln!(f, "{} = {s}", head("symbol", None))?,
                ObjectValue::Operator(d) => {
                    writeln!(f, "{} = {d}", head("operator", Some(d.parity())))?
                }
                ObjectValue::Density(d) => writeln!(f, "{} = {d}", head("density", None))?,
                ObjectValue::Data(d) => writeln!(
                    f,
                    "{} = S: {}; gamma: {}; theta: {}",
                    head("data", Some(d.parity())),
                    d.s_symbol(),
                    d.gamma_symbol(),
                    d.theta
                )?,
                ObjectValue::Pencil(p) => writeln!(
                    f,
                    "{} = delta0: {}; a: {}; b: {}",
                    head("pencil", Some(p.parity())),
                    p.delta0(),
                    p.a(),
                    p.b()
                )?,
                ObjectValue::Change {
                    target,
                    forward,
                    inverse,
                } => {
                    write!(
                        f,
                        "change {} @ {} -> {target} = {}",
                        o.name,
                        o.chart,
                        join_scalars(forward)
                    )?;
                    if let Some(inv) = inverse {
                        write!(f, "; inverse: {}", join_scalars(inv))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        writeln!(f, "\n[checks]")?;
        for c in &self.checks {
            write!(f, "{} {}", c.kind.name(), c.target)?;
            for (k, v) in &c.params {
                write!(f, " {k}={v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = "\
[charts]
M = x:even, xi:odd

[objects]
operator delta @ M = d[x]*d[xi]

[checks]
jacobi delta
";

    #[test]
    fn minimal_manifest() {
        let m = parse_manifest(FLAT).unwrap();
        assert_eq!(m.charts.len(), 1);
        assert_eq!(m.objects.len(), 1);
        assert_eq!(m.objects[0].value.kind(), "operator");
        assert_eq!(parse_manifest(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn unknown_coordinate_is_positioned() {
        let text = "[charts]\nM = x:even, xi:odd\n[objects]\noperator delta @ M = d[x]*d[zeta]\n";
        let d = parse_manifest(text).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].column), (4, 27));
        assert!(d[0].message.contains("zeta"));
    }

    #[test]
    fn odd_coefficient_in_even_slot_is_a_parity_error() {
        let text = "[charts]\nM = x:even, xi:odd\n[objects]\ndata D @ M odd = S: x*p[x]*p[x]\n";
        let d = parse_manifest(text).unwrap_err();
        assert_eq!(d[0].line, 4);
        assert!(d[0].message.contains("parity"), "{}", d[0].message);
    }

    #[test]
    fn order_bound_is_enforced_for_checks() {
        let text = "[charts]\nM = x:even, xi:odd\n[objects]\noperator q @ M = d[x]*d[x]*d[x]\n[checks]\njacobi q\n";
        let d = parse_manifest(text).unwrap_err();
        assert!(d[0].message.contains("order"));
    }

    #[test]
    fn empty_manifest() {
        assert_eq!(parse_manifest("").unwrap(), Manifest::default());
    }
}
