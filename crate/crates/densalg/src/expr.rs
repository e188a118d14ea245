//! The expression grammar shared by manifests and the REPL.
//!
//! Atoms are integers, coordinate names, `d[x]` (derivative), `p[x]`
//! (momentum) and `t` (the weight generator, with `t^{1/2}` for rational
//! weights). Operators are `+ - * / ^` with the usual precedence; `^` takes
//! an integer, `-integer` or a braced rational.

use std::fmt;

use densalg_core::density::DensityElement;
use densalg_core::diffop::DiffOperator;
use densalg_core::symbol::MomentumPolynomial;
use densalg_core::{Chart, GradedScalar, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct ExprError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub message: String,
}

impl ExprError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ExprError {
            offset,
            message: message.into(),
        }
    }
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_ascii_digit()) {
                    s.push(d);
                    chars.next();
                }
                out.push((i, Tok::Int(s)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, d)) = chars
                    .peek()
                    .filter(|(_, d)| d.is_alphanumeric() || *d == '_' || *d == '\'')
                {
                    s.push(d);
                    chars.next();
                }
                out.push((i, Tok::Ident(s)));
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            other => return Err(ExprError::new(i, format!("unexpected character `{other}`"))),
        };
        chars.next();
        out.push((i, tok));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(Q),
    Var(String),
    Deriv(String),
    Momentum(String),
    /// `t^w`.
    Weight(Q),
    Neg(Box<Spanned>),
    Add(Box<Spanned>, Box<Spanned>),
    Sub(Box<Spanned>, Box<Spanned>),
    Mul(Box<Spanned>, Box<Spanned>),
    Div(Box<Spanned>, Box<Spanned>),
    Pow(Box<Spanned>, i32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spanned {
    pub offset: usize,
    pub expr: Expr,
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        let at = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(ExprError::new(at, format!("expected {what}"))),
        }
    }

    fn sum(&mut self) -> Result<Spanned, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let offset = self.offset();
            let ctor: fn(Box<Spanned>, Box<Spanned>) -> Expr = match self.peek() {
                Some(Tok::Plus) => Expr::Add,
                Some(Tok::Minus) => Expr::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Spanned {
                offset,
                expr: ctor(Box::new(lhs), Box::new(rhs)),
            };
        }
    }

    fn product(&mut self) -> Result<Spanned, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let offset = self.offset();
            let ctor: fn(Box<Spanned>, Box<Spanned>) -> Expr = match self.peek() {
                Some(Tok::Star) => Expr::Mul,
                Some(Tok::Slash) => Expr::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Spanned {
                offset,
                expr: ctor(Box::new(lhs), Box::new(rhs)),
            };
        }
    }

    fn unary(&mut self) -> Result<Spanned, ExprError> {
        if self.peek() == Some(&Tok::Minus) {
            let offset = self.offset();
            self.bump();
            let inner = self.unary()?;
            return Ok(Spanned {
                offset,
                expr: Expr::Neg(Box::new(inner)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Spanned, ExprError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let offset = self.offset();
        self.bump();
        let e = self.exponent()?;
        if let Expr::Weight(w) = &base.expr {
            if *w == Q::from_integer(1.into()) {
                return Ok(Spanned {
                    offset: base.offset,
                    expr: Expr::Weight(e),
                });
            }
        }
        if !e.is_integer() {
            return Err(ExprError::new(
                offset,
                "only `t` takes a fractional exponent",
            ));
        }
        let n: i32 = e
            .to_integer()
            .try_into()
            .map_err(|_| ExprError::new(offset, "exponent out of range"))?;
        Ok(Spanned {
            offset,
            expr: Expr::Pow(Box::new(base), n),
        })
    }

    fn exponent(&mut self) -> Result<Q, ExprError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(s)) => Ok(parse_q(&s)),
            Some(Tok::Minus) => match self.bump() {
                Some(Tok::Int(s)) => Ok(-parse_q(&s)),
                _ => Err(ExprError::new(at, "expected an integer exponent")),
            },
            Some(Tok::LBrace) => {
                let neg = if self.peek() == Some(&Tok::Minus) {
                    self.bump();
                    true
                } else {
                    false
                };
                let num = self.int("numerator")?;
                let mut q = parse_q(&num);
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    let den = parse_q(&self.int("denominator")?);
                    if den == Q::from_integer(0.into()) {
                        return Err(ExprError::new(at, "zero denominator"));
                    }
                    q /= den;
                }
                self.expect(Tok::RBrace, "`}`")?;
                Ok(if neg { -q } else { q })
            }
            _ => Err(ExprError::new(at, "expected an exponent")),
        }
    }

    fn int(&mut self, what: &str) -> Result<String, ExprError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(s)) => Ok(s),
            _ => Err(ExprError::new(at, format!("expected an integer {what}"))),
        }
    }

    fn atom(&mut self) -> Result<Spanned, ExprError> {
        let offset = self.offset();
        let expr = match self.bump() {
            Some(Tok::Int(s)) => Expr::Int(parse_q(&s)),
            Some(Tok::Ident(name))
                if (name == "d" || name == "p") && self.peek() == Some(&Tok::LBracket) =>
            {
                self.bump();
                let at = self.offset();
                let inner = match self.bump() {
                    Some(Tok::Ident(n)) => n,
                    _ => return Err(ExprError::new(at, "expected a coordinate name")),
                };
                self.expect(Tok::RBracket, "`]`")?;
                if name == "d" {
                    Expr::Deriv(inner)
                } else {
                    Expr::Momentum(inner)
                }
            }
            Some(Tok::Ident(name)) if name == "t" => Expr::Weight(Q::from_integer(1.into())),
            Some(Tok::Ident(name)) => Expr::Var(name),
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(inner);
            }
            Some(_) => return Err(ExprError::new(offset, "expected an expression")),
            None => return Err(ExprError::new(offset, "unexpected end of expression")),
        };
        Ok(Spanned { offset, expr })
    }
}

fn parse_q(digits: &str) -> Q {
    digits.parse().expect("lexer yields digits")
}

pub fn parse(src: &str) -> Result<Spanned, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
    };
    let e = p.sum()?;
    if p.pos < toks.len() {
        return Err(ExprError::new(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

/// The value of an expression, in the smallest kind that holds it.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(GradedScalar),
    Symbol(MomentumPolynomial),
    Operator(DiffOperator),
    Density(DensityElement),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Symbol(_) => "symbol",
            Value::Operator(_) => "operator",
            Value::Density(_) => "density",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(s) => write!(f, "{s}"),
            Value::Symbol(s) => write!(f, "{s}"),
            Value::Operator(d) => write!(f, "{d}"),
            Value::Density(d) => write!(f, "{d}"),
        }
    }
}

fn err<T>(offset: usize, e: impl fmt::Display) -> Result<T, ExprError> {
    Err(ExprError::new(offset, e.to_string()))
}

fn to_operator(
    v: Value,
    parity_hint: Option<densalg_core::Parity>,
    at: usize,
) -> Result<DiffOperator, ExprError> {
    match v {
        Value::Operator(d) => Ok(d),
        Value::Scalar(s) if s.is_zero() => Ok(DiffOperator::zero(
            s.chart(),
            parity_hint.unwrap_or(densalg_core::Parity::Even),
        )),
        Value::Scalar(s) => DiffOperator::multiplication(&s).or_else(|e| err(at, e)),
        other => err(
            at,
            format!("a {} cannot be used as an operator", other.kind()),
        ),
    }
}

fn to_symbol(v: Value, at: usize) -> Result<MomentumPolynomial, ExprError> {
    match v {
        Value::Symbol(s) => Ok(s),
        Value::Scalar(s) => Ok(MomentumPolynomial::from_function(&s)),
        other => err(at, format!("a {} cannot be used as a symbol", other.kind())),
    }
}

fn to_density(v: Value, at: usize) -> Result<DensityElement, ExprError> {
    match v {
        Value::Density(d) => Ok(d),
        Value::Scalar(s) => Ok(DensityElement::pure(Q::from_integer(0.into()), s)),
        other => err(
            at,
            format!("a {} cannot be used as a density", other.kind()),
        ),
    }
}

fn rank(v: &Value) -> u8 {
    match v {
        Value::Scalar(_) => 0,
        Value::Symbol(_) => 1,
        Value::Operator(_) => 2,
        Value::Density(_) => 3,
    }
}

fn op_parity(v: &Value) -> Option<densalg_core::Parity> {
    match v {
        Value::Operator(d) => Some(d.parity()),
        _ => None,
    }
}

/// Bring two values to a common kind.
fn unify(a: Value, b: Value, at: usize) -> Result<(Value, Value), ExprError> {
    let (ra, rb) = (rank(&a), rank(&b));
    if ra == rb {
        return Ok((a, b));
    }
    if ra != 0 && rb != 0 {
        return err(
            at,
            format!("cannot combine a {} with a {}", a.kind(), b.kind()),
        );
    }
    let target = ra.max(rb);
    let hint = op_parity(&a).or(op_parity(&b));
    let lift = |v: Value| -> Result<Value, ExprError> {
        Ok(match target {
            1 => Value::Symbol(to_symbol(v, at)?),
            2 => Value::Operator(to_operator(v, hint, at)?),
            _ => Value::Density(to_density(v, at)?),
        })
    };
    Ok((lift(a)?, lift(b)?))
}

fn add(a: Value, b: Value, at: usize) -> Result<Value, ExprError> {
    match unify(a, b, at)? {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(&x + &y)),
        (Value::Symbol(x), Value::Symbol(y)) => {
            x.try_add(&y).map(Value::Symbol).or_else(|e| err(at, e))
        }
        (Value::Operator(x), Value::Operator(y)) => {
            x.try_add(&y).map(Value::Operator).or_else(|e| err(at, e))
        }
        (Value::Density(x), Value::Density(y)) => {
            x.try_add(&y).map(Value::Density).or_else(|e| err(at, e))
        }
        _ => unreachable!("unified"),
    }
}

fn neg(v: Value) -> Value {
    match v {
        Value::Scalar(x) => Value::Scalar(-&x),
        Value::Symbol(x) => Value::Symbol(x.scale(&Q::from_integer((-1).into()))),
        Value::Operator(x) => Value::Operator(-&x),
        Value::Density(x) => Value::Density(x.neg()),
    }
}

fn mul(a: Value, b: Value, at: usize) -> Result<Value, ExprError> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(&x * &y)),
        (Value::Scalar(x), Value::Operator(d)) => {
            if x.is_zero() {
                return Ok(Value::Operator(DiffOperator::zero(d.chart(), d.parity())));
            }
            d.left_mul_scalar(&x)
                .map(Value::Operator)
                .or_else(|e| err(at, e))
        }
        (Value::Operator(d), Value::Scalar(x)) => {
            let m = to_operator(Value::Scalar(x), Some(densalg_core::Parity::Even), at)?;
            d.compose(&m).map(Value::Operator).or_else(|e| err(at, e))
        }
        (Value::Operator(x), Value::Operator(y)) => {
            x.compose(&y).map(Value::Operator).or_else(|e| err(at, e))
        }
        (a, b) => match unify(a, b, at)? {
            (Value::Symbol(x), Value::Symbol(y)) => {
                x.try_mul(&y).map(Value::Symbol).or_else(|e| err(at, e))
            }
            (Value::Density(x), Value::Density(y)) => {
                x.mul(&y).map(Value::Density).or_else(|e| err(at, e))
            }
            (x, y) => err(
                at,
                format!("cannot multiply a {} by a {}", x.kind(), y.kind()),
            ),
        },
    }
}

fn pow(v: Value, n: i32, at: usize) -> Result<Value, ExprError> {
    if let Value::Scalar(s) = &v {
        return s.pow(n).map(Value::Scalar).or_else(|e| err(at, e));
    }
    if n < 0 {
        return err(at, format!("negative power of a {}", v.kind()));
    }
    let mut acc: Option<Value> = None;
    for _ in 0..n {
        acc = Some(match acc {
            None => v.clone(),
            Some(a) => mul(a, v.clone(), at)?,
        });
    }
    match acc {
        Some(a) => Ok(a),
        None => match v {
            Value::Symbol(s) => Ok(Value::Symbol(MomentumPolynomial::from_function(
                &GradedScalar::one(s.base()),
            ))),
            Value::Operator(d) => Ok(Value::Operator(DiffOperator::identity(d.chart()))),
            Value::Density(d) => Ok(Value::Density(DensityElement::one(d.chart()))),
            Value::Scalar(_) => unreachable!(),
        },
    }
}

pub fn eval(e: &Spanned, chart: &Chart) -> Result<Value, ExprError> {
    let at = e.offset;
    match &e.expr {
        Expr::Int(q) => Ok(Value::Scalar(GradedScalar::constant(chart, q.clone()))),
        Expr::Var(name) => GradedScalar::named(chart, name)
            .map(Value::Scalar)
            .or_else(|_| err(at, format!("unknown coordinate `{name}`"))),
        Expr::Deriv(name) => match chart.index_of(name) {
            Ok(i) => Ok(Value::Operator(DiffOperator::partial(chart, i))),
            Err(_) => err(at, format!("unknown coordinate `{name}`")),
        },
        Expr::Momentum(name) => match chart.index_of(name) {
            Ok(i) => Ok(Value::Symbol(MomentumPolynomial::momentum(chart, i))),
            Err(_) => err(at, format!("unknown coordinate `{name}`")),
        },
        Expr::Weight(w) => Ok(Value::Density(DensityElement::pure(
            w.clone(),
            GradedScalar::one(chart),
        ))),
        Expr::Neg(x) => Ok(neg(eval(x, chart)?)),
        Expr::Add(x, y) => add(eval(x, chart)?, eval(y, chart)?, at),
        Expr::Sub(x, y) => add(eval(x, chart)?, neg(eval(y, chart)?), at),
        Expr::Mul(x, y) => mul(eval(x, chart)?, eval(y, chart)?, at),
        Expr::Div(x, y) => {
            let den = match eval(y, chart)? {
                Value::Scalar(s) => s.inverse().or_else(|e| err(y.offset, e))?,
                other => return err(y.offset, format!("cannot divide by a {}", other.kind())),
            };
            mul(eval(x, chart)?, Value::Scalar(den), at)
        }
        Expr::Pow(x, n) => pow(eval(x, chart)?, *n, at),
    }
}

/// Parse and evaluate in one step.
pub fn evaluate(src: &str, chart: &Chart) -> Result<Value, ExprError> {
    eval(&parse(src)?, chart)
}
