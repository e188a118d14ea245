//! Sparse multivariate polynomials over the rationals.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order is
//! lexicographic with variable 0 most significant. The greatest key is the
//! leading monomial used by division and by the monic normalization.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Q;

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::monomial(m, Q::one())
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let nvars = m.len();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => self.terms.keys().next().unwrap().iter().all(|&e| e == 0),
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant_term().is_one()
    }

    pub fn constant_term(&self) -> Q {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// Leading (lexicographically greatest) term.
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m[var]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m[var] > 0)
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    fn mul_term(&self, m: &Monomial, c: &Q) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(ma, ca)| (ma.iter().zip(m).map(|(a, b)| a + b).collect(), ca * c))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[var] > 0 {
                let mut m2 = m.clone();
                m2[var] -= 1;
                out.add_term(m2, c * Q::from_integer(BigInt::from(m[var])));
            }
        }
        out
    }

    /// Re-index variables: variable `i` becomes `map[i]` in a ring with
    /// `nvars` variables.
    pub fn reindex(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            let mut m2 = vec![0; nvars];
            for (i, &e) in m.iter().enumerate() {
                m2[map[i]] += e;
            }
            out.add_term(m2, c.clone());
        }
        out
    }

    /// Split off the trailing variables `head..nvars`: returns, per trailing
    /// exponent vector, the coefficient polynomial in the first `head`
    /// variables.
    pub fn split_tail(&self, head: usize) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let tail = m[head..].to_vec();
            out.entry(tail)
                .or_insert_with(|| Poly::zero(head))
                .add_term(m[..head].to_vec(), c.clone());
        }
        out
    }

    /// Divide by the leading coefficient. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => {
                let inv = lc.recip();
                self.scale(&inv)
            }
        }
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if divisor.is_constant() {
            return Some(self.scale(&divisor.constant_term().recip()));
        }
        let (lm_b, lc_b) = divisor
            .leading()
            .map(|(m, c)| (m.clone(), c.clone()))
            .unwrap();
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((lm_r, lc_r)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if lm_r.iter().zip(&lm_b).any(|(r, b)| r < b) {
                return None;
            }
            let m: Monomial = lm_r.iter().zip(&lm_b).map(|(r, b)| r - b).collect();
            let c = lc_r / &lc_b;
            rem = rem.sub(&divisor.mul_term(&m, &c));
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Coefficients with respect to `var`, each free of `var`.
    fn coeffs_in(&self, var: usize) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m[var];
            let mut m2 = m.clone();
            m2[var] = 0;
            out.entry(d)
                .or_insert_with(|| Poly::zero(self.nvars))
                .add_term(m2, c.clone());
        }
        out
    }

    fn leading_coeff_in(&self, var: usize) -> Poly {
        let d = self.degree_in(var);
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[var] == d {
                let mut m2 = m.clone();
                m2[var] = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    fn content_in(&self, var: usize) -> Poly {
        let mut acc = Poly::zero(self.nvars);
        for c in self.coeffs_in(var).into_values() {
            acc = gcd(&acc, &c);
            if acc.is_constant() {
                return Poly::one(self.nvars);
            }
        }
        acc
    }

    fn primitive_part_in(&self, var: usize) -> Poly {
        let c = self.content_in(var);
        self.div_exact(&c).expect("content divides")
    }

    fn pseudo_rem(&self, divisor: &Poly, var: usize) -> Poly {
        let db = divisor.degree_in(var);
        if db == 0 {
            // divisor is a unit over the coefficient ring's fraction field
            return Poly::zero(self.nvars);
        }
        let lcb = divisor.leading_coeff_in(var);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(var) >= db {
            let dr = r.degree_in(var);
            let lcr = r.leading_coeff_in(var);
            let mut shift = vec![0; self.nvars];
            shift[var] = dr - db;
            let t = lcr.mul_term(&shift, &Q::one()).mul(divisor);
            r = lcb.mul(&r).sub(&t);
        }
        r
    }

    /// Render with the given variable names, e.g. `3/2*x^2*y - 1`.
    pub fn format_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (v, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(String::from(names[v])),
                    _ => {
                        let mut f = String::new();
                        let _ = write!(f, "{}^{}", names[v], e);
                        factors.push(f);
                    }
                }
            }
            if factors.is_empty() || !a.is_one() {
                let _ = write!(s, "{}", a);
                if !factors.is_empty() {
                    s.push('*');
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

/// Greatest common divisor, monic in the leading-coefficient sense.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars;
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    if a == b {
        return a.monic();
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        let mut m = a.leading().unwrap().0.clone();
        for (t, _) in a.terms().chain(b.terms()) {
            m.iter_mut().zip(t).for_each(|(e, f)| *e = (*e).min(*f));
        }
        return Poly::one(n).mul_term(&m, &Q::one());
    }
    if a.total_degree() <= b.total_degree() {
        if b.div_exact(a).is_some() {
            return a.monic();
        }
    } else if a.div_exact(b).is_some() {
        return b.monic();
    }
    let v = (0..n)
        .filter(|&i| a.uses_var(i) || b.uses_var(i))
        .min_by_key(|&i| match (a.uses_var(i), b.uses_var(i)) {
            (true, true) => a.degree_in(i).max(b.degree_in(i)),
            _ => 0,
        })
        .unwrap();
    match (a.uses_var(v), b.uses_var(v)) {
        (false, true) => gcd(a, &b.content_in(v)),
        (true, false) => gcd(&a.content_in(v), b),
        _ => {
            let ca = a.content_in(v);
            let cb = b.content_in(v);
            let c = gcd(&ca, &cb);
            let mut p = a.div_exact(&ca).unwrap();
            let mut q = b.div_exact(&cb).unwrap();
            if p.degree_in(v) < q.degree_in(v) {
                core::mem::swap(&mut p, &mut q);
            }
            while !q.is_zero() {
                let r = p.pseudo_rem(&q, v);
                p = q;
                q = if r.is_zero() {
                    r
                } else {
                    r.primitive_part_in(v).monic()
                };
            }
            let g = if p.uses_var(v) {
                p.primitive_part_in(v)
            } else {
                Poly::one(n)
            };
            c.mul(&g).monic()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }
    fn c(n: i64) -> Poly {
        Poly::constant(2, q(n))
    }

    #[test]
    fn arithmetic_basics() {
        let p = x().add(&c(1));
        let sq = p.mul(&p);
        assert_eq!(sq, x().pow(2).add(&x().scale(&q(2))).add(&c(1)));
        assert_eq!(sq.derivative(0), p.scale(&q(2)));
        assert!(sq.sub(&sq).is_zero());
    }

    #[test]
    fn exact_division() {
        let a = x().add(&y());
        let b = x().sub(&y());
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a));
        assert_eq!(x().add(&c(1)).div_exact(&x()), None);
    }

    #[test]
    fn gcd_univariate_and_bivariate() {
        let a = x().add(&c(1)).mul(&x().sub(&c(2)));
        let b = x().add(&c(1)).mul(&x().add(&c(3)));
        assert_eq!(gcd(&a, &b), x().add(&c(1)));

        let common = x().mul(&y()).add(&c(1));
        let a = common.mul(&x().add(&y()));
        let b = common.mul(&x().sub(&y())).mul(&y());
        assert_eq!(gcd(&a, &b), common.monic());
        assert!(gcd(&x(), &y()).is_one());
    }

    #[test]
    fn gcd_with_content() {
        // y*(x+1) and y^2*(x-1): gcd y
        let a = y().mul(&x().add(&c(1)));
        let b = y().pow(2).mul(&x().sub(&c(1)));
        assert_eq!(gcd(&a, &b), y());
    }

    #[test]
    fn gcd_with_monomials_and_powers() {
        let a = x().pow(3).mul(&y());
        let b = x().pow(2).mul(&y().pow(2)).add(&x().pow(4).mul(&y()));
        assert_eq!(gcd(&a, &b), x().pow(2).mul(&y()));

        let f = x().pow(2).mul(&y()).sub(&c(1));
        let g = x().add(&y().scale(&q(3)));
        let a = f.pow(5).mul(&g);
        let b = f.pow(3).mul(&g.pow(2)).mul(&x());
        assert_eq!(gcd(&a, &b), f.pow(3).mul(&g).monic());
    }

    #[test]
    fn formatting() {
        let p = x()
            .pow(2)
            .scale(&Q::new(BigInt::from(3), BigInt::from(2)))
            .sub(&y())
            .add(&c(1));
        assert_eq!(p.format_with(&["x", "y"]), "3/2*x^2 - y + 1");
        assert_eq!(Poly::zero(2).format_with(&["x", "y"]), "0");
    }
}
