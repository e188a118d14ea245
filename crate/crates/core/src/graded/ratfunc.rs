//! Reduced rational functions `num / den` over the rationals.
//!
//! Canonical form: `gcd(num, den) = 1` and `den` has leading coefficient 1.
//! Zero is `0 / 1`. With this normalization equality is structural.

use alloc::format;
use alloc::string::String;

use num_traits::{One, Zero};

use super::poly::{gcd, Poly};
use super::Q;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero(nvars: usize) -> Self {
        RatFunc {
            num: Poly::zero(nvars),
            den: Poly::one(nvars),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::from_poly(Poly::one(nvars))
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::from_poly(Poly::constant(nvars, c))
    }

    pub fn from_poly(num: Poly) -> Self {
        let n = num.nvars();
        RatFunc {
            num,
            den: Poly::one(n),
        }
    }

    /// Build and reduce `num / den`. Panics if `den` is zero.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let n = num.nvars();
        if num.is_zero() {
            return Self::zero(n);
        }
        if den.is_constant() {
            let c = den.constant_term().recip();
            return RatFunc {
                num: num.scale(&c),
                den: Poly::one(n),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let lc = den.leading().map(|(_, c)| c.clone()).unwrap();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip();
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    /// The constant value when this is a constant.
    pub fn as_constant(&self) -> Option<Q> {
        self.is_constant().then(|| self.num.constant_term())
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return Self::from_poly(self.num.add(&other.num));
        }
        if self.den == other.den {
            return Self::new(self.num.add(&other.num), self.den.clone());
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            return Self::new(
                self.num.mul(&other.den).add(&other.num.mul(&self.den)),
                self.den.mul(&other.den),
            );
        }
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&d2).add(&other.num.mul(&d1));
        if num.is_zero() {
            return Self::zero(self.nvars());
        }
        // any common factor of num and den divides g
        let h = gcd(&num, &g);
        let den = self.den.mul(&d2);
        if h.is_one() {
            Self::normalized(num, den)
        } else {
            Self::normalized(num.div_exact(&h).unwrap(), den.div_exact(&h).unwrap())
        }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> RatFunc {
        if c.is_zero() {
            return Self::zero(self.nvars());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars());
        }
        if self.den.is_one() && other.den.is_one() {
            return Self::from_poly(self.num.mul(&other.num));
        }
        // cross-cancel before multiplying to keep sizes down
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        Self::normalized(n1.mul(&n2), d1.mul(&d2))
    }

    /// `num / den` with coprime arguments; only fixes the leading coefficient.
    fn normalized(num: Poly, den: Poly) -> Self {
        let lc = den.leading().map(|(_, c)| c.clone()).unwrap();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip();
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        Some(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &RatFunc) -> Option<RatFunc> {
        other.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, e: i32) -> Option<RatFunc> {
        if e < 0 {
            return self.inv().and_then(|i| i.pow(-e));
        }
        let e = e as u32;
        Some(RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        })
    }

    pub fn derivative(&self, var: usize) -> RatFunc {
        if self.den.is_one() {
            return Self::from_poly(self.num.derivative(var));
        }
        let n = self
            .num
            .derivative(var)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(var)));
        Self::new(n, self.den.mul(&self.den))
    }

    pub fn format_with(&self, names: &[&str]) -> String {
        if self.den.is_one() {
            return self.num.format_with(names);
        }
        format!(
            "({})/({})",
            self.num.format_with(names),
            self.den.format_with(names)
        )
    }
}

impl Default for RatFunc {
    fn default() -> Self {
        Self::zero(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn x() -> Poly {
        Poly::var(1, 0)
    }
    fn c(n: i64) -> Poly {
        Poly::constant(1, Q::from_integer(BigInt::from(n)))
    }

    #[test]
    fn reduces_to_lowest_terms() {
        let r = RatFunc::new(
            x().pow(2).sub(&c(1)),
            x().sub(&c(1)).scale(&Q::from_integer(2.into())),
        );
        let expect = RatFunc::from_poly(x().add(&c(1)).scale(&Q::new(1.into(), 2.into())));
        assert_eq!(r, expect);
        assert!(r.is_polynomial());
    }

    #[test]
    fn sum_of_fractions() {
        // 1/x + 1/(x+1) = (2x+1)/(x^2+x)
        let a = RatFunc::new(c(1), x());
        let b = RatFunc::new(c(1), x().add(&c(1)));
        let s = a.add(&b);
        assert_eq!(
            s,
            RatFunc::new(
                x().scale(&Q::from_integer(2.into())).add(&c(1)),
                x().pow(2).add(&x())
            )
        );
        assert!(s.sub(&a).sub(&b).is_zero());
    }

    #[test]
    fn quotient_rule() {
        // d/dx (1/x^3) = -3/x^4
        let r = RatFunc::new(c(1), x().pow(3));
        assert_eq!(r.derivative(0), RatFunc::new(c(-3), x().pow(4)));
    }

    #[test]
    fn inverse_round_trip() {
        let r = RatFunc::new(x().add(&c(2)), x().pow(2).add(&c(1)));
        assert!(r.mul(&r.inv().unwrap()).is_one());
        assert_eq!(r.format_with(&["x"]), "(x + 2)/(x^2 + 1)");
    }
}
