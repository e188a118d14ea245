use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Add;

use crate::error::{Error, Result};

/// Upper bound on odd coordinates of a user chart. The Grassmann algebra has
/// `2^n_odd` basis monomials, so this is a desk-scale cap. Phase-space charts
/// built internally may carry twice as many.
pub const MAX_ODD: usize = 8;

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(b: u32) -> Parity {
        if b & 1 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// `(-1)^(self * other)` as a boolean "negate" flag.
    pub fn sign_with(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }
}

impl Add for Parity {
    type Output = Parity;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() ^ rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coord {
    pub name: String,
    pub parity: Parity,
    /// Position among coordinates of the same parity.
    pub slot: usize,
}

#[derive(Debug)]
struct ChartInner {
    coords: Vec<Coord>,
    even: Vec<usize>,
    odd: Vec<usize>,
    even_names: Vec<String>,
    phase: Option<Chart>,
}

/// Ordered list of named coordinates with parities.
///
/// The coordinate order is fixed and drives every normal form: even
/// coordinates index polynomial variables, odd coordinates index bits of a
/// Grassmann monomial. Cloning is cheap.
#[derive(Clone)]
pub struct Chart(Arc<ChartInner>);

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.coords.iter().map(|c| c.name.as_str()).collect();
        write!(f, "Chart[{}]", names.join(", "))
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Chart) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.coords == other.0.coords
    }
}

impl Eq for Chart {}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[(S, Parity)]) -> Result<Chart> {
        let n_odd = coords.iter().filter(|(_, p)| p.is_odd()).count();
        if n_odd > MAX_ODD {
            return Err(Error::TooManyOdd(n_odd));
        }
        let base = Self::build(coords)?;
        let phase_coords: Vec<(String, Parity)> = coords
            .iter()
            .map(|(n, p)| (String::from(n.as_ref()), *p))
            .chain(
                coords
                    .iter()
                    .map(|(n, p)| (format!("p[{}]", n.as_ref()), *p)),
            )
            .collect();
        let phase = Self::build(&phase_coords)?;
        let mut inner = Arc::try_unwrap(base.0).expect("fresh chart");
        inner.phase = Some(phase);
        Ok(Chart(Arc::new(inner)))
    }

    fn build<S: AsRef<str>>(coords: &[(S, Parity)]) -> Result<Chart> {
        let mut out = Vec::with_capacity(coords.len());
        let (mut even, mut odd, mut even_names) = (Vec::new(), Vec::new(), Vec::new());
        for (i, (name, parity)) in coords.iter().enumerate() {
            let name = name.as_ref();
            if out.iter().any(|c: &Coord| c.name == name) {
                return Err(Error::DuplicateCoordinate(String::from(name)));
            }
            let slot = match parity {
                Parity::Even => {
                    even.push(i);
                    even_names.push(String::from(name));
                    even.len() - 1
                }
                Parity::Odd => {
                    odd.push(i);
                    odd.len() - 1
                }
            };
            out.push(Coord {
                name: String::from(name),
                parity: *parity,
                slot,
            });
        }
        Ok(Chart(Arc::new(ChartInner {
            coords: out,
            even,
            odd,
            even_names,
            phase: None,
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    pub fn n_even(&self) -> usize {
        self.0.even.len()
    }

    pub fn n_odd(&self) -> usize {
        self.0.odd.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.0.coords
    }

    pub fn coord(&self, i: usize) -> &Coord {
        &self.0.coords[i]
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.0.coords[i].parity
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.0
            .coords
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCoordinate(String::from(name)))
    }

    /// Chart index of the `slot`-th even coordinate.
    pub fn even_index(&self, slot: usize) -> usize {
        self.0.even[slot]
    }

    /// Chart index of the `slot`-th odd coordinate.
    pub fn odd_index(&self, slot: usize) -> usize {
        self.0.odd[slot]
    }

    pub fn even_names(&self) -> Vec<&str> {
        self.0.even_names.iter().map(|s| s.as_str()).collect()
    }

    pub fn is_purely_odd(&self) -> bool {
        self.n_even() == 0
    }

    /// Coordinates `(x^a, p_a)` of the cotangent bundle, with `p_a` of the
    /// same parity as `x^a`. Base coordinates come first.
    pub fn phase_space(&self) -> &Chart {
        self.0
            .phase
            .as_ref()
            .expect("phase space of a phase-space chart")
    }

    /// Index in [`Chart::phase_space`] of the momentum `p_a` paired with
    /// coordinate `a`.
    pub fn momentum_of(&self, a: usize) -> usize {
        self.dim() + a
    }

    /// `(n_even | n_odd)` signature string, e.g. `R^{2|2}`.
    pub fn signature(&self) -> String {
        format!("R^{{{}|{}}}", self.n_even(), self.n_odd())
    }
}
