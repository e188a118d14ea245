//! Exact graded-commutative coefficient algebra: polynomials and rational
//! functions in the even coordinates tensored with the Grassmann algebra of
//! the odd ones.

pub mod change;
pub mod chart;
pub mod matrix;
pub mod poly;
pub mod ratfunc;
pub mod scalar;

pub type Q = num_rational::BigRational;

pub use change::CoordinateChange;
pub use chart::{Chart, Coord, Parity, MAX_ODD};
pub use matrix::SuperMatrix;
pub use poly::Poly;
pub use ratfunc::RatFunc;
pub use scalar::{GradedScalar, GrassMono};

/// `n/d` as an exact rational.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
