#![no_std]
#![allow(clippy::needless_range_loop)]
//! Exact symbolic engine for second-order operators on super charts,
//! brackets, densities and operator pencils.

extern crate alloc;

pub mod bv;
pub mod density;
pub mod diffop;
pub mod error;
pub mod graded;
pub mod pencil;
pub mod random;
pub mod symbol;

pub use error::{Error, Result};
pub use graded::{q, Chart, CoordinateChange, GradedScalar, Parity, Q};
