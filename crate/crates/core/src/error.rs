use alloc::string::String;

use crate::graded::{Parity, Q};

/// Everything that can go wrong in the algebraic layer.
///
/// Mathematical failures of a checked identity are not errors; they are
/// reported through the certificate types. These variants cover malformed
/// input and violated preconditions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("chart has {0} odd coordinates, at most {max} supported", max = crate::graded::MAX_ODD)]
    TooManyOdd(usize),
    #[error("element with vanishing body is not invertible")]
    ZeroBody,
    #[error("parity mismatch: expected {expected:?}, found {found}")]
    ParityMismatch { expected: Parity, found: String },
    #[error("operator order {found} exceeds the allowed {max}")]
    OrderTooHigh { found: usize, max: usize },
    #[error("order {order} operator does not generate a bi-derivation: {witness}")]
    NotBiderivation { order: usize, witness: String },
    #[error("singular weight {0}: recovery requires a weight different from 0, 1/2 and 1")]
    SingularWeight(Q),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inverse map does not invert the forward map at coordinate `{0}`")]
    InverseMismatch(String),
    #[error("expected an odd object")]
    ExpectedOdd,
    #[error("expected a density of pure weight {expected}")]
    WrongWeight { expected: Q },
    #[error("bracket tensor is degenerate")]
    Degenerate,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
