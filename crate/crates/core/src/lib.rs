//! Validated computation for converse KAM theorems on four-dimensional
//! symplectic maps, plus a non-rigorous laboratory for Birkhoff minimizing
//! orbits and rational rotation-vector approximation.
//!
//! The rigorous half of the crate builds up from exact decimal arithmetic
//! ([`Dec`]) and interval enclosures ([`Interval`]) through validated
//! special functions, prisms in the extended phase space, and the cone
//! criteria, to a subdivide-and-conquer proof engine that certifies the
//! non-existence of invariant Lagrangian tori over a parameter box.
//! The non-rigorous half ([`lab`], [`rotation`]) runs in hardware floats.

pub mod cones;
pub mod dec;
pub mod interval;
pub mod lab;
pub mod map;
pub mod matrix;
pub mod prism;
pub mod proof;
pub mod rotation;
pub mod special;

pub use dec::Dec;
pub use interval::{BoundedExpr, BoundedTerm, Interval};
pub use special::TrigConfig;

use thiserror::Error;

/// Errors from the exact-arithmetic layer.
#[derive(Debug, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    SqrtOfNegative,
    #[error("{0}")]
    Parse(String),
    #[error("argument too large for the stored pi: reducing {angle_digits} integer digits would spend more than the {budget} available")]
    PrecisionLoss { angle_digits: i64, budget: i64 },
}

/// Errors from the rigorous prism/proof machinery.
#[derive(Debug, Error)]
pub enum RigorError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("singular matrix in validated inversion")]
    SingularMatrix,
    #[error("validated inversion could not reach the requested error bound")]
    InversionTooCoarse,
    #[error("fixed-form fattener is singular (det A_uv = 0)")]
    SingularFattener,
    #[error("fattener requires a worklist-shaped prism (zero u-extent)")]
    BadPrismShape,
    #[error("parse error at line {line}: {msg}")]
    Backup { line: usize, msg: String },
}
