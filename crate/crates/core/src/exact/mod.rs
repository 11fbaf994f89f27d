//! Exact numeric substrate: rationals, intervals, affine forms and input boxes.

mod affine;
mod domain;
mod dyadic;
pub mod float;
mod interval;
mod rational;

pub use affine::{AffineForm, NoiseIndex, NoiseSource, COMPACT_DENOM_BITS};
pub use domain::{DomainError, InputBox};
pub use dyadic::{Dyadic, DyadicInterval};
pub use interval::{rat_sqrt_outward, Interval, SQRT_PRECISION_BITS};
pub use rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by an interval containing zero")]
    DivisionByZeroRange,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval {
        lo: Box<Rational>,
        hi: Box<Rational>,
    },
    #[error("malformed number `{0}`")]
    Malformed(String),
}
