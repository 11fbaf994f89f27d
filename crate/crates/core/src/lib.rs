//! Sound bounds on floating-point roundoff errors of straight-line arithmetic.

pub mod dataflow;
pub mod error;
pub mod exact;
pub mod expr;
pub mod range;
pub mod result;
pub mod sampler;
pub mod subdivision;
pub mod taylor;
