//! Expression trees, the input language, evaluation and symbolic manipulation.

pub mod abstraction;
mod ast;
pub mod derive;
pub mod eval;
mod function;
pub mod parser;
mod print;
pub mod simplify;

pub use abstraction::{
    abstract_fp, substitute_zero_noise, AbstractedExpr, AbstractionOptions, NoiseBounds,
    NoiseEntry, NoiseOrigin, NoiseSelection, OpKind, PrecisionSpec,
};
pub use ast::{Expr, ExprKind, NoiseKind, NoiseSym, Symbol};
pub use derive::{derive, derive_var};
pub use eval::{
    eval_float, eval_fraction, eval_interval, eval_rational, eval_rational_at, BoxEnv, Env,
    EvalError, PointEnv, PointValue,
};
pub use function::{FunctionSpec, SpecError};
pub use parser::{parse, parse_expr, parse_file, ParseError};
pub use simplify::simplify;
