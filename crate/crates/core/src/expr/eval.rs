//! Evaluators: interval (the workhorse of every sound bound), exact rational
//! at a point, and concrete IEEE-754 floating point.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::abstraction::{NoiseBounds, PrecisionSpec};
use super::ast::{Expr, ExprKind, NoiseSym};
use crate::exact::float::{dyadic_to_f64, round_nearest, BinaryFormat, Rounded};
use crate::exact::{rat_sqrt_outward, ArithError, InputBox, Interval, Rational};

/// Precision of the square-root enclosures used by point evaluation.
pub const POINT_SQRT_BITS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero at the evaluation point")]
    DivisionByZeroPoint,
    #[error("division by a range containing zero")]
    DivisionByZeroRange,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("floating-point evaluation produced NaN or infinity")]
    InvalidFloatOp,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unbound noise symbol {0}")]
    UnboundNoise(NoiseSym),
    #[error("precision `{0}` cannot be evaluated concretely")]
    UnsupportedPrecision(String),
}

impl From<ArithError> for EvalError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::DivisionByZero => EvalError::DivisionByZeroPoint,
            ArithError::NegativeSqrt => EvalError::NegativeSqrt,
            _ => EvalError::DivisionByZeroRange,
        }
    }
}

/// Interval values of the free symbols of an expression.
pub trait Env {
    fn var(&self, name: &str) -> Option<Interval>;
    fn noise(&self, sym: NoiseSym) -> Option<Interval>;
}

/// Real variables range over a box; noise symbols are either pinned to zero
/// or range over their bounds.
#[derive(Clone, Copy)]
pub struct BoxEnv<'a> {
    pub vars: &'a InputBox,
    pub noise: Option<&'a NoiseBounds>,
}

impl<'a> BoxEnv<'a> {
    pub fn real(vars: &'a InputBox) -> Self {
        BoxEnv { vars, noise: None }
    }

    pub fn with_noise(vars: &'a InputBox, noise: &'a NoiseBounds) -> Self {
        BoxEnv {
            vars,
            noise: Some(noise),
        }
    }
}

impl Env for BoxEnv<'_> {
    fn var(&self, name: &str) -> Option<Interval> {
        self.vars.get(name).cloned()
    }

    fn noise(&self, sym: NoiseSym) -> Option<Interval> {
        Some(match self.noise {
            Some(b) => Interval::symmetric(b.bound(sym)),
            None => Interval::zero(),
        })
    }
}

/// A single point, with explicit noise values (unlisted noise reads as zero).
#[derive(Clone, Debug, Default)]
pub struct PointEnv {
    pub vars: HashMap<String, Rational>,
    pub noise: HashMap<NoiseSym, Rational>,
}

impl PointEnv {
    pub fn new(vars: impl IntoIterator<Item = (String, Rational)>) -> Self {
        PointEnv {
            vars: vars.into_iter().collect(),
            noise: HashMap::new(),
        }
    }

    /// Point given in the declaration order of `domain`.
    pub fn from_box_order(domain: &InputBox, coords: &[Rational]) -> Self {
        PointEnv::new(
            domain
                .names()
                .map(str::to_string)
                .zip(coords.iter().cloned()),
        )
    }

    pub fn set_noise(&mut self, sym: NoiseSym, value: Rational) {
        self.noise.insert(sym, value);
    }
}

impl Env for PointEnv {
    fn var(&self, name: &str) -> Option<Interval> {
        self.vars.get(name).cloned().map(Interval::point)
    }

    fn noise(&self, sym: NoiseSym) -> Option<Interval> {
        Some(Interval::point(
            self.noise.get(&sym).cloned().unwrap_or_else(Rational::zero),
        ))
    }
}

/// Bottom-up interval evaluation.
pub fn eval_interval(e: &Expr, env: &dyn Env, sqrt_bits: u32) -> Result<Interval, EvalError> {
    Ok(match e.kind() {
        ExprKind::Const(c) => Interval::point(c.clone()),
        ExprKind::Var(v) => env
            .var(v)
            .ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?,
        ExprKind::Noise(s) => env.noise(*s).ok_or(EvalError::UnboundNoise(*s))?,
        ExprKind::Neg(a) => eval_interval(a, env, sqrt_bits)?.neg(),
        ExprKind::Add(a, b) => {
            eval_interval(a, env, sqrt_bits)?.add(&eval_interval(b, env, sqrt_bits)?)
        }
        ExprKind::Sub(a, b) => {
            eval_interval(a, env, sqrt_bits)?.sub(&eval_interval(b, env, sqrt_bits)?)
        }
        ExprKind::Mul(a, b) => {
            let x = eval_interval(a, env, sqrt_bits)?;
            if x.is_point() && x.lo().is_zero() {
                // 0 * anything finite.
                eval_interval(b, env, sqrt_bits)?;
                return Ok(x);
            }
            x.mul(&eval_interval(b, env, sqrt_bits)?)
        }
        ExprKind::Div(a, b) => {
            let x = eval_interval(a, env, sqrt_bits)?;
            let y = eval_interval(b, env, sqrt_bits)?;
            if y.is_point() && y.lo().is_zero() {
                return Err(EvalError::DivisionByZeroPoint);
            }
            x.div(&y).map_err(|_| EvalError::DivisionByZeroRange)?
        }
        ExprKind::Sqrt(a) => {
            let x = eval_interval(a, env, sqrt_bits)?;
            x.sqrt_with(sqrt_bits)
                .map_err(|_| EvalError::NegativeSqrt)?
        }
    })
}

/// Value of an expression at a rational point. Exact unless a square root of
/// a non-square was taken, in which case `value` is the midpoint of an
/// enclosure of radius `radius`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointValue {
    pub value: Rational,
    pub radius: Rational,
}

impl PointValue {
    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn enclosure(&self) -> Interval {
        Interval::new(&self.value - &self.radius, &self.value + &self.radius).expect("radius >= 0")
    }
}

/// Real (infinite-precision) value of `e` at a point.
pub fn eval_rational(e: &Expr, env: &PointEnv) -> Result<PointValue, EvalError> {
    if let Some(exact) = eval_exact(e, env) {
        return exact.map(|value| PointValue {
            value,
            radius: Rational::zero(),
        });
    }
    let iv = eval_interval(e, env, POINT_SQRT_BITS).map_err(|err| match err {
        // A point divisor whose enclosure touches zero.
        EvalError::DivisionByZeroRange => EvalError::DivisionByZeroPoint,
        other => other,
    })?;
    Ok(PointValue {
        value: iv.midpoint(),
        radius: iv.width().half(),
    })
}

/// Exact evaluation on unreduced fractions `(num, den)` with `den > 0`;
/// reducing once at the end is much cheaper than after every operation.
/// `None` when a square root is irrational.
fn eval_exact(e: &Expr, env: &PointEnv) -> Option<Result<Rational, EvalError>> {
    Some(
        eval_fraction(e, env)?
            .and_then(|(p, q)| Rational::new(p, q).map_err(|_| EvalError::DivisionByZeroPoint)),
    )
}

type Frac = (BigInt, BigInt);

/// Exact value at a point as an unreduced fraction `(num, den)` with
/// `den > 0`, or `None` when a square root is irrational.
pub fn eval_fraction(e: &Expr, env: &PointEnv) -> Option<Result<(BigInt, BigInt), EvalError>> {
    frac_eval(e, env)
}

fn frac(r: &Rational) -> Frac {
    (r.numer().clone(), r.denom().clone())
}

fn frac_eval(e: &Expr, env: &PointEnv) -> Option<Result<Frac, EvalError>> {
    let ev = |x: &Expr| frac_eval(x, env);
    let both = |a: &Expr, b: &Expr| -> Option<Result<(Frac, Frac), EvalError>> {
        Some(match (ev(a)?, ev(b)?) {
            (Ok(x), Ok(y)) => Ok((x, y)),
            (Err(err), _) | (_, Err(err)) => Err(err),
        })
    };
    Some(match e.kind() {
        ExprKind::Const(c) => Ok(frac(c)),
        ExprKind::Var(v) => env
            .vars
            .get(v.as_ref())
            .map(frac)
            .ok_or_else(|| EvalError::UnboundVariable(v.to_string())),
        ExprKind::Noise(s) => Ok(env
            .noise
            .get(s)
            .map_or_else(|| frac(&Rational::zero()), frac)),
        ExprKind::Neg(a) => ev(a)?.map(|(p, q)| (-p, q)),
        ExprKind::Add(a, b) => both(a, b)?.map(|((p, q), (r, s))| (&p * &s + &r * &q, q * s)),
        ExprKind::Sub(a, b) => both(a, b)?.map(|((p, q), (r, s))| (&p * &s - &r * &q, q * s)),
        ExprKind::Mul(a, b) => both(a, b)?.map(|((p, q), (r, s))| (p * r, q * s)),
        ExprKind::Div(a, b) => both(a, b)?.and_then(|((p, q), (r, s))| {
            if r.is_zero() {
                return Err(EvalError::DivisionByZeroPoint);
            }
            let (num, den) = (p * s, q * r);
            Ok(if den.is_negative() {
                (-num, -den)
            } else {
                (num, den)
            })
        }),
        ExprKind::Sqrt(a) => match ev(a)? {
            Ok((p, _)) if p.is_negative() => Err(EvalError::NegativeSqrt),
            Ok((p, q)) => {
                let root = Rational::new(p, q).ok()?.exact_sqrt()?;
                Ok(frac(&root))
            }
            Err(err) => Err(err),
        },
    })
}

/// Convenience wrapper: evaluates with `vars` given as `(name, value)` pairs.
pub fn eval_rational_at(e: &Expr, vars: &[(&str, Rational)]) -> Result<PointValue, EvalError> {
    eval_rational(
        e,
        &PointEnv::new(vars.iter().map(|(n, v)| (n.to_string(), v.clone()))),
    )
}

/// Concrete floating-point evaluation: every input, every operation and every
/// literal is rounded to nearest-even in `prec`.
pub fn eval_float(
    e: &Expr,
    point: &dyn Fn(&str) -> Option<f64>,
    prec: &PrecisionSpec,
) -> Result<f64, EvalError> {
    let format = prec.format();
    if format == BinaryFormat::DOUBLE {
        eval_f64(e, point)
    } else if format == BinaryFormat::SINGLE {
        eval_f32(e, point).map(f64::from)
    } else if format.bits <= 53 && format.emax <= 1023 && format.emin >= -1022 {
        let r = eval_generic(e, point, format)?;
        Ok(dyadic_to_f64(&r))
    } else {
        Err(EvalError::UnsupportedPrecision(prec.name.clone()))
    }
}

fn finite64(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::InvalidFloatOp)
    }
}

fn eval_f64(e: &Expr, point: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
    let r = match e.kind() {
        ExprKind::Const(c) => c.to_f64_lossy(),
        ExprKind::Var(v) => point(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?,
        ExprKind::Noise(s) => return Err(EvalError::UnboundNoise(*s)),
        ExprKind::Neg(a) => -eval_f64(a, point)?,
        ExprKind::Add(a, b) => eval_f64(a, point)? + eval_f64(b, point)?,
        ExprKind::Sub(a, b) => eval_f64(a, point)? - eval_f64(b, point)?,
        ExprKind::Mul(a, b) => eval_f64(a, point)? * eval_f64(b, point)?,
        ExprKind::Div(a, b) => eval_f64(a, point)? / eval_f64(b, point)?,
        ExprKind::Sqrt(a) => eval_f64(a, point)?.sqrt(),
    };
    finite64(r)
}

fn eval_f32(e: &Expr, point: &dyn Fn(&str) -> Option<f64>) -> Result<f32, EvalError> {
    let r = match e.kind() {
        ExprKind::Const(c) => match round_nearest(c, BinaryFormat::SINGLE) {
            Rounded::Finite(r) => dyadic_to_f64(&r) as f32,
            Rounded::Overflow { .. } => return Err(EvalError::InvalidFloatOp),
        },
        ExprKind::Var(v) => {
            point(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))? as f32
        }
        ExprKind::Noise(s) => return Err(EvalError::UnboundNoise(*s)),
        ExprKind::Neg(a) => -eval_f32(a, point)?,
        ExprKind::Add(a, b) => eval_f32(a, point)? + eval_f32(b, point)?,
        ExprKind::Sub(a, b) => eval_f32(a, point)? - eval_f32(b, point)?,
        ExprKind::Mul(a, b) => eval_f32(a, point)? * eval_f32(b, point)?,
        ExprKind::Div(a, b) => eval_f32(a, point)? / eval_f32(b, point)?,
        ExprKind::Sqrt(a) => eval_f32(a, point)?.sqrt(),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(EvalError::InvalidFloatOp)
    }
}

fn round_in(x: &Rational, format: BinaryFormat) -> Result<Rational, EvalError> {
    round_nearest(x, format)
        .finite()
        .ok_or(EvalError::InvalidFloatOp)
}

/// Correctly rounded square root: refine an enclosure until both ends round alike.
fn sqrt_rounded(x: &Rational, format: BinaryFormat) -> Result<Rational, EvalError> {
    if x.is_negative() {
        return Err(EvalError::InvalidFloatOp);
    }
    if let Some(r) = x.exact_sqrt() {
        return round_in(&r, format);
    }
    let scale = x.floor_log2().unwrap_or(0).unsigned_abs() as u32;
    let mut bits = 2 * format.bits + scale + 16;
    loop {
        let enc = rat_sqrt_outward(x, bits).map_err(|_| EvalError::InvalidFloatOp)?;
        let lo = round_in(enc.lo(), format)?;
        if lo == round_in(enc.hi(), format)? {
            return Ok(lo);
        }
        bits *= 2;
    }
}

fn eval_generic(
    e: &Expr,
    point: &dyn Fn(&str) -> Option<f64>,
    format: BinaryFormat,
) -> Result<Rational, EvalError> {
    let rec = |x: &Expr| eval_generic(x, point, format);
    match e.kind() {
        ExprKind::Const(c) => round_in(c, format),
        ExprKind::Var(v) => {
            let x = point(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?;
            round_in(
                &Rational::from_f64(x).ok_or(EvalError::InvalidFloatOp)?,
                format,
            )
        }
        ExprKind::Noise(s) => Err(EvalError::UnboundNoise(*s)),
        ExprKind::Neg(a) => Ok(-rec(a)?),
        ExprKind::Add(a, b) => round_in(&(rec(a)? + rec(b)?), format),
        ExprKind::Sub(a, b) => round_in(&(rec(a)? - rec(b)?), format),
        ExprKind::Mul(a, b) => round_in(&(rec(a)? * rec(b)?), format),
        ExprKind::Div(a, b) => {
            let q = rec(a)?
                .checked_div(&rec(b)?)
                .map_err(|_| EvalError::InvalidFloatOp)?;
            round_in(&q, format)
        }
        ExprKind::Sqrt(a) => sqrt_rounded(&rec(a)?, format),
    }
}

/// Generic-path evaluation in an arbitrary binary format, exposed for
/// cross-checking the native paths.
pub fn eval_float_exact(
    e: &Expr,
    point: &dyn Fn(&str) -> Option<f64>,
    format: BinaryFormat,
) -> Result<Rational, EvalError> {
    eval_generic(e, point, format)
}
