use std::collections::HashMap;

use crate::exact::{DyadicInterval, InputBox, Interval, Rational, SQRT_PRECISION_BITS};
use crate::expr::{BoxEnv, Env, EvalError, Expr, ExprKind, NoiseBounds, NoiseSym};

/// A subtree whose values over the whole search box are already known to lie
/// in `range`. Evaluation intersects with it, which keeps divisions by a
/// certified zero-free denominator well defined on every sub-box.
#[derive(Clone, Debug)]
pub struct Hint {
    pub expr: Expr,
    pub range: Interval,
}

/// Values given to noise symbols during evaluation.
#[derive(Clone, Debug)]
pub enum NoiseMode {
    /// Every noise symbol is zero.
    Zero,
    /// Every noise symbol ranges over `[-bound, bound]`.
    Box(NoiseBounds),
    /// Fixed values; unlisted symbols are zero.
    Point(HashMap<NoiseSym, Rational>),
}

pub(crate) struct SearchEnv<'a> {
    pub vars: &'a InputBox,
    pub noise: &'a NoiseMode,
}

impl Env for SearchEnv<'_> {
    fn var(&self, name: &str) -> Option<Interval> {
        self.vars.get(name).cloned()
    }

    fn noise(&self, sym: NoiseSym) -> Option<Interval> {
        Some(match self.noise {
            NoiseMode::Zero => Interval::zero(),
            NoiseMode::Box(b) => Interval::symmetric(b.bound(sym)),
            NoiseMode::Point(m) => {
                Interval::point(m.get(&sym).cloned().unwrap_or_else(Rational::zero))
            }
        })
    }
}

/// Interval range of a noise-free tree over a box.
pub fn range_ia(e: &Expr, domain: &InputBox) -> Result<Interval, EvalError> {
    crate::expr::eval_interval(e, &BoxEnv::real(domain), SQRT_PRECISION_BITS)
}

/// Significant bits kept in enclosure endpoints during search. Exact rational
/// endpoints grow without bound through the noise terms and dominate run time.
const ENCLOSURE_BITS: u32 = 256;

/// Bottom-up interval evaluation that intersects with any matching hint.
pub fn eval_hinted(
    e: &Expr,
    env: &dyn Env,
    hints: &[Hint],
    sqrt_bits: u32,
) -> Result<Interval, EvalError> {
    let hints: Vec<(&Expr, DyadicInterval)> = hints
        .iter()
        .map(|h| {
            (
                &h.expr,
                DyadicInterval::from_interval(&h.range, ENCLOSURE_BITS),
            )
        })
        .collect();
    Ok(eval_with(e, env, &hints, sqrt_bits)?.to_interval())
}

fn eval_with(
    e: &Expr,
    env: &dyn Env,
    hints: &[(&Expr, DyadicInterval)],
    sqrt_bits: u32,
) -> Result<DyadicInterval, EvalError> {
    let hint = hints.iter().find(|h| h.0 == e).map(|h| &h.1);
    match (eval_node(e, env, hints, sqrt_bits), hint) {
        (Ok(iv), Some(h)) => Ok(iv.intersect(h).unwrap_or_else(|| h.clone())),
        (Err(_), Some(h)) => Ok(h.clone()),
        (r, None) => r,
    }
}

fn eval_node(
    e: &Expr,
    env: &dyn Env,
    hints: &[(&Expr, DyadicInterval)],
    bits: u32,
) -> Result<DyadicInterval, EvalError> {
    let ev = |x: &Expr| eval_with(x, env, hints, bits);
    let lift = |iv: Interval| DyadicInterval::from_interval(&iv, ENCLOSURE_BITS);
    Ok(match e.kind() {
        ExprKind::Const(c) => lift(Interval::point(c.clone())),
        ExprKind::Var(v) => lift(
            env.var(v)
                .ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?,
        ),
        ExprKind::Noise(s) => lift(env.noise(*s).ok_or(EvalError::UnboundNoise(*s))?),
        ExprKind::Neg(a) => ev(a)?.neg(),
        ExprKind::Add(a, b) => ev(a)?.add(&ev(b)?),
        ExprKind::Sub(a, b) => ev(a)?.sub(&ev(b)?),
        ExprKind::Mul(a, b) => {
            let x = ev(a)?;
            if x.is_zero_point() {
                return Ok(x);
            }
            x.mul(&ev(b)?)
        }
        ExprKind::Div(a, b) => {
            let x = ev(a)?;
            let y = ev(b)?;
            if y.is_zero_point() {
                return Err(EvalError::DivisionByZeroPoint);
            }
            x.div(&y).map_err(|_| EvalError::DivisionByZeroRange)?
        }
        ExprKind::Sqrt(a) => ev(a)?.sqrt(bits).map_err(|_| EvalError::NegativeSqrt)?,
    })
}
