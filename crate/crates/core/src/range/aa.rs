use std::collections::HashMap;

use crate::exact::{AffineForm, InputBox, Interval, NoiseSource};
use crate::expr::{EvalError, Expr, ExprKind, NoiseBounds, NoiseSym};

/// Range of a tree in affine arithmetic. Each variable gets one noise symbol
/// shared by all its occurrences, so `x - x` evaluates to `[0, 0]`. Noise
/// symbols of an abstracted tree are zero unless `noise` is given.
pub fn range_aa(e: &Expr, domain: &InputBox) -> Result<Interval, EvalError> {
    range_aa_with_noise(e, domain, None)
}

pub(crate) fn range_aa_with_noise(
    e: &Expr,
    domain: &InputBox,
    noise: Option<&NoiseBounds>,
) -> Result<Interval, EvalError> {
    let mut ev = AffineEval::new(domain, noise);
    Ok(ev.eval(e)?.to_interval())
}

/// Bottom-up affine evaluator with per-symbol caches.
pub(crate) struct AffineEval<'a> {
    domain: &'a InputBox,
    noise: Option<&'a NoiseBounds>,
    pub(crate) source: NoiseSource,
    vars: HashMap<String, AffineForm>,
    noises: HashMap<NoiseSym, AffineForm>,
}

impl<'a> AffineEval<'a> {
    pub(crate) fn new(domain: &'a InputBox, noise: Option<&'a NoiseBounds>) -> Self {
        AffineEval {
            domain,
            noise,
            source: NoiseSource::new(),
            vars: HashMap::new(),
            noises: HashMap::new(),
        }
    }

    pub(crate) fn var(&mut self, name: &str) -> Result<AffineForm, EvalError> {
        if let Some(f) = self.vars.get(name) {
            return Ok(f.clone());
        }
        let iv = self
            .domain
            .get(name)
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))?;
        let f = AffineForm::from_interval(iv, &self.source);
        self.vars.insert(name.to_string(), f.clone());
        Ok(f)
    }

    fn noise(&mut self, sym: NoiseSym) -> AffineForm {
        let Some(bounds) = self.noise else {
            return AffineForm::zero();
        };
        if let Some(f) = self.noises.get(&sym) {
            return f.clone();
        }
        let f = AffineForm::from_interval(&Interval::symmetric(bounds.bound(sym)), &self.source);
        self.noises.insert(sym, f.clone());
        f
    }

    pub(crate) fn eval(&mut self, e: &Expr) -> Result<AffineForm, EvalError> {
        Ok(match e.kind() {
            ExprKind::Const(c) => AffineForm::constant(c.clone()),
            ExprKind::Var(v) => self.var(v)?,
            ExprKind::Noise(s) => self.noise(*s),
            ExprKind::Neg(a) => self.eval(a)?.neg(),
            ExprKind::Add(a, b) => self.eval(a)?.add(&self.eval(b)?),
            ExprKind::Sub(a, b) => self.eval(a)?.sub(&self.eval(b)?),
            ExprKind::Mul(a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                x.mul(&y, &self.source)
            }
            ExprKind::Div(a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                let inv = y
                    .inverse(&self.source)
                    .map_err(|_| EvalError::DivisionByZeroRange)?;
                x.mul(&inv, &self.source)
            }
            ExprKind::Sqrt(a) => {
                let x = self.eval(a)?;
                let iv = x
                    .to_interval()
                    .sqrt()
                    .map_err(|_| EvalError::NegativeSqrt)?;
                AffineForm::from_interval(&iv, &self.source)
            }
        })
    }
}
