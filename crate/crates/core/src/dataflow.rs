//! Forward dataflow analysis: every node carries a range for its real value
//! and an affine form bounding the accumulated roundoff error.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::AnalysisError;
use crate::exact::{AffineForm, InputBox, Interval, NoiseSource};
use crate::expr::{AbstractionOptions, EvalError, Expr, ExprKind, FunctionSpec, PrecisionSpec};
use crate::range::{range_refined_report, NoiseMode, RangeMethod, RefinementConfig};
use crate::result::{AbsErrorResult, AbsMethod, Diagnostics, RelErrorResult, RelKind, TraceEntry};

#[derive(Clone, Debug)]
pub struct NodeState {
    pub real_range: Interval,
    pub error_form: AffineForm,
    /// Affine form of the real value, kept only in affine mode.
    real_form: Option<AffineForm>,
}

struct Forward<'a> {
    domain: &'a InputBox,
    prec: &'a PrecisionSpec,
    rm: RangeMethod,
    cfg: &'a RefinementConfig,
    opts: AbstractionOptions,
    source: NoiseSource,
    real_source: NoiseSource,
    inputs: HashMap<String, NodeState>,
    refined: HashMap<Expr, Interval>,
    trace: Vec<TraceEntry>,
    node: usize,
    queries: usize,
    degraded: bool,
}

fn op_name(e: &Expr) -> &'static str {
    match e.kind() {
        ExprKind::Const(_) => "literal",
        ExprKind::Var(_) => "input",
        ExprKind::Noise(_) => "noise",
        ExprKind::Neg(_) => "neg",
        ExprKind::Add(..) => "add",
        ExprKind::Sub(..) => "sub",
        ExprKind::Mul(..) => "mul",
        ExprKind::Div(..) => "div",
        ExprKind::Sqrt(_) => "sqrt",
    }
}

impl Forward<'_> {
    fn fail(&self, e: &Expr, source: EvalError) -> AnalysisError {
        AnalysisError::Node {
            node: self.node,
            op: op_name(e),
            source,
        }
    }

    /// Adds a fresh rounding term for a value whose float range is `finite`.
    fn round(
        &mut self,
        e: &Expr,
        err: AffineForm,
        real: &Interval,
        with_delta: bool,
    ) -> AffineForm {
        let finite = real.add(&err.to_interval());
        let mut new = finite.magnitude() * &self.prec.epsilon;
        if with_delta {
            new += &self.prec.delta;
        }
        self.trace.push(TraceEntry {
            node: self.node,
            op: op_name(e).to_string(),
            range: finite,
            new_roundoff: new.clone(),
        });
        let mut out = err;
        out.push_fresh(new, &self.source);
        out.compact(&self.source)
    }

    fn real_range(&mut self, e: &Expr, from_children: Interval) -> Result<Interval, AnalysisError> {
        if self.rm != RangeMethod::IntervalWithRefinement || from_children.is_point() {
            return Ok(from_children);
        }
        if let Some(r) = self.refined.get(e) {
            return Ok(r.clone());
        }
        let r = range_refined_report(e, self.domain, &NoiseMode::Zero, &[], self.cfg)?;
        self.queries += r.queries;
        self.degraded |= r.degraded;
        let range = r.range.intersect(&from_children).unwrap_or(from_children);
        self.refined.insert(e.clone(), range.clone());
        Ok(range)
    }

    fn affine(
        &self,
        x: &NodeState,
        y: Option<&NodeState>,
        f: impl FnOnce(&AffineForm, Option<&AffineForm>) -> Result<AffineForm, EvalError>,
    ) -> Result<Option<AffineForm>, EvalError> {
        match (&x.real_form, y.map(|s| &s.real_form)) {
            (Some(a), None) => f(a, None).map(Some),
            (Some(a), Some(Some(b))) => f(a, Some(b)).map(Some),
            _ => Ok(None),
        }
    }

    fn state(
        &mut self,
        e: &Expr,
        iv: Interval,
        real_form: Option<AffineForm>,
        err: AffineForm,
    ) -> Result<NodeState, AnalysisError> {
        let iv = match &real_form {
            Some(f) => f.to_interval().intersect(&iv).unwrap_or(iv),
            None => iv,
        };
        let real_range = self.real_range(e, iv)?;
        Ok(NodeState {
            real_range,
            error_form: err,
            real_form,
        })
    }

    fn go(&mut self, e: &Expr) -> Result<NodeState, AnalysisError> {
        let out = self.visit(e)?;
        self.node += 1;
        Ok(out)
    }

    fn visit(&mut self, e: &Expr) -> Result<NodeState, AnalysisError> {
        let aa = self.rm == RangeMethod::AffineOnly;
        match e.kind() {
            ExprKind::Const(c) => {
                let iv = Interval::point(c.clone());
                let form = aa.then(|| AffineForm::constant(c.clone()));
                let err = if self.prec.is_representable(c) {
                    AffineForm::zero()
                } else {
                    self.round(e, AffineForm::zero(), &iv, true)
                };
                Ok(NodeState {
                    real_range: iv,
                    error_form: err,
                    real_form: form,
                })
            }
            ExprKind::Var(v) => {
                if let Some(s) = self.inputs.get(v.as_ref()) {
                    return Ok(s.clone());
                }
                let iv = self
                    .domain
                    .get(v)
                    .cloned()
                    .ok_or_else(|| self.fail(e, EvalError::UnboundVariable(v.to_string())))?;
                let form = aa.then(|| AffineForm::from_interval(&iv, &self.real_source));
                let err = if self.opts.round_inputs {
                    self.round(e, AffineForm::zero(), &iv, true)
                } else {
                    AffineForm::zero()
                };
                let s = NodeState {
                    real_range: iv,
                    error_form: err,
                    real_form: form,
                };
                self.inputs.insert(v.to_string(), s.clone());
                Ok(s)
            }
            ExprKind::Noise(s) => Err(self.fail(e, EvalError::UnboundNoise(*s))),
            ExprKind::Neg(a) => {
                let x = self.go(a)?;
                let form = x.real_form.as_ref().map(AffineForm::neg);
                Ok(NodeState {
                    real_range: x.real_range.neg(),
                    error_form: x.error_form.neg(),
                    real_form: form,
                })
            }
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
                let add = matches!(e.kind(), ExprKind::Add(..));
                let x = self.go(a)?;
                let y = self.go(b)?;
                let (iv, err) = if add {
                    (
                        x.real_range.add(&y.real_range),
                        x.error_form.add(&y.error_form),
                    )
                } else {
                    (
                        x.real_range.sub(&y.real_range),
                        x.error_form.sub(&y.error_form),
                    )
                };
                let form = self
                    .affine(&x, Some(&y), |p, q| {
                        Ok(if add {
                            p.add(q.unwrap())
                        } else {
                            p.sub(q.unwrap())
                        })
                    })
                    .map_err(|err| self.fail(e, err))?;
                let s = self.state(e, iv, form, err)?;
                let err = self.round(e, s.error_form.clone(), &s.real_range, false);
                Ok(NodeState {
                    error_form: err,
                    ..s
                })
            }
            ExprKind::Mul(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                // x^ y^ - x y = x ey + y ex + ex ey
                let err = y
                    .error_form
                    .mul_interval(&x.real_range, &self.source)
                    .add(&x.error_form.mul_interval(&y.real_range, &self.source))
                    .add(&x.error_form.mul(&y.error_form, &self.source));
                let iv = x.real_range.mul(&y.real_range);
                let src = &self.real_source;
                let form = self
                    .affine(&x, Some(&y), |p, q| Ok(p.mul(q.unwrap(), src)))
                    .map_err(|err| self.fail(e, err))?;
                let s = self.state(e, iv, form, err)?;
                let err = self.round(e, s.error_form.clone(), &s.real_range, true);
                Ok(NodeState {
                    error_form: err,
                    ..s
                })
            }
            ExprKind::Div(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                let zero = |me: &Self| me.fail(e, EvalError::DivisionByZeroRange);
                let y_hat = y.real_range.add(&y.error_form.to_interval());
                if y.real_range.contains_zero() || y_hat.contains_zero() {
                    return Err(zero(self));
                }
                // 1/y^ - 1/y = -ey / (y y^)
                let k = y.real_range.mul(&y_hat).recip().map_err(|_| zero(self))?;
                let inv_err = y.error_form.mul_interval(&k, &self.source).neg();
                let inv = y.real_range.recip().map_err(|_| zero(self))?;
                let err = inv_err
                    .mul_interval(&x.real_range, &self.source)
                    .add(&x.error_form.mul_interval(&inv, &self.source))
                    .add(&x.error_form.mul(&inv_err, &self.source));
                let iv = x.real_range.div(&y.real_range).map_err(|_| zero(self))?;
                let src = &self.real_source;
                let form = self
                    .affine(&x, Some(&y), |p, q| {
                        let inv = q
                            .unwrap()
                            .inverse(src)
                            .map_err(|_| EvalError::DivisionByZeroRange)?;
                        Ok(p.mul(&inv, src))
                    })
                    .map_err(|err| self.fail(e, err))?;
                let s = self.state(e, iv, form, err)?;
                let err = self.round(e, s.error_form.clone(), &s.real_range, true);
                Ok(NodeState {
                    error_form: err,
                    ..s
                })
            }
            ExprKind::Sqrt(a) => {
                let x = self.go(a)?;
                let neg = |me: &Self| me.fail(e, EvalError::NegativeSqrt);
                let x_hat = x.real_range.add(&x.error_form.to_interval());
                if x.real_range.lo().is_negative() || x_hat.lo().is_negative() {
                    return Err(neg(self));
                }
                // sqrt(x^) - sqrt(x) = ex / (sqrt(x) + sqrt(x^))
                let roots = x
                    .real_range
                    .sqrt()
                    .map_err(|_| neg(self))?
                    .add(&x_hat.sqrt().map_err(|_| neg(self))?);
                let k = roots
                    .recip()
                    .map_err(|_| self.fail(e, EvalError::DivisionByZeroRange))?;
                let err = x.error_form.mul_interval(&k, &self.source);
                let iv = x.real_range.sqrt().map_err(|_| neg(self))?;
                let form = match &x.real_form {
                    Some(_) => Some(AffineForm::from_interval(&iv, &self.real_source)),
                    None => None,
                };
                let s = self.state(e, iv, form, err)?;
                let err = self.round(e, s.error_form.clone(), &s.real_range, true);
                Ok(NodeState {
                    error_form: err,
                    ..s
                })
            }
        }
    }
}

/// Absolute roundoff bound by forward propagation of ranges and errors.
pub fn forward_abs_error(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    rm: RangeMethod,
    cfg: &RefinementConfig,
) -> Result<AbsErrorResult, AnalysisError> {
    forward_abs_error_with(spec, prec, rm, cfg, AbstractionOptions::default())
}

pub fn forward_abs_error_with(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    rm: RangeMethod,
    cfg: &RefinementConfig,
    opts: AbstractionOptions,
) -> Result<AbsErrorResult, AnalysisError> {
    let start = Instant::now();
    let mut fw = Forward {
        domain: spec.domain(),
        prec,
        rm,
        cfg,
        opts,
        source: NoiseSource::new(),
        real_source: NoiseSource::new(),
        inputs: HashMap::new(),
        refined: HashMap::new(),
        trace: Vec::new(),
        node: 0,
        queries: 0,
        degraded: false,
    };
    let root = fw.go(spec.body())?;
    Ok(AbsErrorResult {
        bound: root.error_form.magnitude(),
        result_range: root.real_range,
        method: AbsMethod::Forward(rm),
        per_node_trace: Some(fw.trace),
        diagnostics: Diagnostics {
            query_count: fw.queries,
            degraded: fw.degraded,
            wall_time: start.elapsed(),
            ..Diagnostics::default()
        },
    })
}

/// Forward absolute bound divided by the smallest magnitude of the result range.
pub fn rel_via_abs(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    rm: RangeMethod,
    cfg: &RefinementConfig,
) -> Result<RelErrorResult, AnalysisError> {
    rel_via_abs_with(spec, prec, rm, cfg, AbstractionOptions::default())
}

pub fn rel_via_abs_with(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    rm: RangeMethod,
    cfg: &RefinementConfig,
    opts: AbstractionOptions,
) -> Result<RelErrorResult, AnalysisError> {
    let abs = forward_abs_error_with(spec, prec, rm, cfg, opts)?;
    let range = abs.result_range.clone();
    if range.contains_zero() {
        return Err(AnalysisError::ZeroRangeFailure {
            range: Box::new(range),
        });
    }
    let bound = abs
        .bound
        .checked_div(&range.min_magnitude())
        .expect("range excludes zero");
    Ok(RelErrorResult {
        bound,
        kind: RelKind::ForwardViaAbs,
        result_range: range,
        diagnostics: abs.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::expr::parse;

    fn spec(text: &str) -> FunctionSpec {
        parse(text).unwrap()
    }

    #[test]
    fn identity_on_one_two() {
        let f = spec("def f(x: Real): Real = { require(1 <= x && x <= 2) x }");
        let p = PrecisionSpec::float64();
        let cfg = RefinementConfig::default();
        let r = forward_abs_error(&f, &p, RangeMethod::IntervalOnly, &cfg).unwrap();
        assert_eq!(r.bound, Rational::from_int(2) * &p.epsilon + &p.delta);
        let rel = rel_via_abs(&f, &p, RangeMethod::IntervalOnly, &cfg).unwrap();
        assert_eq!(rel.bound, r.bound);
    }

    #[test]
    fn representable_constant_is_exact() {
        let f = spec("def f(x: Real): Real = { require(1 <= x && x <= 2) 0.5 }");
        let p = PrecisionSpec::float64();
        let cfg = RefinementConfig::default();
        for rm in [
            RangeMethod::IntervalOnly,
            RangeMethod::AffineOnly,
            RangeMethod::IntervalWithRefinement,
        ] {
            assert!(forward_abs_error(&f, &p, rm, &cfg).unwrap().bound.is_zero());
            assert!(rel_via_abs(&f, &p, rm, &cfg).unwrap().bound.is_zero());
        }
    }

    #[test]
    fn bspline3_has_zero_in_range() {
        let f =
            spec("def bspline3(u: Real): Real = { require(0 <= u && u <= 1) - u * u * u / 6.0 }");
        let r = rel_via_abs(
            &f,
            &PrecisionSpec::float64(),
            RangeMethod::IntervalOnly,
            &RefinementConfig::default(),
        );
        assert!(matches!(r, Err(AnalysisError::ZeroRangeFailure { .. })));
    }

    #[test]
    fn division_by_possible_zero_names_the_node() {
        let f = spec("def f(x: Real): Real = { require(-1 <= x && x <= 1) 1 / x }");
        let r = forward_abs_error(
            &f,
            &PrecisionSpec::float64(),
            RangeMethod::IntervalOnly,
            &RefinementConfig::default(),
        );
        match r {
            Err(AnalysisError::Node {
                node: 2, op: "div", ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
