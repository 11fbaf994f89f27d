//! Symbolic Taylor bounds: first-order expansion in the rounding noise plus a
//! rigorously bounded second-order remainder.

use std::time::Instant;

use crate::error::AnalysisError;
use crate::exact::{InputBox, Interval, Rational, SQRT_PRECISION_BITS};
use crate::expr::simplify::{mk_div, mk_neg};
use crate::expr::{
    abstract_fp, derive, simplify, substitute_zero_noise, AbstractedExpr, AbstractionOptions, Expr,
    ExprKind, FunctionSpec, NoiseSelection, NoiseSym, PrecisionSpec, Symbol,
};
use crate::range::{
    eval_hinted, maximize_objective, range_ia, range_refined_report, Hint, NoiseMode, Objective,
    RefinementConfig, SearchEnv,
};
use crate::result::{AbsErrorResult, AbsMethod, Diagnostics, RelErrorResult, RelKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    Absolute,
    RelativeDirect,
}

#[derive(Clone, Debug)]
pub struct FirstOrderTerm {
    pub symbol: NoiseSym,
    /// Noise-free derivative, simplified.
    pub derivative: Expr,
    pub noise_bound: Rational,
}

/// The optimization problem a Taylor bound is read off from.
#[derive(Clone, Debug)]
pub struct TaylorObjective {
    pub first_order: Vec<FirstOrderTerm>,
    pub remainder: Rational,
    pub kind: ObjectiveKind,
}

/// Division by `f` in relative objectives, with its certified range.
struct Denominator {
    f: Expr,
    hints: Vec<Hint>,
}

impl Denominator {
    fn new(f: &Expr, range: Interval) -> Self {
        let f = simplify(f);
        // Simplifying `t / f` may pull a leading negation out of `f`.
        let mut hints = vec![Hint {
            expr: f.clone(),
            range: range.clone(),
        }];
        if let ExprKind::Neg(g) = f.kind() {
            hints.push(Hint {
                expr: g.clone(),
                range: range.neg(),
            });
        }
        Denominator { f, hints }
    }

    /// `-t / f`, simplified.
    fn relative(&self, t: &Expr) -> Expr {
        simplify(&mk_div(&mk_neg(t), &self.f))
    }
}

struct Work {
    queries: usize,
    degraded: bool,
}

impl Work {
    fn new() -> Self {
        Work {
            queries: 0,
            degraded: false,
        }
    }

    /// Sound bound on `max |t|`: interval arithmetic first, branch and bound
    /// when that fails.
    fn bound_abs(
        &mut self,
        t: &Expr,
        domain: &InputBox,
        noise: &NoiseMode,
        hints: &[Hint],
        cfg: &RefinementConfig,
    ) -> Result<Rational, AnalysisError> {
        let env = SearchEnv {
            vars: domain,
            noise,
        };
        if let Ok(iv) = eval_hinted(t, &env, hints, SQRT_PRECISION_BITS) {
            self.queries += 1;
            return Ok(iv.magnitude());
        }
        let r = maximize_objective(&Objective::abs(t.clone()), domain, noise, hints, cfg)?;
        self.queries += r.query_count;
        self.degraded |= r.degraded;
        Ok(r.value)
    }
}

fn first_order_terms(a: &AbstractedExpr) -> Vec<FirstOrderTerm> {
    let nb = a.noise_bounds();
    a.eps_symbols()
        .into_iter()
        .map(|s| {
            let d = derive(&a.tree, &Symbol::Noise(s));
            FirstOrderTerm {
                symbol: s,
                derivative: simplify(&substitute_zero_noise(&d, NoiseSelection::Both)),
                noise_bound: nb.bound(s),
            }
        })
        .filter(|t| !t.derivative.is_zero())
        .collect()
}

/// Bound on the Taylor remainder of `f~` (or of `(f - f~)/f` when `denom` is
/// given): half the Hessian in all noise symbols over box and noise box,
/// plus the first-order `d` terms at zero noise.
fn remainder(
    a: &AbstractedExpr,
    domain: &InputBox,
    denom: Option<&Denominator>,
    cfg: &RefinementConfig,
    work: &mut Work,
) -> Result<Rational, AnalysisError> {
    let nb = a.noise_bounds();
    let noise_box = NoiseMode::Box(nb.clone());
    let hints: &[Hint] = denom.map_or(&[], |d| &d.hints);
    let scale = |t: Expr| match denom {
        Some(d) => d.relative(&t),
        None => t,
    };
    let ys = a.all_symbols();
    let mut total = Rational::zero();
    for (i, yi) in ys.iter().enumerate() {
        let di = derive(&a.tree, &Symbol::Noise(*yi));
        if di.is_zero() {
            continue;
        }
        for yj in &ys[i..] {
            if !di.mentions(&Symbol::Noise(*yj)) {
                continue;
            }
            let h = derive(&di, &Symbol::Noise(*yj));
            if h.is_zero() {
                continue;
            }
            let m = work.bound_abs(&scale(h), domain, &noise_box, hints, cfg)?;
            let mut term = m * nb.bound(*yi) * nb.bound(*yj);
            if yi == yj {
                term = term.half();
            }
            total += &term;
        }
    }
    for d in a.delta_symbols() {
        let t = derive(&a.tree, &Symbol::Noise(d));
        let t = simplify(&substitute_zero_noise(&t, NoiseSelection::Both));
        if t.is_zero() {
            continue;
        }
        let m = work.bound_abs(&scale(t), domain, &NoiseMode::Zero, hints, cfg)?;
        total += &(m * nb.bound(d));
    }
    Ok(total)
}

/// `M_R` for the absolute error of an abstracted tree.
pub fn remainder_bound(
    a: &AbstractedExpr,
    domain: &InputBox,
    cfg: &RefinementConfig,
) -> Result<Rational, AnalysisError> {
    remainder(a, domain, None, cfg, &mut Work::new())
}

/// `M_R` for the relative error `(f - f~)/f`, given a certified zero-free range of `f`.
pub fn remainder_bound_relative(
    a: &AbstractedExpr,
    f: &Expr,
    f_range: &Interval,
    domain: &InputBox,
    cfg: &RefinementConfig,
) -> Result<Rational, AnalysisError> {
    remainder(
        a,
        domain,
        Some(&Denominator::new(f, f_range.clone())),
        cfg,
        &mut Work::new(),
    )
}

/// Range of `f` over the domain, certified not to contain zero.
pub fn certify_zero_free(
    f: &Expr,
    domain: &InputBox,
    cfg: &RefinementConfig,
) -> Result<(Interval, usize), AnalysisError> {
    if let Ok(ia) = range_ia(f, domain) {
        if !ia.contains_zero() {
            return Ok((ia, 0));
        }
    }
    let r = range_refined_report(f, domain, &NoiseMode::Zero, &[], cfg)?;
    if r.range.contains_zero() {
        return Err(AnalysisError::ZeroRangeFailure {
            range: Box::new(r.range),
        });
    }
    Ok((r.range, r.queries))
}

/// The first-order objective and remainder of the absolute or direct relative error.
pub fn taylor_objective(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    kind: ObjectiveKind,
    cfg: &RefinementConfig,
    opts: AbstractionOptions,
) -> Result<TaylorObjective, AnalysisError> {
    let a = abstract_fp(spec.body(), prec, opts);
    let mut terms = first_order_terms(&a);
    let mut work = Work::new();
    let remainder = match kind {
        ObjectiveKind::Absolute => remainder(&a, spec.domain(), None, cfg, &mut work)?,
        ObjectiveKind::RelativeDirect => {
            let (range, _) = certify_zero_free(spec.body(), spec.domain(), cfg)?;
            let den = Denominator::new(spec.body(), range);
            for t in &mut terms {
                t.derivative = den.relative(&t.derivative);
            }
            remainder(&a, spec.domain(), Some(&den), cfg, &mut work)?
        }
    };
    Ok(TaylorObjective {
        first_order: terms,
        remainder,
        kind,
    })
}

fn sum_abs(terms: &[FirstOrderTerm]) -> Objective {
    Objective::SumAbs(
        terms
            .iter()
            .map(|t| (t.derivative.clone(), t.noise_bound.clone()))
            .collect(),
    )
}

/// Symbolic Taylor absolute error bound.
pub fn taylor_abs(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
) -> Result<AbsErrorResult, AnalysisError> {
    taylor_abs_with(spec, prec, cfg, AbstractionOptions::default())
}

pub fn taylor_abs_with(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
    opts: AbstractionOptions,
) -> Result<AbsErrorResult, AnalysisError> {
    let start = Instant::now();
    let domain = spec.domain();
    let a = abstract_fp(spec.body(), prec, opts);
    let terms = first_order_terms(&a);
    let first = maximize_objective(&sum_abs(&terms), domain, &NoiseMode::Zero, &[], cfg)?;
    let mut work = Work::new();
    let m_r = remainder(&a, domain, None, cfg, &mut work)?;
    let result_range = match range_ia(spec.body(), domain) {
        Ok(r) => r,
        Err(_) => range_refined_report(spec.body(), domain, &NoiseMode::Zero, &[], cfg)?.range,
    };
    Ok(AbsErrorResult {
        bound: &first.value + &m_r,
        result_range,
        method: AbsMethod::SymbolicTaylor,
        per_node_trace: None,
        diagnostics: Diagnostics {
            query_count: first.query_count + work.queries,
            first_order: Some(first.value),
            remainder: Some(m_r),
            achieved_gap: first.achieved_gap,
            degraded: first.degraded || work.degraded,
            wall_time: start.elapsed(),
        },
    })
}

/// Direct relative bound: Taylor expansion of `(f - f~)/f` itself.
pub fn taylor_rel_direct(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
) -> Result<RelErrorResult, AnalysisError> {
    taylor_rel_direct_with(spec, prec, cfg, AbstractionOptions::default())
}

pub fn taylor_rel_direct_with(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
    opts: AbstractionOptions,
) -> Result<RelErrorResult, AnalysisError> {
    let start = Instant::now();
    let domain = spec.domain();
    let (range, cert_queries) = certify_zero_free(spec.body(), domain, cfg)?;
    let den = Denominator::new(spec.body(), range.clone());
    let a = abstract_fp(spec.body(), prec, opts);
    let mut terms = first_order_terms(&a);
    for t in &mut terms {
        t.derivative = den.relative(&t.derivative);
    }
    let first = maximize_objective(&sum_abs(&terms), domain, &NoiseMode::Zero, &den.hints, cfg)?;
    let mut work = Work::new();
    let m_r = remainder(&a, domain, Some(&den), cfg, &mut work)?;
    Ok(RelErrorResult {
        bound: &first.value + &m_r,
        kind: RelKind::Direct,
        result_range: range,
        diagnostics: Diagnostics {
            query_count: cert_queries + first.query_count + work.queries,
            first_order: Some(first.value),
            remainder: Some(m_r),
            achieved_gap: first.achieved_gap,
            degraded: first.degraded || work.degraded,
            wall_time: start.elapsed(),
        },
    })
}

/// Taylor absolute bound divided by the smallest `|f|`.
pub fn taylor_rel_via_abs(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
) -> Result<RelErrorResult, AnalysisError> {
    let start = Instant::now();
    let (range, cert_queries) = certify_zero_free(spec.body(), spec.domain(), cfg)?;
    let abs = taylor_abs(spec, prec, cfg)?;
    let bound = abs
        .bound
        .checked_div(&range.min_magnitude())
        .expect("certified zero-free");
    let mut diagnostics = abs.diagnostics;
    diagnostics.query_count += cert_queries;
    diagnostics.wall_time = start.elapsed();
    Ok(RelErrorResult {
        bound,
        kind: RelKind::ViaAbsolute,
        result_range: range,
        diagnostics,
    })
}

/// Maximizes `|(f - f~)/f|` over box and noise box with no expansion.
pub fn naive_rel(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
) -> Result<RelErrorResult, AnalysisError> {
    naive_rel_with(spec, prec, cfg, AbstractionOptions::default())
}

pub fn naive_rel_with(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RefinementConfig,
    opts: AbstractionOptions,
) -> Result<RelErrorResult, AnalysisError> {
    let start = Instant::now();
    let domain = spec.domain();
    let (range, cert_queries) = certify_zero_free(spec.body(), domain, cfg)?;
    let den = Denominator::new(spec.body(), range.clone());
    let a = abstract_fp(spec.body(), prec, opts);
    let g = (den.f.clone() - a.tree.clone()) / den.f.clone();
    let r = maximize_objective(
        &Objective::abs(g),
        domain,
        &NoiseMode::Box(a.noise_bounds()),
        &den.hints,
        cfg,
    )?;
    Ok(RelErrorResult {
        bound: r.value,
        kind: RelKind::Naive,
        result_range: range,
        diagnostics: Diagnostics {
            query_count: cert_queries + r.query_count,
            achieved_gap: r.achieved_gap,
            degraded: r.degraded,
            wall_time: start.elapsed(),
            ..Diagnostics::default()
        },
    })
}
