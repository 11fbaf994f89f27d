//! Range refinement by binary search on candidate bounds, each candidate
//! settled by a satisfiability query.

use std::time::{Duration, Instant};

use super::bnb::decide_exceeds;
use super::ia::{eval_hinted, Hint, NoiseMode, SearchEnv};
use super::objective::{Objective, Probe};
use super::smt::SmtDecider;
use super::{Backend, BoundResult, RangeError, RefinementConfig};
use crate::exact::{InputBox, Interval, Rational, SQRT_PRECISION_BITS};
use crate::expr::{eval_interval, Expr};

/// Steps of binary search per endpoint.
pub const MAX_SEARCH_STEPS: usize = 30;

/// Answer to `exists x. objective(x) > threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

/// The backend could not be run at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeciderFailure(pub String);

pub trait Decider {
    fn backend(&self) -> Backend;

    fn exceeds(
        &mut self,
        obj: &Objective,
        domain: &InputBox,
        noise: &NoiseMode,
        hints: &[Hint],
        threshold: &Rational,
    ) -> Result<Verdict, DeciderFailure>;
}

/// Answers queries with interval branch and bound.
#[derive(Clone, Debug)]
pub struct InternalDecider {
    pub max_bisections: usize,
    pub timeout: Duration,
}

impl InternalDecider {
    pub fn from_config(cfg: &RefinementConfig) -> Self {
        InternalDecider {
            max_bisections: cfg.max_bisections,
            timeout: cfg.per_query_timeout,
        }
    }
}

impl Decider for InternalDecider {
    fn backend(&self) -> Backend {
        Backend::InternalBranchAndBound
    }

    fn exceeds(
        &mut self,
        obj: &Objective,
        domain: &InputBox,
        noise: &NoiseMode,
        hints: &[Hint],
        threshold: &Rational,
    ) -> Result<Verdict, DeciderFailure> {
        Ok(decide_exceeds(self, obj, domain, noise, hints, threshold))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedRange {
    pub range: Interval,
    pub queries: usize,
    /// The external solver failed and the plain interval range was returned.
    pub degraded: bool,
}

/// Tightened range: always inside the interval range and around the true range.
pub fn range_refined(
    e: &Expr,
    domain: &InputBox,
    cfg: &RefinementConfig,
) -> Result<Interval, RangeError> {
    Ok(range_refined_report(e, domain, &NoiseMode::Zero, &[], cfg)?.range)
}

pub fn range_refined_report(
    e: &Expr,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    cfg: &RefinementConfig,
) -> Result<RefinedRange, RangeError> {
    let env = SearchEnv {
        vars: domain,
        noise,
    };
    // Without hints the exact enclosure is affordable, and starting from it
    // keeps the result inside the plain interval range.
    let ia = if hints.is_empty() {
        eval_interval(e, &env, SQRT_PRECISION_BITS)?
    } else {
        eval_hinted(e, &env, hints, SQRT_PRECISION_BITS)?
    };
    if ia.is_point() {
        return Ok(RefinedRange {
            range: ia,
            queries: 0,
            degraded: false,
        });
    }
    let outcome = match cfg.backend {
        Backend::InternalBranchAndBound => refine_with(
            &mut InternalDecider::from_config(cfg),
            e,
            domain,
            noise,
            hints,
            &ia,
            cfg,
        ),
        Backend::ExternalSmtProcess => SmtDecider::from_config(cfg)
            .map_err(|err| DeciderFailure(err.to_string()))
            .and_then(|mut d| refine_with(&mut d, e, domain, noise, hints, &ia, cfg)),
    };
    Ok(outcome.unwrap_or_else(|DeciderFailure(msg)| {
        log::warn!("range refinement failed ({msg}); keeping the interval range");
        RefinedRange {
            range: ia,
            queries: 0,
            degraded: true,
        }
    }))
}

fn refine_with(
    d: &mut dyn Decider,
    e: &Expr,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    ia: &Interval,
    cfg: &RefinementConfig,
) -> Result<RefinedRange, DeciderFailure> {
    let gap = &cfg.relative_gap_target;
    let mut queries = 0;
    let up = Objective::Signed(e.clone());
    let down = Objective::Signed(-e.clone());
    // Values certainly attained, from sample points.
    let reached_hi = Probe::new(&up, noise, hints).lower(domain, true);
    let reached_lo = Probe::new(&down, noise, hints)
        .lower(domain, true)
        .map(|v| -v);
    let known_max = reached_hi.unwrap_or_else(|| ia.lo().clone());
    let known_min = reached_lo.unwrap_or_else(|| ia.hi().clone());
    let hi = search_upper(
        d,
        &up,
        domain,
        noise,
        hints,
        known_max,
        ia.hi().clone(),
        gap,
        &mut queries,
    )?;
    let lo = -search_upper(
        d,
        &down,
        domain,
        noise,
        hints,
        -known_min,
        -ia.lo().clone(),
        gap,
        &mut queries,
    )?;
    let range = Interval::new(lo, hi).unwrap_or_else(|_| ia.clone());
    Ok(RefinedRange {
        range,
        queries,
        degraded: false,
    })
}

/// Smallest accepted candidate `u` with `obj <= u` proven; `known` is attained.
#[allow(clippy::too_many_arguments)]
fn search_upper(
    d: &mut dyn Decider,
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    known: Rational,
    start: Rational,
    gap: &Rational,
    queries: &mut usize,
) -> Result<Rational, DeciderFailure> {
    let mut hi = start;
    let mut lo = known.min(hi.clone());
    for _ in 0..MAX_SEARCH_STEPS {
        let scale = lo.abs().max(hi.abs());
        if &hi - &lo <= gap * &scale {
            break;
        }
        let c = (&lo + &hi).half();
        *queries += 1;
        match d.exceeds(obj, domain, noise, hints, &c)? {
            Verdict::Unsat => hi = c,
            Verdict::Sat | Verdict::Unknown => lo = c,
        }
    }
    Ok(hi)
}

/// Maximization by the same search on the bound; `None` when the objective
/// has no finite interval enclosure to start from.
pub(crate) fn maximize_by_search(
    d: &mut dyn Decider,
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    cfg: &RefinementConfig,
) -> Result<Option<BoundResult>, DeciderFailure> {
    let start = Instant::now();
    let probe = Probe::new(obj, noise, hints);
    let Some(upper) = probe.upper(domain) else {
        return Ok(None);
    };
    let known = probe
        .lower(domain, true)
        .unwrap_or_else(Rational::zero)
        .max(Rational::zero());
    let mut queries = 1;
    let value = search_upper(
        d,
        obj,
        domain,
        noise,
        hints,
        known.clone(),
        upper,
        &cfg.relative_gap_target,
        &mut queries,
    )?;
    let achieved_gap = if value.is_zero() {
        Some(Rational::zero())
    } else if known.is_positive() {
        Some((&value - &known).checked_div(&value).expect("value > 0"))
    } else {
        None
    };
    Ok(Some(BoundResult {
        value,
        achieved_gap,
        backend_used: d.backend(),
        query_count: queries,
        wall_time: start.elapsed(),
        degraded: false,
    }))
}
