//! Uniform subdivision of the input domain and per-piece analysis with an
//! absolute-error fallback where the relative error is undefined.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataflow::{forward_abs_error, rel_via_abs};
use crate::error::AnalysisError;
use crate::exact::{InputBox, Rational};
use crate::expr::{FunctionSpec, PrecisionSpec};
use crate::range::{RangeMethod, RefinementConfig};
use crate::result::{AbsErrorResult, RelErrorResult};
use crate::taylor::{taylor_abs, taylor_rel_direct};

/// Which variables are split and the resulting sub-boxes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionPlan {
    pub m: usize,
    pub budget: usize,
    /// Indices into the domain's variable list, widest first.
    pub chosen: Vec<usize>,
    pub sub_boxes: Vec<InputBox>,
}

/// Number of variables split: `min(n, floor(log_m(p - n)))`, or zero when
/// `p - n < m`.
pub fn chosen_count(n: usize, m: usize, budget: usize) -> usize {
    if m < 2 || budget < n + m {
        return 0;
    }
    let q = budget - n;
    let mut k = 0;
    let mut pow = m;
    while pow <= q && k < n {
        k += 1;
        pow = match pow.checked_mul(m) {
            Some(p) => p,
            None => break,
        };
    }
    k
}

pub fn plan_subdivision(domain: &InputBox, m: usize, budget: usize) -> SubdivisionPlan {
    let n = domain.len();
    if budget <= n {
        log::warn!(
            "subdivision budget {budget} does not exceed the {n} input variables; not subdividing"
        );
    }
    let k = chosen_count(n, m, budget);
    let widths: Vec<Rational> = domain.intervals().map(|iv| iv.width()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps declaration order among equal widths.
    order.sort_by(|&a, &b| widths[b].cmp(&widths[a]));
    let mut chosen: Vec<usize> = order.into_iter().take(k).collect();
    chosen.sort_unstable();
    let mut boxes = vec![domain.clone()];
    for &var in &chosen {
        let pieces = domain
            .intervals()
            .nth(var)
            .expect("chosen index in range")
            .split_equal(m);
        boxes = boxes
            .iter()
            .flat_map(|b| pieces.iter().map(move |p| b.with(var, p.clone())))
            .collect();
    }
    chosen.sort_by(|&a, &b| widths[b].cmp(&widths[a]).then(a.cmp(&b)));
    SubdivisionPlan {
        m,
        budget,
        chosen,
        sub_boxes: boxes,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubdivisionMethod {
    /// Direct Taylor relative bound, falling back to the Taylor absolute bound.
    Direct,
    /// Forward relative-via-absolute bound, falling back to its absolute bound.
    ViaAbsForward(RangeMethod),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SubdomainOutcome {
    Relative(RelErrorResult),
    /// The function may vanish here; the absolute bound replaces the relative one.
    Absolute(AbsErrorResult),
    /// The function may vanish here and the absolute analysis failed too.
    AbsoluteFailed(String),
    /// Analysis failed for a reason other than a zero in the range.
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdomainResult {
    pub sub_box: InputBox,
    pub outcome: SubdomainOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedSubdomain {
    pub sub_box: InputBox,
    /// `None` when even the absolute analysis failed.
    pub abs_bound: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionReport {
    /// Largest relative bound over the pieces where it exists.
    pub rel_bound: Option<Rational>,
    pub failed: Vec<FailedSubdomain>,
    pub total: usize,
    /// At least four fifths of the pieces failed, so the relative result is
    /// not worth reporting.
    pub suppressed: bool,
    /// Pieces whose analysis errored outright.
    pub errors: usize,
    /// Relative bound over the undivided box, when it exists.
    pub whole_domain_bound: Option<Rational>,
    pub per_subdomain: Vec<SubdomainResult>,
}

impl SubdivisionReport {
    /// Largest absolute fallback bound, if any piece failed.
    pub fn max_failed_abs(&self) -> Option<Rational> {
        self.failed.iter().filter_map(|f| f.abs_bound.clone()).max()
    }
}

fn analyze_piece(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    method: SubdivisionMethod,
    cfg: &RefinementConfig,
) -> SubdomainOutcome {
    let rel = match method {
        SubdivisionMethod::Direct => taylor_rel_direct(spec, prec, cfg),
        SubdivisionMethod::ViaAbsForward(rm) => rel_via_abs(spec, prec, rm, cfg),
    };
    match rel {
        Ok(r) => SubdomainOutcome::Relative(r),
        Err(e) if e.is_zero_range() => {
            let abs = match method {
                SubdivisionMethod::Direct => taylor_abs(spec, prec, cfg),
                SubdivisionMethod::ViaAbsForward(rm) => forward_abs_error(spec, prec, rm, cfg),
            };
            match abs {
                Ok(a) => SubdomainOutcome::Absolute(a),
                Err(e) => SubdomainOutcome::AbsoluteFailed(e.to_string()),
            }
        }
        Err(e) => SubdomainOutcome::Error(e.to_string()),
    }
}

/// Analyzes every sub-box of `plan` in parallel and combines the results.
pub fn analyze_subdivided(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    method: SubdivisionMethod,
    plan: &SubdivisionPlan,
    cfg: &RefinementConfig,
) -> Result<SubdivisionReport, AnalysisError> {
    let pieces: Vec<FunctionSpec> = plan
        .sub_boxes
        .iter()
        .map(|b| spec.with_domain(b.clone()))
        .collect::<Result<_, _>>()?;
    let (whole, mut per_subdomain) = rayon::join(
        || match pieces.len() {
            1 => None,
            _ => match analyze_piece(spec, prec, method, cfg) {
                SubdomainOutcome::Relative(r) => Some(r.bound),
                _ => None,
            },
        },
        || {
            pieces
                .par_iter()
                .map(|piece| SubdomainResult {
                    sub_box: piece.domain().clone(),
                    outcome: analyze_piece(piece, prec, method, cfg),
                })
                .collect::<Vec<_>>()
        },
    );
    // A bound over the whole box holds on every piece. Optimizer gaps can
    // leave a piece slightly above it, so keep the smaller of the two.
    if let Some(w) = &whole {
        for r in &mut per_subdomain {
            if let SubdomainOutcome::Relative(rel) = &mut r.outcome {
                if rel.bound > *w {
                    rel.bound = w.clone();
                }
            }
        }
    }
    let mut rel_bound: Option<Rational> = None;
    let mut failed = Vec::new();
    let mut errors = 0;
    for r in &per_subdomain {
        match &r.outcome {
            SubdomainOutcome::Relative(rel) => {
                if rel_bound.as_ref().is_none_or(|b| rel.bound > *b) {
                    rel_bound = Some(rel.bound.clone());
                }
            }
            SubdomainOutcome::Absolute(abs) => failed.push(FailedSubdomain {
                sub_box: r.sub_box.clone(),
                abs_bound: Some(abs.bound.clone()),
            }),
            SubdomainOutcome::AbsoluteFailed(_) => failed.push(FailedSubdomain {
                sub_box: r.sub_box.clone(),
                abs_bound: None,
            }),
            SubdomainOutcome::Error(_) => errors += 1,
        }
    }
    let total = per_subdomain.len();
    let suppressed = total > 0 && 5 * failed.len() >= 4 * total;
    Ok(SubdivisionReport {
        rel_bound,
        failed,
        total,
        suppressed,
        errors,
        whole_domain_bound: whole,
        per_subdomain,
    })
}
