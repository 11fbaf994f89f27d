//! Serializable run reports and their text, csv and json renderings.

use std::fmt::Write as _;

use fpbound_core::error::AnalysisError;
use fpbound_core::exact::{InputBox, Interval, Rational};
use fpbound_core::result::{AbsErrorResult, RelErrorResult};
use fpbound_core::sampler::SampleReport;
use fpbound_core::subdivision::{SubdivisionReport, SubdomainOutcome};
use serde::{Deserialize, Serialize};

use crate::config::Approach;

pub const SCHEMA_VERSION: u32 = 1;
pub const DIGITS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub schema_version: u32,
    pub precision: String,
    pub approach: Approach,
    pub functions: Vec<FunctionReport>,
}

impl RunReport {
    pub fn all_succeeded(&self) -> bool {
        self.functions
            .iter()
            .all(|f| !matches!(f.outcome, Outcome::Failed { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FunctionReport {
    pub name: String,
    pub domain: InputBox,
    pub outcome: Outcome,
    pub sample: Option<SampleReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Outcome {
    Absolute {
        result: AbsErrorResult,
    },
    Relative {
        result: RelErrorResult,
    },
    Subdivided {
        m: usize,
        budget: usize,
        chosen: Vec<String>,
        report: SubdivisionReport,
    },
    Failed {
        failure: Failure,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Failure {
    /// The function may vanish, so its relative error is undefined.
    pub zero_range: bool,
    pub range: Option<Interval>,
    pub message: String,
}

impl From<&AnalysisError> for Failure {
    fn from(e: &AnalysisError) -> Self {
        match e {
            AnalysisError::ZeroRangeFailure { range } => Failure {
                zero_range: true,
                range: Some((**range).clone()),
                message: format!(
                    "relative error undefined: the result range {} may contain zero",
                    range_text(range)
                ),
            },
            other => Failure {
                zero_range: false,
                range: None,
                message: other.to_string(),
            },
        }
    }
}

pub fn sci(r: &Rational) -> String {
    r.to_sci_outward(DIGITS)
}

/// Interval endpoints in scientific notation, each rounded outward.
pub fn range_text(iv: &Interval) -> String {
    let end = |r: &Rational, up: bool| {
        if r.is_negative() == up {
            r.to_sci_inward(DIGITS)
        } else {
            r.to_sci_outward(DIGITS)
        }
    };
    format!("[{}, {}]", end(iv.lo(), false), end(iv.hi(), true))
}

pub fn render_text(report: &RunReport, details: bool) -> String {
    let mut out = String::new();
    for (k, f) in report.functions.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} ({}, {}, {})",
            f.name,
            report.precision,
            report.approach.label(),
            f.domain
        );
        match &f.outcome {
            Outcome::Absolute { result } => {
                let _ = writeln!(out, "absError: {}", sci(&result.bound));
                if details {
                    let _ = writeln!(out, "range: {}", range_text(&result.result_range));
                    if let Some(trace) = &result.per_node_trace {
                        for t in trace {
                            let _ = writeln!(
                                out,
                                "  node {:>3} {:<5} range {} roundoff {}",
                                t.node,
                                t.op,
                                range_text(&t.range),
                                sci(&t.new_roundoff)
                            );
                        }
                    }
                }
            }
            Outcome::Relative { result } => {
                let _ = writeln!(out, "relError: {}", sci(&result.bound));
                if details {
                    let _ = writeln!(out, "range: {}", range_text(&result.result_range));
                    let d = &result.diagnostics;
                    if let (Some(a), Some(b)) = (&d.first_order, &d.remainder) {
                        let _ = writeln!(out, "first order: {}, remainder: {}", sci(a), sci(b));
                    }
                    let _ = writeln!(out, "optimizer queries: {}", d.query_count);
                }
            }
            Outcome::Subdivided {
                m,
                budget,
                chosen,
                report: r,
            } => render_subdivided(&mut out, *m, *budget, chosen, r, details),
            Outcome::Failed { failure } => {
                let _ = writeln!(out, "error: {}", failure.message);
            }
        }
        if let Some(s) = &f.sample {
            let rel = s
                .max_rel
                .as_ref()
                .map_or("-".to_string(), |r| r.to_sci_inward(DIGITS));
            let _ = writeln!(
                out,
                "observed over {} points: absError {}, relError {}",
                s.samples,
                s.max_abs.to_sci_inward(DIGITS),
                rel
            );
        }
    }
    out
}

fn render_subdivided(
    out: &mut String,
    m: usize,
    budget: usize,
    chosen: &[String],
    r: &SubdivisionReport,
    details: bool,
) {
    if details {
        let _ = writeln!(
            out,
            "subdivided {} into {} pieces (m = {m}, budget = {budget})",
            chosen.join(", "),
            r.total
        );
    }
    if r.suppressed {
        let _ = writeln!(
            out,
            "relError: - (relative error fails on {} of {} sub-intervals)",
            r.failed.len(),
            r.total
        );
    } else {
        match &r.rel_bound {
            Some(b) => {
                let _ = writeln!(out, "relError: {}", sci(b));
            }
            None => {
                let _ = writeln!(out, "relError: -");
            }
        }
    }
    if !r.failed.is_empty() {
        let _ = writeln!(
            out,
            "On several sub-intervals relative error cannot be computed."
        );
        let _ = writeln!(out, "Computing absolute error on these sub-intervals.");
        for f in &r.failed {
            let bound = f.abs_bound.as_ref().map_or("-".to_string(), sci);
            let _ = writeln!(out, "For intervals ({}), absError: {bound}", f.sub_box);
        }
    }
    if r.errors > 0 {
        let _ = writeln!(out, "Analysis failed on {} sub-intervals.", r.errors);
    }
    if details {
        for s in &r.per_subdomain {
            let line = match &s.outcome {
                SubdomainOutcome::Relative(x) => format!("relError {}", sci(&x.bound)),
                SubdomainOutcome::Absolute(x) => format!("absError {}", sci(&x.bound)),
                SubdomainOutcome::AbsoluteFailed(e) | SubdomainOutcome::Error(e) => {
                    format!("error: {e}")
                }
            };
            let _ = writeln!(out, "  ({}) {line}", s.sub_box);
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    approach: &'a str,
    status: &'a str,
    bound: String,
    bound_exact: String,
    range_lo: String,
    range_hi: String,
    subdomains: Option<usize>,
    failed_subdomains: Option<usize>,
    suppressed: Option<bool>,
    max_failed_abs: String,
    observed_abs: String,
    observed_rel: String,
    message: String,
}

/// One row per function with fixed columns: name, approach, status, bound,
/// bound_exact, range_lo, range_hi, subdomains, failed_subdomains,
/// suppressed, max_failed_abs, observed_abs, observed_rel, message.
pub fn render_csv(report: &RunReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for f in &report.functions {
        let mut row = CsvRow {
            name: &f.name,
            approach: report.approach.label(),
            status: "",
            bound: String::new(),
            bound_exact: String::new(),
            range_lo: String::new(),
            range_hi: String::new(),
            subdomains: None,
            failed_subdomains: None,
            suppressed: None,
            max_failed_abs: String::new(),
            observed_abs: String::new(),
            observed_rel: String::new(),
            message: String::new(),
        };
        let set_range = |row: &mut CsvRow, iv: &Interval| {
            row.range_lo = iv.lo().to_string();
            row.range_hi = iv.hi().to_string();
        };
        match &f.outcome {
            Outcome::Absolute { result } => {
                row.status = "absolute";
                row.bound = sci(&result.bound);
                row.bound_exact = result.bound.to_string();
                set_range(&mut row, &result.result_range);
            }
            Outcome::Relative { result } => {
                row.status = "relative";
                row.bound = sci(&result.bound);
                row.bound_exact = result.bound.to_string();
                set_range(&mut row, &result.result_range);
            }
            Outcome::Subdivided { report: r, .. } => {
                row.status = if r.suppressed {
                    "suppressed"
                } else {
                    "subdivided"
                };
                if let Some(b) = r.rel_bound.as_ref().filter(|_| !r.suppressed) {
                    row.bound = sci(b);
                    row.bound_exact = b.to_string();
                }
                row.subdomains = Some(r.total);
                row.failed_subdomains = Some(r.failed.len());
                row.suppressed = Some(r.suppressed);
                row.max_failed_abs = r.max_failed_abs().map(|b| sci(&b)).unwrap_or_default();
            }
            Outcome::Failed { failure } => {
                row.status = "failed";
                row.message = failure.message.clone();
                if let Some(iv) = &failure.range {
                    set_range(&mut row, iv);
                }
            }
        }
        if let Some(s) = &f.sample {
            row.observed_abs = s.max_abs.to_sci_inward(DIGITS);
            row.observed_rel = s
                .max_rel
                .as_ref()
                .map(|r| r.to_sci_inward(DIGITS))
                .unwrap_or_default();
        }
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render_json(report: &RunReport) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}
