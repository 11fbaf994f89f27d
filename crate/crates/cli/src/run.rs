use std::fs;
use std::time::Duration;

use anyhow::{bail, Context};
use fpbound_core::dataflow::{forward_abs_error, rel_via_abs};
use fpbound_core::expr::{parse_file, FunctionSpec, PrecisionSpec};
use fpbound_core::range::{RangeMethod, RefinementConfig};
use fpbound_core::result::Diagnostics;
use fpbound_core::sampler::{underapprox, underapprox_on};
use fpbound_core::subdivision::{
    analyze_subdivided, plan_subdivision, SubdivisionMethod, SubdomainOutcome,
};
use fpbound_core::taylor::{naive_rel, taylor_abs, taylor_rel_direct};

use crate::config::{default_subdivision, Approach, RunConfig};
use crate::corpus::corpus;
use crate::report::{Failure, FunctionReport, Outcome, RunReport, SCHEMA_VERSION};

/// Parses every input and runs the selected analysis on each function.
/// Errors are usage or input problems; analysis failures are recorded in
/// the report instead.
pub fn run(cfg: &RunConfig) -> anyhow::Result<RunReport> {
    cfg.validate().map_err(anyhow::Error::msg)?;
    let prec = cfg.engine.precision_spec().map_err(anyhow::Error::msg)?;
    let rcfg = cfg.engine.refinement().map_err(anyhow::Error::msg)?;
    let specs = load_inputs(cfg)?;
    let functions = specs
        .iter()
        .map(|spec| {
            log::info!("analyzing {}", spec.name());
            let mut report = analyze(spec, &prec, cfg, &rcfg);
            if !cfg.timings {
                clear_timings(&mut report.outcome);
            }
            report
        })
        .collect();
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        precision: prec.name.clone(),
        approach: cfg.approach,
        functions,
    })
}

fn load_inputs(cfg: &RunConfig) -> anyhow::Result<Vec<FunctionSpec>> {
    let mut specs = Vec::new();
    if cfg.corpus {
        for b in corpus() {
            specs.push(
                b.spec()
                    .with_context(|| format!("bundled benchmark {}", b.name))?,
            );
        }
    }
    for path in &cfg.inputs {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let parsed = parse_file(&text).with_context(|| format!("{}", path.display()))?;
        if parsed.is_empty() {
            bail!("{}: no function definitions", path.display());
        }
        specs.extend(parsed);
    }
    Ok(specs)
}

pub fn analyze(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &RunConfig,
    rcfg: &RefinementConfig,
) -> FunctionReport {
    let rm: RangeMethod = cfg.engine.range_method.into();
    let failed = |e: &fpbound_core::error::AnalysisError| Outcome::Failed {
        failure: Failure::from(e),
    };
    let mut sample_boxes = None;
    let outcome = if cfg.subdivide {
        let (dm, db) = default_subdivision(spec.params().len());
        let plan = plan_subdivision(spec.domain(), cfg.m.unwrap_or(dm), cfg.budget.unwrap_or(db));
        let method = match cfg.approach {
            Approach::RelViaAbs => SubdivisionMethod::ViaAbsForward(rm),
            _ => SubdivisionMethod::Direct,
        };
        match analyze_subdivided(spec, prec, method, &plan, rcfg) {
            Ok(report) => {
                sample_boxes = Some(
                    report
                        .per_subdomain
                        .iter()
                        .filter(|s| matches!(s.outcome, SubdomainOutcome::Relative(_)))
                        .map(|s| s.sub_box.clone())
                        .collect::<Vec<_>>(),
                );
                let names: Vec<&str> = spec.domain().names().collect();
                Outcome::Subdivided {
                    m: plan.m,
                    budget: plan.budget,
                    chosen: plan.chosen.iter().map(|&k| names[k].to_string()).collect(),
                    report,
                }
            }
            Err(e) => failed(&e),
        }
    } else {
        let rel = |r: Result<_, _>| match r {
            Ok(result) => Outcome::Relative { result },
            Err(e) => failed(&e),
        };
        let abs = |r: Result<_, _>| match r {
            Ok(result) => Outcome::Absolute { result },
            Err(e) => failed(&e),
        };
        match cfg.approach {
            Approach::Forward => abs(forward_abs_error(spec, prec, rm, rcfg)),
            Approach::TaylorAbs => abs(taylor_abs(spec, prec, rcfg)),
            Approach::TaylorRel => rel(taylor_rel_direct(spec, prec, rcfg)),
            Approach::RelViaAbs => rel(rel_via_abs(spec, prec, rm, rcfg)),
            Approach::Naive => rel(naive_rel(spec, prec, rcfg)),
        }
    };
    let sample = (cfg.samples > 0).then(|| match &sample_boxes {
        // Compare the subdivided bound only with points where it applies.
        Some(boxes) if !boxes.is_empty() => {
            underapprox_on(spec, prec, boxes, cfg.samples, cfg.seed).ok()
        }
        Some(_) => None,
        None => Some(underapprox(spec, prec, cfg.samples, cfg.seed)),
    });
    FunctionReport {
        name: spec.name().to_string(),
        domain: spec.domain().clone(),
        outcome,
        sample: sample.flatten(),
    }
}

fn clear(d: &mut Diagnostics) {
    d.wall_time = Duration::ZERO;
}

fn clear_timings(o: &mut Outcome) {
    match o {
        Outcome::Absolute { result } => clear(&mut result.diagnostics),
        Outcome::Relative { result } => clear(&mut result.diagnostics),
        Outcome::Subdivided { report, .. } => {
            for s in &mut report.per_subdomain {
                match &mut s.outcome {
                    SubdomainOutcome::Relative(r) => clear(&mut r.diagnostics),
                    SubdomainOutcome::Absolute(a) => clear(&mut a.diagnostics),
                    _ => {}
                }
            }
        }
        Outcome::Failed { .. } => {}
    }
}
