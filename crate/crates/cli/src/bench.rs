//! Side-by-side comparison of every approach on the bundled benchmarks, with
//! sampled errors as a floor that every sound bound must clear.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::bail;
use fpbound_core::dataflow::rel_via_abs;
use fpbound_core::error::AnalysisError;
use fpbound_core::exact::Rational;
use fpbound_core::expr::{FunctionSpec, PrecisionSpec};
use fpbound_core::range::{RangeMethod, RefinementConfig};
use fpbound_core::result::RelErrorResult;
use fpbound_core::sampler::{underapprox, SampleReport};
use fpbound_core::subdivision::{
    analyze_subdivided, plan_subdivision, SubdivisionMethod, SubdomainOutcome,
};
use fpbound_core::taylor::{naive_rel, taylor_rel_direct};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{default_subdivision, BenchConfig, OutputFormat};
use crate::corpus::corpus;
use crate::report::{sci, DIGITS, SCHEMA_VERSION};

pub const COLUMNS: [&str; 5] = [
    "fwd rel-via-abs",
    "taylor-rel",
    "naive",
    "subdiv taylor-rel",
    "subdiv rel-via-abs",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum CellValue {
    Bound {
        rel: Rational,
    },
    Subdivided {
        rel: Option<Rational>,
        max_failed_abs: Option<Rational>,
        failures: usize,
        total: usize,
        suppressed: bool,
    },
    Missing {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Cell {
    pub column: String,
    pub value: CellValue,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub name: String,
    pub observed: SampleReport,
    pub cells: Vec<Cell>,
    /// Sound bounds found below an observed error. Always empty unless an analysis is broken.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub schema_version: u32,
    pub precision: String,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn violations(&self) -> impl Iterator<Item = &String> {
        self.rows.iter().flat_map(|r| r.violations.iter())
    }
}

pub fn bench(cfg: &BenchConfig) -> anyhow::Result<BenchReport> {
    cfg.validate().map_err(anyhow::Error::msg)?;
    let prec = cfg.engine.precision_spec().map_err(anyhow::Error::msg)?;
    let rcfg = cfg.engine.refinement().map_err(anyhow::Error::msg)?;
    let records: Vec<_> = corpus()
        .into_iter()
        .filter(|b| cfg.only.is_empty() || cfg.only.iter().any(|n| n == b.name))
        .collect();
    if records.is_empty() {
        bail!("no bundled benchmark matches {:?}", cfg.only);
    }
    let specs = records
        .iter()
        .map(|b| b.spec())
        .collect::<Result<Vec<_>, _>>()?;
    let rows = specs
        .par_iter()
        .map(|spec| bench_row(spec, &prec, cfg, &rcfg))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        precision: prec.name.clone(),
        samples: cfg.samples,
        seed: cfg.seed,
        rows,
    })
}

type Engine<'a> = Box<dyn Fn() -> Result<RelErrorResult, AnalysisError> + Sync + 'a>;

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

fn missing(e: &AnalysisError) -> CellValue {
    let reason = if e.is_zero_range() {
        "range may contain zero".to_string()
    } else {
        e.to_string()
    };
    CellValue::Missing { reason }
}

pub fn bench_row(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    cfg: &BenchConfig,
    rcfg: &RefinementConfig,
) -> anyhow::Result<BenchRow> {
    let rm: RangeMethod = cfg.engine.range_method.into();
    let observed = underapprox(spec, prec, cfg.samples, cfg.seed);
    let mut violations = Vec::new();
    let check_rel =
        |column: &str, bound: &Rational, seen: Option<&Rational>, violations: &mut Vec<String>| {
            if let Some(seen) = seen.filter(|s| *s > bound) {
                violations.push(format!(
                    "{} {column}: bound {} below observed relative error {}",
                    spec.name(),
                    sci(bound),
                    seen.to_sci_inward(DIGITS)
                ));
            }
        };
    let mut cells = Vec::new();
    let whole: [(&str, Engine); 3] = [
        (COLUMNS[0], Box::new(|| rel_via_abs(spec, prec, rm, rcfg))),
        (COLUMNS[1], Box::new(|| taylor_rel_direct(spec, prec, rcfg))),
        (COLUMNS[2], Box::new(|| naive_rel(spec, prec, rcfg))),
    ];
    for (column, engine) in whole {
        let (r, seconds) = timed(engine);
        let value = match r {
            Ok(r) => {
                check_rel(column, &r.bound, observed.max_rel.as_ref(), &mut violations);
                CellValue::Bound { rel: r.bound }
            }
            Err(e) => missing(&e),
        };
        cells.push(Cell {
            column: column.to_string(),
            value,
            seconds,
        });
    }

    let (dm, db) = default_subdivision(spec.params().len());
    let plan = plan_subdivision(spec.domain(), cfg.m.unwrap_or(dm), cfg.budget.unwrap_or(db));
    let per_piece = cfg.samples.div_ceil(plan.sub_boxes.len()).max(1);
    let piece_samples: Vec<SampleReport> = plan
        .sub_boxes
        .par_iter()
        .enumerate()
        .map(|(k, b)| {
            Ok(underapprox(
                &spec.with_domain(b.clone())?,
                prec,
                per_piece,
                cfg.seed.wrapping_add(k as u64),
            ))
        })
        .collect::<Result<_, fpbound_core::expr::SpecError>>()?;
    for (column, method) in [
        (COLUMNS[3], SubdivisionMethod::Direct),
        (COLUMNS[4], SubdivisionMethod::ViaAbsForward(rm)),
    ] {
        let (r, seconds) = timed(|| analyze_subdivided(spec, prec, method, &plan, rcfg));
        let value = match r {
            Ok(report) => {
                for (piece, seen) in report.per_subdomain.iter().zip(&piece_samples) {
                    match &piece.outcome {
                        SubdomainOutcome::Relative(x) => {
                            check_rel(column, &x.bound, seen.max_rel.as_ref(), &mut violations)
                        }
                        SubdomainOutcome::Absolute(x) if seen.max_abs > x.bound => {
                            violations.push(format!(
                                "{} {column} on ({}): absolute bound {} below observed {}",
                                spec.name(),
                                piece.sub_box,
                                sci(&x.bound),
                                seen.max_abs.to_sci_inward(DIGITS)
                            ))
                        }
                        _ => {}
                    }
                }
                CellValue::Subdivided {
                    max_failed_abs: report.max_failed_abs(),
                    failures: report.failed.len(),
                    total: report.total,
                    suppressed: report.suppressed,
                    rel: report.rel_bound.clone(),
                }
            }
            Err(e) => missing(&e),
        };
        cells.push(Cell {
            column: column.to_string(),
            value,
            seconds,
        });
    }
    Ok(BenchRow {
        name: spec.name().to_string(),
        observed,
        cells,
        violations,
    })
}

fn cell_text(v: &CellValue) -> String {
    match v {
        CellValue::Bound { rel } => sci(rel),
        CellValue::Subdivided {
            suppressed: true, ..
        }
        | CellValue::Subdivided { rel: None, .. }
        | CellValue::Missing { .. } => "-".to_string(),
        CellValue::Subdivided {
            rel: Some(rel),
            max_failed_abs,
            failures,
            ..
        } => match max_failed_abs {
            Some(a) => format!("{} ({}, {failures})", sci(rel), sci(a)),
            None if *failures > 0 => format!("{} (-, {failures})", sci(rel)),
            None => sci(rel),
        },
    }
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

pub fn render_bench_text(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Relative error bounds ({}, {} sampled points, seed {})",
        report.precision, report.samples, report.seed
    );
    let mut header = vec!["benchmark".to_string(), "underapprox".to_string()];
    header.extend(COLUMNS.iter().map(|c| c.to_string()));
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.name.clone(),
                r.observed
                    .max_rel
                    .as_ref()
                    .map_or("-".into(), |x| x.to_sci_inward(DIGITS)),
            ];
            cells.extend(r.cells.iter().map(|c| cell_text(&c.value)));
            cells
        })
        .collect();
    table(&mut out, &header, &rows);
    let _ = writeln!(out, "\nWall time (s)");
    header.remove(1);
    let times: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.name.clone()];
            cells.extend(r.cells.iter().map(|c| format!("{:.2}", c.seconds)));
            cells
        })
        .collect();
    table(&mut out, &header, &times);
    let violations: Vec<&String> = report.violations().collect();
    if violations.is_empty() {
        let _ = writeln!(
            out,
            "\nSoundness floor: every bound is at least the observed error."
        );
    } else {
        let _ = writeln!(out, "\nSOUNDNESS FLOOR VIOLATED");
        for v in violations {
            let _ = writeln!(out, "  {v}");
        }
    }
    out
}

pub fn render_bench(report: &BenchReport, format: OutputFormat) -> anyhow::Result<String> {
    Ok(match format {
        OutputFormat::Text => render_bench_text(report),
        OutputFormat::Json => serde_json::to_string_pretty(report)? + "\n",
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["benchmark", "column", "bound", "seconds", "observed_rel"])?;
            for r in &report.rows {
                let seen = r
                    .observed
                    .max_rel
                    .as_ref()
                    .map(|x| x.to_sci_inward(DIGITS))
                    .unwrap_or_default();
                for c in &r.cells {
                    w.write_record([
                        r.name.as_str(),
                        &c.column,
                        &cell_text(&c.value),
                        &format!("{:.3}", c.seconds),
                        &seen,
                    ])?;
                }
            }
            String::from_utf8(w.into_inner()?)?
        }
    })
}
