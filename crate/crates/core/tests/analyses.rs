//! Whole analyses against sampled errors and closed-form values, plus the
//! laws subdivision and the external solver backend must obey.

use std::fs;
use std::path::PathBuf;

use fpbound_core::dataflow::{forward_abs_error, rel_via_abs};
use fpbound_core::exact::{InputBox, Interval, Rational};
use fpbound_core::expr::{parse, FunctionSpec, PrecisionSpec};
use fpbound_core::range::{
    range_ia, range_refined_report, Backend, NoiseMode, RangeMethod, RefinementConfig,
};
use fpbound_core::sampler::underapprox;
use fpbound_core::subdivision::{
    analyze_subdivided, chosen_count, plan_subdivision, SubdivisionMethod, SubdomainOutcome,
};
use fpbound_core::taylor::{naive_rel, taylor_abs, taylor_rel_direct, taylor_rel_via_abs};
use proptest::prelude::*;

const METHODS: [RangeMethod; 3] = [
    RangeMethod::IntervalOnly,
    RangeMethod::AffineOnly,
    RangeMethod::IntervalWithRefinement,
];

fn spec(text: &str) -> FunctionSpec {
    parse(text).unwrap()
}

fn functions() -> Vec<FunctionSpec> {
    [
        "def prod(x: Real, y: Real): Real = { require(1 <= x && x <= 2 && 1 <= y && y <= 2)\n x * y + 1 }",
        "def ratio(x: Real, y: Real): Real = { require(1 <= x && x <= 2 && 3 <= y && y <= 4)\n (x + y) / (y - x) }",
        "def root(x: Real): Real = { require(1 <= x && x <= 4)\n sqrt(x) * 0.1 + x }",
        "def cubic(u: Real): Real = { require(0.5 <= u && u <= 1)\n (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0 }",
    ]
    .into_iter()
    .map(spec)
    .collect()
}

fn eps() -> Rational {
    Rational::pow2(-53)
}

#[test]
fn every_engine_bounds_the_sampled_error() {
    let cfg = RefinementConfig::default();
    for prec in [PrecisionSpec::float64(), PrecisionSpec::float32()] {
        for f in functions() {
            let seen = underapprox(&f, &prec, 3000, 7);
            let seen_rel = seen.max_rel.clone().unwrap();
            let name = f.name();
            let mut abs = vec![("taylor abs", taylor_abs(&f, &prec, &cfg).unwrap().bound)];
            let mut rel = vec![
                (
                    "taylor rel",
                    taylor_rel_direct(&f, &prec, &cfg).unwrap().bound,
                ),
                (
                    "taylor rel via abs",
                    taylor_rel_via_abs(&f, &prec, &cfg).unwrap().bound,
                ),
                ("naive", naive_rel(&f, &prec, &cfg).unwrap().bound),
            ];
            for rm in METHODS {
                abs.push((
                    "forward",
                    forward_abs_error(&f, &prec, rm, &cfg).unwrap().bound,
                ));
                // Coarse ranges may straddle zero, which is a refusal rather than a bound.
                match rel_via_abs(&f, &prec, rm, &cfg) {
                    Ok(r) => rel.push(("rel via abs", r.bound)),
                    Err(e) => assert!(
                        e.is_zero_range() && rm != RangeMethod::IntervalWithRefinement,
                        "{name}: {e}"
                    ),
                }
            }
            for (what, b) in abs {
                assert!(
                    b >= seen.max_abs,
                    "{name} {} {what}: {b} < observed {}",
                    prec.name,
                    seen.max_abs
                );
            }
            for (what, b) in rel {
                assert!(
                    b >= seen_rel,
                    "{name} {} {what}: {b} < observed {seen_rel}",
                    prec.name
                );
            }
        }
    }
}

/// The identity rounds its input once, so its relative error is at most eps
/// and reaches it; a forward analysis charges the input rounding twice.
#[test]
fn identity_has_relative_error_eps() {
    let f = spec("def id(x: Real): Real = { require(1 <= x && x <= 2)\n x }");
    let cfg = RefinementConfig::default();
    let prec = PrecisionSpec::float64();
    let direct = taylor_rel_direct(&f, &prec, &cfg).unwrap().bound;
    assert!(direct >= eps());
    assert!(direct <= eps() * Rational::ratio(6, 5).unwrap());
    let via = rel_via_abs(&f, &prec, RangeMethod::IntervalOnly, &cfg)
        .unwrap()
        .bound;
    assert!(via >= eps() * Rational::ratio(19, 10).unwrap());
}

/// `x * y` with both inputs rounded: first order `3 eps |xy|` plus delta terms.
#[test]
fn product_absolute_error_matches_the_first_order_formula() {
    let f = spec("def mul(x: Real, y: Real): Real = { require(1 <= x && x <= 2 && 1 <= y && y <= 2)\n x * y }");
    let b = taylor_abs(&f, &PrecisionSpec::float64(), &RefinementConfig::default())
        .unwrap()
        .bound;
    let first_order = eps() * Rational::from_int(12);
    assert!(b >= first_order);
    assert!(b <= first_order * Rational::ratio(101, 100).unwrap());
}

#[test]
fn relative_analyses_reject_functions_that_may_vanish() {
    let f = spec("def lin(x: Real): Real = { require(-1 <= x && x <= 1)\n x + 0.5 }");
    let cfg = RefinementConfig::default();
    let prec = PrecisionSpec::float64();
    assert!(taylor_rel_direct(&f, &prec, &cfg)
        .unwrap_err()
        .is_zero_range());
    assert!(rel_via_abs(&f, &prec, RangeMethod::IntervalOnly, &cfg)
        .unwrap_err()
        .is_zero_range());
    assert!(taylor_abs(&f, &prec, &cfg).is_ok());
}

#[test]
fn subdivision_isolates_the_zero() {
    let f = spec("def lin(x: Real): Real = { require(-3 <= x && x <= 5)\n x * 2.0 }");
    let plan = plan_subdivision(f.domain(), 4, 50);
    let prec = PrecisionSpec::float64();
    let report = analyze_subdivided(
        &f,
        &prec,
        SubdivisionMethod::Direct,
        &plan,
        &RefinementConfig::default(),
    )
    .unwrap();
    assert_eq!(report.total, 4);
    assert_eq!(report.failed.len(), 1);
    assert_eq!(
        report.failed[0].sub_box.get("x").unwrap(),
        &Interval::from_ints(-1, 1)
    );
    let rel = report.rel_bound.clone().unwrap();
    for piece in &report.per_subdomain {
        let seen = underapprox(
            &f.with_domain(piece.sub_box.clone()).unwrap(),
            &prec,
            2000,
            3,
        );
        match &piece.outcome {
            SubdomainOutcome::Relative(r) => {
                assert!(r.bound <= rel);
                assert!(r.bound >= seen.max_rel.unwrap());
            }
            SubdomainOutcome::Absolute(a) => assert!(a.bound >= seen.max_abs),
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}

fn domain(widths: &[i64]) -> InputBox {
    InputBox::new(
        widths
            .iter()
            .enumerate()
            .map(|(k, w)| (format!("v{k}"), Interval::from_ints(0, *w)))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn chosen_count_is_the_largest_power_within_budget(n in 0usize..8, m in 2usize..10, budget in 0usize..2000) {
        let k = chosen_count(n, m, budget);
        prop_assert!(k <= n);
        if k > 0 {
            prop_assert!(m.pow(k as u32) + n <= budget);
        }
        if k < n && budget >= n {
            prop_assert!(m.pow(k as u32 + 1) > budget - n);
        }
    }

    #[test]
    fn sub_boxes_partition_the_domain(widths in prop::collection::vec(1i64..6, 1..4), m in 2usize..5, budget in 1usize..200) {
        let d = domain(&widths);
        let plan = plan_subdivision(&d, m, budget);
        let k = chosen_count(d.len(), m, budget);
        prop_assert_eq!(plan.chosen.len(), k);
        prop_assert_eq!(plan.sub_boxes.len(), m.pow(k as u32));
        let volume = |b: &InputBox| b.intervals().map(Interval::width).fold(Rational::one(), |a, w| a * w);
        let total: Rational = plan.sub_boxes.iter().map(volume).sum();
        prop_assert_eq!(total, volume(&d));
        for b in &plan.sub_boxes {
            prop_assert!(b.is_subset_of(&d));
        }
        // Widest first; ties in declaration order.
        for w in plan.chosen.windows(2) {
            prop_assert!(widths[w[0]] > widths[w[1]] || (widths[w[0]] == widths[w[1]] && w[0] < w[1]));
        }
        if let Some(&last) = plan.chosen.last() {
            prop_assert!((0..widths.len()).filter(|v| !plan.chosen.contains(v)).all(|v| widths[v] <= widths[last]));
        }
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let f = &functions()[1];
    let prec = PrecisionSpec::float64();
    let a = underapprox(f, &prec, 500, 11);
    assert_eq!(a, underapprox(f, &prec, 500, 11));
    assert_ne!(a.max_abs, underapprox(f, &prec, 500, 12).max_abs);
}

/// A stand-in solver: records its input and gives a fixed answer.
struct StubSolver {
    dir: PathBuf,
}

impl StubSolver {
    fn new(tag: &str, answer: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("fpbound-stub-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(
            dir.join("solver.sh"),
            format!("cat > \"{}/query.smt2\"\necho {answer}\n", dir.display()),
        )
        .unwrap();
        StubSolver { dir }
    }

    fn config(&self) -> RefinementConfig {
        RefinementConfig {
            backend: Backend::ExternalSmtProcess,
            solver_command: Some(vec![
                "sh".into(),
                self.dir.join("solver.sh").display().to_string(),
            ]),
            ..RefinementConfig::default()
        }
    }

    fn last_query(&self) -> String {
        fs::read_to_string(self.dir.join("query.smt2")).unwrap()
    }
}

impl Drop for StubSolver {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

#[test]
fn solver_answers_drive_range_refinement() {
    // u - u*u on [0, 1]: interval range [-1, 1], true range [0, 1/4].
    let f = spec("def hump(u: Real): Real = { require(0 <= u && u <= 1)\n u - u * u }");
    let ia = range_ia(f.body(), f.domain()).unwrap();

    let sat = StubSolver::new("sat", "sat");
    let r =
        range_refined_report(f.body(), f.domain(), &NoiseMode::Zero, &[], &sat.config()).unwrap();
    assert!(!r.degraded);
    assert!(r.queries > 0);
    assert_eq!(r.range, ia);
    let query = sat.last_query();
    assert!(query.contains("(check-sat)"));
    assert!(query.starts_with("(set-logic QF_NRA)"));
    assert!(query.contains("(declare-fun"));

    let unsat = StubSolver::new("unsat", "unsat");
    let r =
        range_refined_report(f.body(), f.domain(), &NoiseMode::Zero, &[], &unsat.config()).unwrap();
    let quarter = Rational::ratio(1, 4).unwrap();
    assert!(
        r.range.hi() >= &quarter
            && r.range.hi() <= &(&quarter * Rational::ratio(101, 100).unwrap())
    );
    assert!(r.range.lo() <= &Rational::zero());

    let confused = StubSolver::new("unknown", "(error \"bad\")");
    let r = range_refined_report(
        f.body(),
        f.domain(),
        &NoiseMode::Zero,
        &[],
        &confused.config(),
    )
    .unwrap();
    assert_eq!(r.range, ia);
}

#[test]
fn missing_solver_degrades_to_the_interval_range() {
    let f = spec("def hump(u: Real): Real = { require(0 <= u && u <= 1)\n u - u * u }");
    let cfg = RefinementConfig {
        backend: Backend::ExternalSmtProcess,
        solver_command: Some(vec!["/nonexistent/solver".into()]),
        ..RefinementConfig::default()
    };
    let r = range_refined_report(f.body(), f.domain(), &NoiseMode::Zero, &[], &cfg).unwrap();
    assert!(r.degraded);
    assert_eq!(r.range, range_ia(f.body(), f.domain()).unwrap());
}
