//! Interval branch and bound for global maximization.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::ia::{Hint, NoiseMode};
use super::objective::{max_opt, Objective, Probe};
use super::refine::{maximize_by_search, InternalDecider};
use super::{smt::SmtDecider, Backend, BoundResult, RangeError, RefinementConfig, Verdict};
use crate::exact::{InputBox, Rational};
use crate::expr::{Expr, NoiseBounds};

/// Upper bound `None` stands for "no finite enclosure yet".
struct Node {
    upper: Option<Rational>,
    seq: u64,
    domain: InputBox,
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        let by_upper = match (&self.upper, &other.upper) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => a.cmp(b),
        };
        // Older nodes first among equals, for determinism.
        by_upper.then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

fn min_upper(a: Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y.clone())),
        (None, y) => y.clone(),
        (x, None) => x,
    }
}

fn upper_le(u: &Option<Rational>, l: &Option<Rational>) -> bool {
    matches!((u, l), (Some(u), Some(l)) if u <= l)
}

/// Sound upper bound on `max |e|` over `domain` with every noise symbol in its bound.
pub fn maximize_abs(
    e: &Expr,
    domain: &InputBox,
    noise: &NoiseBounds,
    cfg: &RefinementConfig,
) -> Result<BoundResult, RangeError> {
    maximize_objective(
        &Objective::abs(e.clone()),
        domain,
        &NoiseMode::Box(noise.clone()),
        &[],
        cfg,
    )
}

/// Sound upper bound on the maximum of a nonnegative objective.
pub fn maximize_objective(
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    cfg: &RefinementConfig,
) -> Result<BoundResult, RangeError> {
    match cfg.backend {
        Backend::InternalBranchAndBound => branch_and_bound(obj, domain, noise, hints, cfg),
        Backend::ExternalSmtProcess => {
            let outcome = SmtDecider::from_config(cfg)
                .map_err(|e| e.to_string())
                .and_then(|mut d| {
                    maximize_by_search(&mut d, obj, domain, noise, hints, cfg).map_err(|e| e.0)
                });
            match outcome {
                Ok(Some(r)) => Ok(r),
                Ok(None) => fallback(obj, domain, noise, hints, cfg, "no initial enclosure"),
                Err(msg) => fallback(obj, domain, noise, hints, cfg, &msg),
            }
        }
    }
}

fn fallback(
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    cfg: &RefinementConfig,
    why: &str,
) -> Result<BoundResult, RangeError> {
    log::warn!("external solver unavailable ({why}); using internal branch and bound");
    let mut r = branch_and_bound(obj, domain, noise, hints, cfg)?;
    r.degraded = true;
    Ok(r)
}

fn gap_met(upper: &Rational, lower: &Option<Rational>, gap: &Rational) -> bool {
    let l = lower
        .clone()
        .unwrap_or_else(Rational::zero)
        .max(Rational::zero());
    upper - &l <= gap * upper
}

pub(crate) fn branch_and_bound(
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    cfg: &RefinementConfig,
) -> Result<BoundResult, RangeError> {
    let start = Instant::now();
    let probe = Probe::new(obj, noise, hints);
    let mut queries = 1usize;
    let mut lower = probe.lower(domain, true);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        upper: probe.upper(domain),
        seq,
        domain: domain.clone(),
    });
    // Bounds of boxes that cannot be split further.
    let mut settled: Option<Option<Rational>> = None;
    let mut bisections = 0usize;

    let global =
        |heap: &BinaryHeap<Node>, settled: &Option<Option<Rational>>, lower: &Option<Rational>| {
            let mut u: Option<Rational> = lower
                .clone()
                .map(|l| l.max(Rational::zero()))
                .or(Some(Rational::zero()));
            for cand in [heap.peek().map(|n| n.upper.clone()), settled.clone()]
                .into_iter()
                .flatten()
            {
                u = match (u, cand) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
            u
        };

    loop {
        if let Some(u) = global(&heap, &settled, &lower) {
            if gap_met(&u, &lower, &cfg.relative_gap_target) {
                break;
            }
        }
        if bisections >= cfg.max_bisections || timed_out(start, cfg.search_timeout) {
            break;
        }
        let Some(node) = heap.pop() else { break };
        if upper_le(&node.upper, &lower) {
            continue;
        }
        let Some((a, b)) = node.domain.bisect_widest() else {
            let merged = match (settled.take(), &node.upper) {
                (None, u) => u.clone(),
                (Some(Some(s)), Some(u)) => Some(s.max(u.clone())),
                _ => None,
            };
            settled = Some(merged);
            continue;
        };
        bisections += 1;
        for child in [a, b] {
            let up = min_upper(probe.upper(&child), &node.upper);
            queries += 1;
            lower = max_opt(lower, probe.lower(&child, false));
            if upper_le(&up, &lower) {
                continue;
            }
            seq += 1;
            heap.push(Node {
                upper: up,
                seq,
                domain: child,
            });
        }
    }

    let value = global(&heap, &settled, &lower).ok_or(RangeError::Unbounded)?;
    let achieved_gap = match &lower {
        _ if value.is_zero() => Some(Rational::zero()),
        Some(l) if l.is_positive() => Some((&value - l).checked_div(&value).expect("value > 0")),
        _ => None,
    };
    Ok(BoundResult {
        value,
        achieved_gap,
        backend_used: Backend::InternalBranchAndBound,
        query_count: queries,
        wall_time: start.elapsed(),
        degraded: false,
    })
}

fn timed_out(start: Instant, limit: Option<Duration>) -> bool {
    limit.is_some_and(|l| start.elapsed() >= l)
}

/// Decides `exists x. obj(x) > threshold` by branch and bound.
pub(crate) fn decide_exceeds(
    d: &InternalDecider,
    obj: &Objective,
    domain: &InputBox,
    noise: &NoiseMode,
    hints: &[Hint],
    threshold: &Rational,
) -> Verdict {
    let start = Instant::now();
    let probe = Probe::new(obj, noise, hints);
    let above = |v: &Option<Rational>| v.as_ref().is_some_and(|v| v > threshold);
    let root = probe.upper(domain);
    if upper_le(&root, &Some(threshold.clone())) {
        return Verdict::Unsat;
    }
    if above(&probe.lower(domain, true)) {
        return Verdict::Sat;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        upper: root,
        seq: 0,
        domain: domain.clone(),
    });
    let mut seq = 0u64;
    let mut bisections = 0usize;
    let mut undecided = false;
    while let Some(node) = heap.pop() {
        if upper_le(&node.upper, &Some(threshold.clone())) {
            break;
        }
        if bisections >= d.max_bisections || start.elapsed() >= d.timeout {
            return Verdict::Unknown;
        }
        let Some((a, b)) = node.domain.bisect_widest() else {
            undecided = true;
            continue;
        };
        bisections += 1;
        for child in [a, b] {
            if above(&probe.lower(&child, false)) {
                return Verdict::Sat;
            }
            let up = min_upper(probe.upper(&child), &node.upper);
            if !upper_le(&up, &Some(threshold.clone())) {
                seq += 1;
                heap.push(Node {
                    upper: up,
                    seq,
                    domain: child,
                });
            }
        }
    }
    if undecided {
        Verdict::Unknown
    } else {
        Verdict::Unsat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Interval;
    use crate::expr::parse_expr;

    fn cfg() -> RefinementConfig {
        RefinementConfig::default()
    }

    fn unit_box(names: &[&str]) -> InputBox {
        InputBox::new(
            names
                .iter()
                .map(|n| (n.to_string(), Interval::from_ints(0, 1)))
                .collect(),
        )
        .unwrap()
    }

    fn none() -> NoiseBounds {
        NoiseBounds::uniform(Rational::zero(), Rational::zero())
    }

    #[test]
    fn quadratic_maximum() {
        let e = parse_expr("x * x - x", &["x"]).unwrap();
        let r = maximize_abs(&e, &unit_box(&["x"]), &none(), &cfg()).unwrap();
        let quarter = Rational::ratio(1, 4).unwrap();
        assert!(r.value >= quarter);
        assert!(r.value <= &quarter * &Rational::ratio(101, 100).unwrap());
        assert!(r.achieved_gap.is_some());
    }

    #[test]
    fn exact_interval_needs_no_bisection() {
        let e = parse_expr("x", &["x"]).unwrap();
        let d = InputBox::single("x", Interval::from_ints(-2, 1));
        let r = maximize_abs(&e, &d, &none(), &cfg()).unwrap();
        assert_eq!(r.value, Rational::from_int(2));
        assert_eq!(r.query_count, 1);
    }

    #[test]
    fn bilinear() {
        let e = parse_expr("x * y - 1", &["x", "y"]).unwrap();
        let r = maximize_abs(&e, &unit_box(&["x", "y"]), &none(), &cfg()).unwrap();
        assert!(r.value >= Rational::one());
        assert!(r.value <= Rational::ratio(101, 100).unwrap());
    }

    #[test]
    fn doubling_the_budget_never_hurts() {
        let e = parse_expr("x * (1 - x) * (x - 1 / 3) + y * x", &["x", "y"]).unwrap();
        let d = unit_box(&["x", "y"]);
        let tight = RefinementConfig {
            relative_gap_target: Rational::ratio(1, 1_000_000).unwrap(),
            ..cfg()
        };
        let mut prev: Option<Rational> = None;
        for budget in [1, 2, 4, 8, 16, 32, 64] {
            let r = maximize_abs(&e, &d, &none(), &tight.with_budget(budget)).unwrap();
            if let Some(p) = &prev {
                assert!(r.value <= *p);
            }
            prev = Some(r.value);
        }
    }

    #[test]
    fn decider_answers() {
        let e = parse_expr("x - x * x", &["x"]).unwrap();
        let obj = Objective::Signed(e);
        let d = InternalDecider {
            max_bisections: 2000,
            timeout: Duration::from_secs(5),
        };
        let dom = unit_box(&["x"]);
        let q = |s: &str| s.parse::<Rational>().unwrap();
        assert_eq!(
            decide_exceeds(&d, &obj, &dom, &NoiseMode::Zero, &[], &q("1/5")),
            Verdict::Sat
        );
        assert_eq!(
            decide_exceeds(&d, &obj, &dom, &NoiseMode::Zero, &[], &q("3/10")),
            Verdict::Unsat
        );
        let tiny = InternalDecider {
            max_bisections: 1,
            timeout: Duration::from_secs(5),
        };
        assert_eq!(
            decide_exceeds(&tiny, &obj, &dom, &NoiseMode::Zero, &[], &q("251/1000")),
            Verdict::Unknown
        );
    }
}
