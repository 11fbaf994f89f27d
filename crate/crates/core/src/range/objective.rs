use std::collections::{BTreeSet, HashMap};

use super::ia::{eval_hinted, Hint, NoiseMode, SearchEnv};
use crate::exact::{InputBox, Interval, Rational, SQRT_PRECISION_BITS};
use crate::expr::eval::POINT_SQRT_BITS;
use crate::expr::{EvalError, Expr, NoiseSym};

/// A function to be maximized over a box.
#[derive(Clone, Debug)]
pub enum Objective {
    /// The signed value of a tree.
    Signed(Expr),
    /// `sum_i w_i * |t_i|` with nonnegative weights.
    SumAbs(Vec<(Expr, Rational)>),
}

impl Objective {
    pub fn abs(e: Expr) -> Self {
        Objective::SumAbs(vec![(e, Rational::one())])
    }

    pub fn noise_symbols(&self) -> BTreeSet<NoiseSym> {
        let mut out = BTreeSet::new();
        self.for_each_tree(|t| out.extend(t.noise_symbols()));
        out
    }

    pub(crate) fn for_each_tree(&self, mut f: impl FnMut(&Expr)) {
        match self {
            Objective::Signed(e) => f(e),
            Objective::SumAbs(ts) => ts.iter().for_each(|(t, _)| f(t)),
        }
    }

    /// Interval enclosure of the objective over `domain` with noise per `noise`.
    pub(crate) fn enclose(
        &self,
        domain: &InputBox,
        noise: &NoiseMode,
        hints: &[Hint],
        bits: u32,
    ) -> Result<Interval, EvalError> {
        let env = SearchEnv {
            vars: domain,
            noise,
        };
        match self {
            Objective::Signed(e) => eval_hinted(e, &env, hints, bits),
            Objective::SumAbs(terms) => {
                let mut acc = Interval::zero();
                for (t, w) in terms {
                    if w.is_zero() {
                        continue;
                    }
                    let a = eval_hinted(t, &env, hints, bits)?.abs();
                    acc = acc.add(&a.scale(&w.abs()));
                }
                Ok(acc)
            }
        }
    }
}

/// Evaluation helper shared by the maximizer and the internal decider.
pub(crate) struct Probe<'a> {
    pub obj: &'a Objective,
    pub noise: &'a NoiseMode,
    pub hints: &'a [Hint],
    /// Noise assignments tried when looking for certified lower bounds.
    pub point_noises: Vec<NoiseMode>,
}

impl<'a> Probe<'a> {
    pub fn new(obj: &'a Objective, noise: &'a NoiseMode, hints: &'a [Hint]) -> Self {
        let point_noises = match noise {
            NoiseMode::Zero => vec![NoiseMode::Zero],
            NoiseMode::Point(p) => vec![NoiseMode::Point(p.clone())],
            NoiseMode::Box(b) => {
                let syms = obj.noise_symbols();
                if syms.is_empty() {
                    vec![NoiseMode::Zero]
                } else {
                    let top: HashMap<NoiseSym, Rational> =
                        syms.iter().map(|s| (*s, b.bound(*s))).collect();
                    vec![NoiseMode::Zero, NoiseMode::Point(top)]
                }
            }
        };
        Probe {
            obj,
            noise,
            hints,
            point_noises,
        }
    }

    /// Sound upper bound of the objective on a box; `None` when the enclosure fails.
    pub fn upper(&self, domain: &InputBox) -> Option<Rational> {
        self.obj
            .enclose(domain, self.noise, self.hints, SQRT_PRECISION_BITS)
            .ok()
            .map(|iv| iv.hi().clone())
    }

    /// A value the objective certainly reaches (or exceeds) at some point of the box.
    pub fn lower_at(&self, domain: &InputBox, point: &[Rational]) -> Option<Rational> {
        let pbox = point_box(domain, point);
        self.point_noises
            .iter()
            .filter_map(|n| self.obj.enclose(&pbox, n, self.hints, POINT_SQRT_BITS).ok())
            .map(|iv| iv.lo().clone())
            .max()
    }

    /// Lower bound from the midpoint and, if asked, the two extreme corners.
    pub fn lower(&self, domain: &InputBox, corners: bool) -> Option<Rational> {
        let mut best = self.lower_at(domain, &domain.midpoint());
        if corners {
            let lo: Vec<Rational> = domain.intervals().map(|iv| iv.lo().clone()).collect();
            let hi: Vec<Rational> = domain.intervals().map(|iv| iv.hi().clone()).collect();
            for p in [lo, hi] {
                best = max_opt(best, self.lower_at(domain, &p));
            }
        }
        best
    }
}

pub(crate) fn point_box(domain: &InputBox, point: &[Rational]) -> InputBox {
    let mut out = domain.clone();
    for (k, x) in point.iter().enumerate() {
        out = out.with(k, Interval::point(x.clone()));
    }
    out
}

pub(crate) fn max_opt(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}
