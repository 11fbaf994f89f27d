//! Dynamic under-approximation of roundoff errors by random sampling.
//!
//! Nothing here is sound: the maxima are errors actually observed, so every
//! sound bound must be at least as large.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::float::round_nearest;
use crate::exact::{InputBox, Interval, Rational};
use crate::expr::{
    eval_float, eval_fraction, eval_rational, FunctionSpec, PointEnv, PrecisionSpec,
};

pub const DEFAULT_SAMPLES: usize = 100_000;

/// Corners are added to the random points up to this many variables.
const MAX_CORNER_VARS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub max_abs: Rational,
    /// `None` when no point had `|f|` above the relative floor.
    pub max_rel: Option<Rational>,
    /// Points evaluated, corners included.
    pub samples: usize,
    pub seed: u64,
    /// Points with an invalid float result or a value too close to zero.
    pub skipped: usize,
}

/// Points where `|f|` is at most this are left out of the relative maximum.
pub fn rel_floor() -> Rational {
    Rational::pow2(-512)
}

/// Nonnegative fraction kept unreduced; ordering cross-multiplies.
#[derive(Clone, Debug)]
struct Ratio {
    num: BigInt,
    den: BigInt,
}

impl Ratio {
    fn zero() -> Self {
        Ratio {
            num: BigInt::zero(),
            den: BigInt::one(),
        }
    }

    fn from_rational(r: &Rational) -> Self {
        Ratio {
            num: r.numer().clone(),
            den: r.denom().clone(),
        }
    }

    fn to_rational(&self) -> Rational {
        Rational::new(self.num.clone(), self.den.clone()).expect("positive denominator")
    }

    fn max(self, other: Ratio) -> Ratio {
        if &other.num * &self.den > &self.num * &other.den {
            other
        } else {
            self
        }
    }
}

struct Observation {
    abs: Ratio,
    rel: Option<Ratio>,
    skipped: bool,
}

fn uniform(rng: &mut ChaCha8Rng, iv: &Interval) -> Rational {
    let k: u64 = rng.gen();
    iv.lo() + &(iv.width() * Rational::from_bigint(k.into()).mul_pow2(-64))
}

fn corners(domain: &InputBox) -> Vec<Vec<Rational>> {
    let ivs: Vec<&Interval> = domain.intervals().collect();
    (0..1usize << ivs.len())
        .map(|mask| {
            ivs.iter()
                .enumerate()
                .map(|(i, iv)| if mask >> i & 1 == 1 { iv.hi() } else { iv.lo() }.clone())
                .collect()
        })
        .collect()
}

fn observe(spec: &FunctionSpec, prec: &PrecisionSpec, point: &[Rational]) -> Observation {
    let skip = Observation {
        abs: Ratio::zero(),
        rel: None,
        skipped: true,
    };
    let format = prec.format();
    let mut rounded = Vec::with_capacity(point.len());
    for x in point {
        match round_nearest(x, format).finite() {
            Some(r) => rounded.push(r.to_f64_lossy()),
            None => return skip,
        }
    }
    let names = spec.params();
    let lookup = |name: &str| names.iter().position(|n| n == name).map(|k| rounded[k]);
    let Some(approx) = eval_float(spec.body(), &lookup, prec)
        .ok()
        .and_then(Rational::from_f64)
    else {
        return skip;
    };
    let env = PointEnv::from_box_order(spec.domain(), point);
    match eval_fraction(spec.body(), &env) {
        Some(Ok((p, q))) => observe_exact(p, q, &approx),
        Some(Err(_)) => skip,
        None => match eval_rational(spec.body(), &env) {
            Ok(real) => observe_enclosed(&real.value, &real.radius, &approx),
            Err(_) => skip,
        },
    }
}

/// Errors against an exact value `p/q`, `q > 0`, without any gcd.
fn observe_exact(p: BigInt, q: BigInt, approx: &Rational) -> Observation {
    let (a, b) = (approx.numer(), approx.denom());
    let diff = (&p * b - a * &q).abs();
    let abs = Ratio {
        num: diff.clone(),
        den: &q * b,
    };
    // |p/q| <= 2^-512 exactly when |p| 2^512 <= q.
    let mag = p.abs();
    if (&mag << 512u32) <= q {
        return Observation {
            abs,
            rel: None,
            skipped: true,
        };
    }
    let rel = Ratio {
        num: diff,
        den: mag * b,
    };
    Observation {
        abs,
        rel: Some(rel),
        skipped: false,
    }
}

/// Errors against a value known only to lie within `radius` of `mid`: the
/// smallest error consistent with the enclosure.
fn observe_enclosed(mid: &Rational, radius: &Rational, approx: &Rational) -> Observation {
    let abs = ((mid - approx).abs() - radius.clone()).max(Rational::zero());
    let low = mid.abs() - radius.clone();
    if low <= rel_floor() {
        return Observation {
            abs: Ratio::from_rational(&abs),
            rel: None,
            skipped: true,
        };
    }
    let rel = abs
        .checked_div(&(mid.abs() + radius.clone()))
        .expect("positive");
    Observation {
        abs: Ratio::from_rational(&abs),
        rel: Some(Ratio::from_rational(&rel)),
        skipped: false,
    }
}

/// Largest errors seen at `n` uniform random points of the domain (plus its
/// corners when there are few variables).
pub fn underapprox(spec: &FunctionSpec, prec: &PrecisionSpec, n: usize, seed: u64) -> SampleReport {
    let domain = spec.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<Rational>> = (0..n)
        .map(|_| domain.intervals().map(|iv| uniform(&mut rng, iv)).collect())
        .collect();
    if domain.len() <= MAX_CORNER_VARS {
        points.extend(corners(domain));
    }
    let obs: Vec<Observation> = points.par_iter().map(|p| observe(spec, prec, p)).collect();
    let max_abs = obs
        .iter()
        .map(|o| o.abs.clone())
        .fold(Ratio::zero(), Ratio::max)
        .to_rational();
    let max_rel = obs
        .iter()
        .filter_map(|o| o.rel.clone())
        .reduce(Ratio::max)
        .map(|r| r.to_rational());
    let skipped = obs.iter().filter(|o| o.skipped).count();
    SampleReport {
        max_abs,
        max_rel,
        samples: points.len(),
        seed,
        skipped,
    }
}

/// Sampling confined to the given sub-boxes, about `n` points in total.
pub fn underapprox_on(
    spec: &FunctionSpec,
    prec: &PrecisionSpec,
    boxes: &[InputBox],
    n: usize,
    seed: u64,
) -> Result<SampleReport, crate::expr::SpecError> {
    let per_box = n.div_ceil(boxes.len().max(1)).max(1);
    let mut total = SampleReport {
        max_abs: Rational::zero(),
        max_rel: None,
        samples: 0,
        seed,
        skipped: 0,
    };
    for (k, b) in boxes.iter().enumerate() {
        let r = underapprox(
            &spec.with_domain(b.clone())?,
            prec,
            per_box,
            seed.wrapping_add(k as u64),
        );
        total.max_abs = total.max_abs.max(r.max_abs);
        total.max_rel = match (total.max_rel, r.max_rel) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        total.samples += r.samples;
        total.skipped += r.skipped;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn spec(src: &str) -> FunctionSpec {
        parse(src).unwrap()
    }

    #[test]
    fn exact_constant_has_no_error() {
        let f = spec("def f(x: Real): Real = { require(0 <= x && x <= 1) 0.5 }");
        let r = underapprox(&f, &PrecisionSpec::float64(), 200, 1);
        assert!(r.max_abs.is_zero());
        assert_eq!(r.max_rel, Some(Rational::zero()));
        assert_eq!(r.samples, 202);
    }

    #[test]
    fn identity_error_is_input_rounding() {
        let f = spec("def f(x: Real): Real = { require(1 <= x && x <= 2) x }");
        let r = underapprox(&f, &PrecisionSpec::float64(), 2000, 7);
        let rel = r.max_rel.clone().unwrap();
        assert!(rel.is_positive());
        assert!(rel <= Rational::pow2(-53));
        assert_eq!(r, underapprox(&f, &PrecisionSpec::float64(), 2000, 7));
    }

    #[test]
    fn zero_values_are_skipped() {
        let f = spec("def f(x: Real): Real = { require(-1 <= x && x <= 1) x - x }");
        let r = underapprox(&f, &PrecisionSpec::float64(), 50, 3);
        assert_eq!(r.max_rel, None);
        assert_eq!(r.skipped, r.samples);
    }
}
