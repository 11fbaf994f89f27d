use std::fmt;

use num_bigint::{BigInt, Sign};
use serde::{Deserialize, Serialize};

use super::{ArithError, Rational};

/// Default working precision of square-root enclosures, in bits.
pub const SQRT_PRECISION_BITS: u32 = 80;

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, ArithError> {
        if lo > hi {
            return Err(ArithError::EmptyInterval {
                lo: Box::new(lo),
                hi: Box::new(hi),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    /// `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: Rational) -> Self {
        let r = r.abs();
        Interval { lo: -&r, hi: r }
    }

    pub fn from_ints(lo: i64, hi: i64) -> Self {
        Interval::new(lo.into(), hi.into()).expect("lo <= hi")
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn into_bounds(self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }

    /// Smallest enclosing interval whose endpoints have at most `bits` significant bits.
    pub fn round_outward(&self, bits: u32) -> Interval {
        Interval {
            lo: self.lo.round_dyadic(bits, false),
            hi: self.hi.round_dyadic(bits, true),
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi).half()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    /// `max(|lo|, |hi|)`: the largest magnitude in the interval.
    pub fn magnitude(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest magnitude in the interval; zero when the interval straddles zero.
    pub fn min_magnitude(&self) -> Rational {
        if self.contains_zero() {
            Rational::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        if self.is_point() && other.is_point() {
            return Interval::point(&self.lo * &other.lo);
        }
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let (lo, hi) = min_max(products);
        Interval { lo, hi }
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn recip(&self) -> Result<Interval, ArithError> {
        if self.contains_zero() {
            return Err(ArithError::DivisionByZeroRange);
        }
        Ok(Interval {
            lo: self.hi.recip()?,
            hi: self.lo.recip()?,
        })
    }

    pub fn div(&self, other: &Interval) -> Result<Interval, ArithError> {
        if other.contains_zero() {
            return Err(ArithError::DivisionByZeroRange);
        }
        if other.is_point() {
            let k = other.lo.recip()?;
            return Ok(self.scale(&k));
        }
        Ok(self.mul(&other.recip()?))
    }

    /// Absolute value `{|x| : x in self}`.
    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval {
                lo: Rational::zero(),
                hi: self.magnitude(),
            }
        } else if self.hi.is_negative() || self.hi.is_zero() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Square root, rounded outward at the given precision.
    pub fn sqrt_with(&self, bits: u32) -> Result<Interval, ArithError> {
        if self.lo.is_negative() {
            return Err(ArithError::NegativeSqrt);
        }
        let lo = rat_sqrt_outward(&self.lo, bits)?.lo;
        let hi = rat_sqrt_outward(&self.hi, bits)?.hi;
        Ok(Interval { lo, hi })
    }

    pub fn sqrt(&self) -> Result<Interval, ArithError> {
        self.sqrt_with(SQRT_PRECISION_BITS)
    }

    /// Convex hull.
    pub fn union(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Splits into `m` closed pieces of equal width.
    pub fn split_equal(&self, m: usize) -> Vec<Interval> {
        let m = m.max(1);
        let step = self.width() * Rational::ratio(1, m as i64).unwrap();
        (0..m)
            .map(|k| {
                let lo = if k == 0 {
                    self.lo.clone()
                } else {
                    &self.lo + &(&step * &Rational::from_int(k as i64))
                };
                let hi = if k + 1 == m {
                    self.hi.clone()
                } else {
                    &self.lo + &(&step * &Rational::from_int(k as i64 + 1))
                };
                Interval { lo, hi }
            })
            .collect()
    }

    pub fn bisect(&self) -> (Interval, Interval) {
        let mid = self.midpoint();
        (
            Interval {
                lo: self.lo.clone(),
                hi: mid.clone(),
            },
            Interval {
                lo: mid,
                hi: self.hi.clone(),
            },
        )
    }
}

fn min_max(values: [Rational; 4]) -> (Rational, Rational) {
    let mut it = values.into_iter();
    let first = it.next().unwrap();
    let (mut lo, mut hi) = (first.clone(), first);
    for v in it {
        if v < lo {
            lo = v;
        } else if v > hi {
            hi = v;
        }
    }
    (lo, hi)
}

/// Rational enclosure `[l, h]` of `sqrt(a)` with `h - l <= 2^-bits`.
///
/// Exact for perfect squares. Otherwise `l = floor(sqrt(a) 2^bits) / 2^bits`
/// computed with an integer square root, and `h = l + 2^-bits`.
pub fn rat_sqrt_outward(a: &Rational, bits: u32) -> Result<Interval, ArithError> {
    if a.is_negative() {
        return Err(ArithError::NegativeSqrt);
    }
    if a.is_zero() {
        return Ok(Interval::zero());
    }
    if let Some(r) = a.exact_sqrt() {
        return Ok(Interval::point(r));
    }
    // floor(sqrt(p 4^k / q)) == floor(sqrt(floor(p 4^k / q))).
    let p = a.numer().magnitude();
    let q = a.denom().magnitude();
    let scaled = (p << (2 * bits as u64)) / q;
    let s = scaled.sqrt();
    let den = BigInt::from(1u8) << bits as u64;
    let s = BigInt::from_biguint(Sign::Plus, s);
    let lo = Rational::new(s.clone(), den.clone())?;
    let hi = Rational::new(s + 1, den)?;
    debug_assert!(!hi.is_zero());
    Ok(Interval { lo, hi })
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
