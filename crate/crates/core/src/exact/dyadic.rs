//! Dyadic numbers `m * 2^e` and outward-rounded intervals over them.
//!
//! Addition, subtraction and multiplication of dyadics are exact and never
//! need a gcd, which makes them far cheaper than general rationals. Interval
//! endpoints are rounded outward to a fixed number of significant bits after
//! each operation so mantissas stay short.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{rat_sqrt_outward, ArithError, Interval, Rational};

/// `m * 2^e`, normalized so that `m` is odd, or `m = 0` and `e = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            m: BigInt::zero(),
            e: 0,
        }
    }

    fn new(m: BigInt, e: i64) -> Self {
        if m.is_zero() {
            return Dyadic::zero();
        }
        let tz = m.trailing_zeros().unwrap_or(0);
        Dyadic {
            m: m >> tz,
            e: e + tz as i64,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    /// `self` if it is dyadic, otherwise the nearest dyadic with `bits`
    /// significant bits in the requested direction.
    pub fn from_rational(r: &Rational, bits: u32, up: bool) -> Self {
        if r.is_zero() {
            return Dyadic::zero();
        }
        let q = r.denom();
        let qbits = q.bits();
        if q.magnitude().trailing_zeros() == Some(qbits - 1) {
            return Dyadic::new(r.numer().clone(), -(qbits as i64 - 1)).round(bits, up);
        }
        // floor(p 2^k / q) carries at least `bits` significant bits.
        let p = r.numer();
        let k = bits as i64 + qbits as i64 - p.bits() as i64 + 1;
        let (n, rem) = if k >= 0 {
            (p << k as u64).div_mod_floor(q)
        } else {
            p.div_mod_floor(&(q << (-k) as u64))
        };
        let n = if up && !rem.is_zero() { n + 1 } else { n };
        Dyadic::new(n, -k).round(bits, up)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_bigint(self.m.clone()).mul_pow2(self.e)
    }

    /// Keeps at most `bits` significant bits, rounding up or down.
    pub fn round(self, bits: u32, up: bool) -> Self {
        let len = self.m.bits();
        if len <= u64::from(bits) {
            return self;
        }
        let s = len - u64::from(bits);
        // Arithmetic shift floors toward negative infinity.
        let mut m = &self.m >> s;
        if up {
            m += 1;
        }
        Dyadic::new(m, self.e + s as i64)
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            m: -&self.m,
            e: self.e,
        }
    }

    pub fn add(&self, o: &Dyadic) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, o: &Dyadic) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Dyadic) -> Self {
        if self.is_zero() || o.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            m: &self.m * &o.m,
            e: self.e + o.e,
        }
    }

    /// Quotient rounded to `bits` significant bits; exact when the quotient is dyadic.
    pub fn div(&self, o: &Dyadic, bits: u32, up: bool) -> Result<Self, ArithError> {
        if o.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Dyadic::zero());
        }
        let k = (bits as i64 + o.m.bits() as i64 - self.m.bits() as i64 + 2).max(0);
        let num = &self.m << k as u64;
        let (mut q, r) = num.div_mod_floor(&o.m);
        if !r.is_zero() && up {
            q += 1;
        }
        Ok(Dyadic::new(q, self.e - o.e - k).round(bits, up))
    }

    fn bit_len(&self) -> i64 {
        self.m.bits() as i64 + self.e
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let (sa, sb) = (self.m.sign(), o.m.sign());
        if sa != sb {
            let rank = |s: Sign| match s {
                Sign::Minus => 0,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            };
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        // Same sign: magnitudes with different bit lengths order directly.
        let (la, lb) = (self.bit_len(), o.bit_len());
        if la != lb {
            let mag = la.cmp(&lb);
            return if sa == Sign::Plus { mag } else { mag.reverse() };
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Closed interval with dyadic endpoints and `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
    bits: u32,
}

impl DyadicInterval {
    /// Outward enclosure of a rational interval.
    pub fn from_interval(iv: &Interval, bits: u32) -> Self {
        DyadicInterval {
            lo: Dyadic::from_rational(iv.lo(), bits, false),
            hi: Dyadic::from_rational(iv.hi(), bits, true),
            bits,
        }
    }

    pub fn to_interval(&self) -> Interval {
        Interval::new(self.lo.to_rational(), self.hi.to_rational()).expect("ordered endpoints")
    }

    fn make(lo: Dyadic, hi: Dyadic, bits: u32) -> Self {
        DyadicInterval {
            lo: lo.round(bits, false),
            hi: hi.round(bits, true),
            bits,
        }
    }

    pub fn is_zero_point(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive_strict() && !self.hi.is_negative()
    }

    pub fn neg(&self) -> Self {
        DyadicInterval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            bits: self.bits,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::make(self.lo.add(&o.lo), self.hi.add(&o.hi), self.bits)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::make(self.lo.sub(&o.hi), self.hi.sub(&o.lo), self.bits)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let (lo, hi) = min_max(c);
        Self::make(lo, hi, self.bits)
    }

    pub fn div(&self, o: &Self) -> Result<Self, ArithError> {
        if o.contains_zero() {
            return Err(ArithError::DivisionByZeroRange);
        }
        let b = self.bits;
        let recip_lo = Dyadic::div(&Dyadic::one(), &o.hi, b, false)?;
        let recip_hi = Dyadic::div(&Dyadic::one(), &o.lo, b, true)?;
        // Exact quotients when the divisor is a point avoid widening x / x style terms.
        if o.lo == o.hi {
            let q = |x: &Dyadic, up| Dyadic::div(x, &o.lo, b, up);
            let (a, c) = if o.lo.is_negative() {
                (q(&self.hi, false)?, q(&self.lo, true)?)
            } else {
                (q(&self.lo, false)?, q(&self.hi, true)?)
            };
            return Ok(DyadicInterval {
                lo: a,
                hi: c,
                bits: b,
            });
        }
        Ok(self.mul(&DyadicInterval {
            lo: recip_lo,
            hi: recip_hi,
            bits: b,
        }))
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive_strict() {
            self.neg()
        } else {
            let hi = if self.lo.neg() > self.hi {
                self.lo.neg()
            } else {
                self.hi.clone()
            };
            DyadicInterval {
                lo: Dyadic::zero(),
                hi,
                bits: self.bits,
            }
        }
    }

    /// Square root through the rational enclosure with absolute width `2^-sqrt_bits`.
    pub fn sqrt(&self, sqrt_bits: u32) -> Result<Self, ArithError> {
        if self.lo.is_negative() {
            return Err(ArithError::NegativeSqrt);
        }
        let lo = rat_sqrt_outward(&self.lo.to_rational(), sqrt_bits)?;
        let hi = rat_sqrt_outward(&self.hi.to_rational(), sqrt_bits)?;
        Ok(DyadicInterval {
            lo: Dyadic::from_rational(lo.lo(), self.bits, false),
            hi: Dyadic::from_rational(hi.hi(), self.bits, true),
            bits: self.bits,
        })
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = if self.lo >= o.lo {
            self.lo.clone()
        } else {
            o.lo.clone()
        };
        let hi = if self.hi <= o.hi {
            self.hi.clone()
        } else {
            o.hi.clone()
        };
        (lo <= hi).then_some(DyadicInterval {
            lo,
            hi,
            bits: self.bits,
        })
    }
}

impl Dyadic {
    fn one() -> Self {
        Dyadic {
            m: BigInt::one(),
            e: 0,
        }
    }

    fn is_positive_strict(&self) -> bool {
        self.m.is_positive()
    }
}

fn min_max(c: [Dyadic; 4]) -> (Dyadic, Dyadic) {
    let mut it = c.into_iter();
    let first = it.next().expect("four candidates");
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
