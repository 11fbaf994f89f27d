use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ArithError;

/// Exact rational number in canonical form (positive denominator, reduced).
///
/// All sound computations in the analyzer go through this type, so no
/// internal rounding error can creep into a reported bound.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    /// `num / den`, reduced. Fails on a zero denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self, ArithError> {
        Self::new(BigInt::from(num), BigInt::from(den))
    }

    /// 2^k for any integer k.
    pub fn pow2(k: i64) -> Self {
        let p = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            Rational::from_bigint(p)
        } else {
            Rational(BigRational::new_raw(BigInt::one(), p))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self, ArithError> {
        if other.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        Rational::one().checked_div(self)
    }

    pub fn min(self, other: Self) -> Self {
        Ord::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        Ord::max(self, other)
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn half(&self) -> Self {
        Rational(&self.0 / BigInt::from(2))
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let (p, q) = (self.0.numer(), self.0.denom());
        // Only powers of two move, so cancelling them keeps the fraction reduced.
        let (p, q) = if k > 0 {
            let s = (k as u64).min(q.trailing_zeros().unwrap_or(0));
            (p << (k as u64 - s), q >> s)
        } else {
            let k = k.unsigned_abs();
            let s = k.min(p.trailing_zeros().unwrap_or(0));
            (p >> s, q << (k - s))
        };
        Rational(BigRational::new_raw(p, q))
    }

    /// Bit length of the denominator; used to decide when to coarsen coefficients.
    pub fn denom_bits(&self) -> u64 {
        self.0.denom().bits()
    }

    /// floor(log2 |self|). `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let p = self.0.numer().magnitude();
        let q = self.0.denom().magnitude();
        let mut e = p.bits() as i64 - q.bits() as i64;
        // p/q in [2^(e-1), 2^(e+1)); fix up to the exact floor.
        if shifted_cmp(p, q, e) == Ordering::Less {
            e -= 1;
        }
        Some(e)
    }

    /// Exact value of a finite double. `None` for NaN and infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Rational::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let m = Rational::from_bigint(BigInt::from(mantissa)).mul_pow2(exp);
        Some(if negative { -m } else { m })
    }

    /// Nearest double, for display and diagnostics only.
    pub fn to_f64_lossy(&self) -> f64 {
        super::float::round_to_f64(self)
    }

    /// Parses a decimal literal (`6`, `6.0`, `0.125`, `1e-3`, `2.5E+2`) exactly.
    pub fn from_decimal_str(s: &str) -> Result<Self, ArithError> {
        let bad = || ArithError::Malformed(s.to_string());
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        let (negative, mantissa) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let n: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
        let mut r = if scale >= 0 {
            Rational::from_bigint(n * pow)
        } else {
            Rational::new(n, pow)?
        };
        if negative {
            r = -r;
        }
        Ok(r)
    }

    /// Exact square root when both numerator and denominator are perfect squares.
    pub fn exact_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let p = self.0.numer().magnitude();
        let q = self.0.denom().magnitude();
        let sp = p.sqrt();
        let sq = q.sqrt();
        if &sp * &sp == *p && &sq * &sq == *q {
            Some(Rational(BigRational::new(
                BigInt::from_biguint(Sign::Plus, sp),
                BigInt::from_biguint(Sign::Plus, sq),
            )))
        } else {
            None
        }
    }

    /// Decimal scientific notation with `digits` significant digits, rounded
    /// away from zero so the printed magnitude never understates the value.
    pub fn to_sci_outward(&self, digits: usize) -> String {
        self.to_sci(digits, true)
    }

    /// Same as [`Rational::to_sci_outward`] but rounded toward zero.
    pub fn to_sci_inward(&self, digits: usize) -> String {
        self.to_sci(digits, false)
    }

    fn to_sci(&self, digits: usize, outward: bool) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return format!("{:.*}e+00", digits - 1, 0.0);
        }
        let sign = if self.is_negative() { "-" } else { "" };
        let x = self.abs();
        // Find e with 10^e <= x < 10^(e+1).
        let mut e = (x.floor_log2().unwrap() as f64 * std::f64::consts::LOG10_2).floor() as i64;
        while pow10(e + 1) <= x {
            e += 1;
        }
        while pow10(e) > x {
            e -= 1;
        }
        let scaled = &x * &pow10(digits as i64 - 1 - e);
        let mut m = if outward {
            scaled.ceil()
        } else {
            scaled.floor()
        };
        let limit = num_traits::pow(BigInt::from(10), digits);
        if m >= limit {
            m /= 10;
            e += 1;
        }
        let s = m.to_string();
        let (head, tail) = s.split_at(1);
        let mantissa = if tail.is_empty() {
            head.to_string()
        } else {
            format!("{head}.{tail}")
        };
        let exp_sign = if e < 0 { '-' } else { '+' };
        format!("{sign}{mantissa}e{exp_sign}{:02}", e.abs())
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    /// Nearest dyadic rational with at most `bits` significant bits, rounded
    /// up when `up` is set and down otherwise. Short dyadics are returned as is.
    pub fn round_dyadic(&self, bits: u32, up: bool) -> Rational {
        let d = self.0.denom();
        let dyadic = d.magnitude().trailing_zeros() == Some(d.bits() - 1);
        if self.is_zero() || (dyadic && self.0.numer().bits() <= u64::from(bits)) {
            return self.clone();
        }
        let e = self.floor_log2().expect("nonzero");
        let k = i64::from(bits) - 1 - e;
        let scaled = self.mul_pow2(k);
        let n = if up { scaled.ceil() } else { scaled.floor() };
        Rational::from_bigint(n).mul_pow2(-k)
    }
}

fn pow10(e: i64) -> Rational {
    let p = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_bigint(p)
    } else {
        Rational(BigRational::new_raw(BigInt::one(), p))
    }
}

/// Compares p/q against 2^e.
fn shifted_cmp(p: &BigUint, q: &BigUint, e: i64) -> Ordering {
    if e >= 0 {
        p.cmp(&(q << e as u64))
    } else {
        (p << (-e) as u64).cmp(q)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p`, `p/q` and decimal literals.
impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let bad = || ArithError::Malformed(s.to_string());
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                Rational::new(p, q)
            }
            None => Rational::from_decimal_str(s),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}
