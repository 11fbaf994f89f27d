//! Round-to-nearest-even of exact rationals into a binary floating-point format.

use num_bigint::BigInt;
use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::rational::Rational;

/// Shape of a binary floating-point format: `bits` significand bits
/// (including the hidden one), normal exponents in `emin..=emax`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryFormat {
    pub bits: u32,
    pub emin: i32,
    pub emax: i32,
}

impl BinaryFormat {
    pub const DOUBLE: BinaryFormat = BinaryFormat {
        bits: 53,
        emin: -1022,
        emax: 1023,
    };
    pub const SINGLE: BinaryFormat = BinaryFormat {
        bits: 24,
        emin: -126,
        emax: 127,
    };
    pub const HALF: BinaryFormat = BinaryFormat {
        bits: 11,
        emin: -14,
        emax: 15,
    };

    /// Largest finite value: (2 - 2^(1-bits)) * 2^emax.
    pub fn max_finite(&self) -> Rational {
        (Rational::from_int(2) - Rational::pow2(1 - self.bits as i64)).mul_pow2(self.emax as i64)
    }
}

/// Result of rounding a rational into a format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rounded {
    Finite(Rational),
    Overflow { negative: bool },
}

impl Rounded {
    pub fn finite(self) -> Option<Rational> {
        match self {
            Rounded::Finite(r) => Some(r),
            Rounded::Overflow { .. } => None,
        }
    }
}

/// Rounds `x` to the nearest value of `format`, ties to even, with gradual
/// underflow. Values whose rounded magnitude exceeds the largest finite
/// number overflow.
pub fn round_nearest(x: &Rational, format: BinaryFormat) -> Rounded {
    if x.is_zero() {
        return Rounded::Finite(Rational::zero());
    }
    let e = x.floor_log2().unwrap();
    let quantum_exp = e.max(format.emin as i64) - (format.bits as i64 - 1);
    // |x| / 2^quantum_exp = num / den, split into quotient and remainder.
    let (p, q) = (x.numer().magnitude(), x.denom().magnitude());
    let (num, den) = if quantum_exp >= 0 {
        (p.clone(), q << quantum_exp as u64)
    } else {
        (p << quantum_exp.unsigned_abs(), q.clone())
    };
    let (fl, rem) = num.div_rem(&den);
    let m = match (rem << 1u32).cmp(&den) {
        Ordering::Less => fl,
        Ordering::Greater => fl + 1u32,
        Ordering::Equal if fl.is_even() => fl,
        Ordering::Equal => fl + 1u32,
    };
    if m.bits() as i64 - 1 + quantum_exp > format.emax as i64 {
        return Rounded::Overflow {
            negative: x.is_negative(),
        };
    }
    let magnitude = Rational::from_bigint(BigInt::from(m)).mul_pow2(quantum_exp);
    Rounded::Finite(if x.is_negative() {
        -magnitude
    } else {
        magnitude
    })
}

/// True when `x` is exactly a value of `format`.
pub fn is_representable(x: &Rational, format: BinaryFormat) -> bool {
    matches!(round_nearest(x, format), Rounded::Finite(ref r) if r == x)
}

/// Nearest double (ties to even), saturating to infinity on overflow.
pub fn round_to_f64(x: &Rational) -> f64 {
    match round_nearest(x, BinaryFormat::DOUBLE) {
        Rounded::Overflow { negative } => {
            if negative {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        }
        Rounded::Finite(r) => dyadic_to_f64(&r),
    }
}

/// Converts a rational that is exactly a double into that double.
pub(crate) fn dyadic_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let den_bits = r.denom().bits() as i64 - 1;
    debug_assert!(r.denom() == &(BigInt::one() << den_bits as u64));
    let n = r.numer();
    // Strip trailing zero bits so the integer part fits in 53 bits.
    let tz = n.magnitude().trailing_zeros().unwrap_or(0) as i64;
    let m = (n.abs() >> tz as u64)
        .to_u64()
        .expect("significand wider than 64 bits");
    let mut exp = tz - den_bits;
    let mut v = m as f64;
    // Scale in steps that keep every intermediate exact.
    while exp > 0 {
        let s = exp.min(1000);
        v *= 2f64.powi(s as i32);
        exp -= s;
    }
    while exp < 0 {
        let s = (-exp).min(1000);
        v *= 2f64.powi(-(s as i32));
        exp += s;
    }
    if n.is_negative() {
        -v
    } else {
        v
    }
}
