//! Affine arithmetic: `center + sum(coef_i * n_i)` with every `n_i` in `[-1, 1]`.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;

use super::{ArithError, Interval, Rational};

/// Coefficients with denominators wider than this many bits get coarsened.
pub const COMPACT_DENOM_BITS: u64 = 512;

/// Identifier of an affine noise symbol.
pub type NoiseIndex = u64;

/// Thread-safe monotone source of fresh noise symbols.
#[derive(Debug, Default)]
pub struct NoiseSource {
    next: AtomicU64,
}

impl NoiseSource {
    pub fn new() -> Self {
        NoiseSource::default()
    }

    pub fn fresh(&self) -> NoiseIndex {
        self.next.fetch_add(1, Ordering::Relaxed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    center: Rational,
    /// Sorted by noise index, no duplicates, no zero coefficients.
    terms: Vec<(NoiseIndex, Rational)>,
}

impl AffineForm {
    pub fn constant(c: Rational) -> Self {
        AffineForm {
            center: c,
            terms: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        AffineForm::constant(Rational::zero())
    }

    /// Builds a form from raw terms; duplicate indices are merged.
    pub fn new(center: Rational, terms: impl IntoIterator<Item = (NoiseIndex, Rational)>) -> Self {
        let mut terms: Vec<_> = terms.into_iter().collect();
        terms.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(NoiseIndex, Rational)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += &c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        AffineForm {
            center,
            terms: merged,
        }
    }

    /// `mid + rad * n` for a fresh symbol `n`.
    pub fn from_interval(iv: &Interval, source: &NoiseSource) -> Self {
        let rad = iv.width().half();
        if rad.is_zero() {
            return AffineForm::constant(iv.lo().clone());
        }
        AffineForm {
            center: iv.midpoint(),
            terms: vec![(source.fresh(), rad)],
        }
    }

    /// A single fresh symbol with coefficient `magnitude` (zero magnitude gives the zero form).
    pub fn fresh_noise(magnitude: Rational, source: &NoiseSource) -> Self {
        let mut f = AffineForm::zero();
        f.push_fresh(magnitude, source);
        f
    }

    pub fn center(&self) -> &Rational {
        &self.center
    }

    pub fn terms(&self) -> &[(NoiseIndex, Rational)] {
        &self.terms
    }

    /// Sum of absolute coefficients.
    pub fn radius(&self) -> Rational {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }

    pub fn to_interval(&self) -> Interval {
        let r = self.radius();
        Interval::new(&self.center - &r, &self.center + &r).expect("radius is nonnegative")
    }

    /// Largest magnitude of the concretization.
    pub fn magnitude(&self) -> Rational {
        self.center.abs() + self.radius()
    }

    /// Value of the form for the given noise assignment (missing symbols read as 0).
    pub fn evaluate(&self, noise: impl Fn(NoiseIndex) -> Rational) -> Rational {
        self.terms
            .iter()
            .fold(self.center.clone(), |acc, (i, c)| acc + c * &noise(*i))
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.combine(other, |a, b| a - b)
    }

    pub fn neg(&self) -> AffineForm {
        self.scale(&Rational::from_int(-1))
    }

    pub fn add_constant(&self, c: &Rational) -> AffineForm {
        AffineForm {
            center: &self.center + c,
            terms: self.terms.clone(),
        }
    }

    pub fn scale(&self, k: &Rational) -> AffineForm {
        if k.is_zero() {
            return AffineForm::zero();
        }
        AffineForm {
            center: &self.center * k,
            terms: self.terms.iter().map(|(i, c)| (*i, c * k)).collect(),
        }
    }

    /// Adds a fresh symbol with coefficient `|magnitude|`.
    pub fn push_fresh(&mut self, magnitude: Rational, source: &NoiseSource) {
        if !magnitude.is_zero() {
            self.terms.push((source.fresh(), magnitude.abs()));
        }
    }

    /// Product. Linear part exact; the quadratic part is bounded by
    /// `radius(self) * radius(other)` on one fresh symbol.
    pub fn mul(&self, other: &AffineForm, source: &NoiseSource) -> AffineForm {
        let linear = self.scale(&other.center).add(&other.scale(&self.center));
        let mut out = AffineForm {
            center: &self.center * &other.center,
            terms: linear.terms,
        };
        out.push_fresh(self.radius() * other.radius(), source);
        out.compact(source)
    }

    /// Product with an interval `[m - r, m + r]`: `self * m` plus a fresh
    /// symbol of coefficient `r * magnitude(self)`.
    pub fn mul_interval(&self, iv: &Interval, source: &NoiseSource) -> AffineForm {
        let m = iv.midpoint();
        let r = iv.width().half();
        let mut out = self.scale(&m);
        out.push_fresh(r * self.magnitude(), source);
        out.compact(source)
    }

    /// Min-range linearization of `1/y` over the concretization of `self`.
    pub fn inverse(&self, source: &NoiseSource) -> Result<AffineForm, ArithError> {
        let iv = self.to_interval();
        if iv.contains_zero() {
            return Err(ArithError::DivisionByZeroRange);
        }
        if iv.hi().is_negative() {
            return Ok(self.neg().inverse(source)?.neg());
        }
        if iv.is_point() {
            return Ok(AffineForm::constant(iv.lo().recip()?));
        }
        let (a, b) = (iv.lo().clone(), iv.hi().clone());
        // 1/y = alpha y + h(y) with h decreasing on [a, b], so h in [h(b), h(a)].
        let alpha = -(&b * &b).recip()?;
        let h_a = a.recip()? - &alpha * &a;
        let h_b = b.recip()? - &alpha * &b;
        let zeta = (&h_a + &h_b).half();
        let delta = (&h_a - &h_b).abs().half();
        let mut out = self.scale(&alpha).add_constant(&zeta);
        out.push_fresh(delta, source);
        Ok(out.compact(source))
    }

    /// Outward-rounds coefficients whose denominators exceed
    /// [`COMPACT_DENOM_BITS`]; the rounding slack goes to one fresh symbol.
    pub fn compact(self, source: &NoiseSource) -> AffineForm {
        let needs = |r: &Rational| r.denom_bits() > COMPACT_DENOM_BITS;
        if !needs(&self.center) && !self.terms.iter().any(|(_, c)| needs(c)) {
            return self;
        }
        let mut slack = Rational::zero();
        let mut round = |r: Rational| -> Rational {
            if !needs(&r) {
                return r;
            }
            let scale = COMPACT_DENOM_BITS as i64 / 2;
            let rounded = Rational::new(r.mul_pow2(scale).floor(), BigInt::from(1) << scale as u64)
                .expect("power of two is nonzero");
            slack += &(&r - &rounded).abs();
            rounded
        };
        let center = round(self.center);
        let terms: Vec<_> = self.terms.into_iter().map(|(i, c)| (i, round(c))).collect();
        let mut out = AffineForm::new(center, terms);
        out.push_fresh(slack, source);
        out
    }

    fn combine(
        &self,
        other: &AffineForm,
        op: impl Fn(&Rational, &Rational) -> Rational,
    ) -> AffineForm {
        let zero = Rational::zero();
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let left = self.terms.get(i);
            let right = other.terms.get(j);
            let (idx, c) = match (left, right) {
                (Some((a, ca)), Some((b, cb))) if a == b => {
                    i += 1;
                    j += 1;
                    (*a, op(ca, cb))
                }
                (Some((a, ca)), Some((b, _))) if a < b => {
                    i += 1;
                    (*a, op(ca, &zero))
                }
                (Some((a, ca)), None) => {
                    i += 1;
                    (*a, op(ca, &zero))
                }
                (_, Some((b, cb))) => {
                    j += 1;
                    (*b, op(&zero, cb))
                }
                (None, None) => unreachable!(),
            };
            if !c.is_zero() {
                terms.push((idx, c));
            }
        }
        AffineForm {
            center: op(&self.center, &other.center),
            terms,
        }
    }
}
