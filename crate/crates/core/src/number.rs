//! Scalars used across the crate: declared-rational or declared-irrational
//! reals, a small arithmetic trait shared by exact and float code paths, and
//! compensated summation.
//!
//! Rationality is always a declaration. A float never becomes "rational"
//! because it happens to look like one; parse `1/3` or `0.25` to get an exact
//! value, and use a named constant (`sqrt2`, `golden`, `e`, `pi`, ...) for an
//! irrational one.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// √2 to double precision.
pub const SQRT2: f64 = std::f64::consts::SQRT_2;
/// √3 to double precision.
pub const SQRT3: f64 = 1.732_050_807_568_877_2;
/// √5 to double precision.
pub const SQRT5: f64 = 2.236_067_977_499_79;
/// The golden ratio (1+√5)/2 to double precision.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

/// Named irrational constants accepted by [`Real::parse`], with their values.
pub const NAMED_CONSTANTS: &[(&str, f64)] = &[
    ("e", std::f64::consts::E),
    ("golden", GOLDEN),
    ("pi", std::f64::consts::PI),
    ("sqrt2", SQRT2),
    ("sqrt3", SQRT3),
    ("sqrt5", SQRT5),
];

/// A real number tagged as exactly rational or as irrational.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Rational(BigRational),
    Irrational { label: String, value: f64 },
}

impl Real {
    pub fn rational(num: i64, den: i64) -> Self {
        Real::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(v: i64) -> Self {
        Real::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn irrational(label: impl Into<String>, value: f64) -> Self {
        Real::Irrational {
            label: label.into(),
            value,
        }
    }

    /// Parses `3`, `-2/5`, `0.125` (exact decimals), or a named constant
    /// optionally followed by an integer offset, e.g. `sqrt2-1`, `golden+2`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::parse("number", "empty string"));
        }
        if let Some(r) = parse_rational(s) {
            return Ok(Real::Rational(r));
        }
        for &(name, value) in NAMED_CONSTANTS {
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, s),
            };
            let Some(rest) = body.strip_prefix(name) else {
                continue;
            };
            let offset: i64 = if rest.is_empty() {
                0
            } else if let Some(k) = rest.strip_prefix('+') {
                k.parse().map_err(|_| Error::parse("number", format!("bad offset in `{s}`")))?
            } else if let Some(k) = rest.strip_prefix('-') {
                -k.parse::<i64>()
                    .map_err(|_| Error::parse("number", format!("bad offset in `{s}`")))?
            } else {
                continue;
            };
            let base = if neg { -value } else { value };
            return Ok(Real::irrational(s, base + offset as f64));
        }
        Err(Error::parse(
            "number",
            format!("`{s}` is neither a rational literal nor a named constant"),
        ))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Real::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Real::Rational(r) => Some(r),
            Real::Irrational { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Rational(r) => rational_to_f64(r),
            Real::Irrational { value, .. } => *value,
        }
    }

    /// `{m · self}` in `[0, 1)`. Exact for rationals; for irrationals the
    /// product is formed with an FMA-corrected split so that the fractional
    /// part stays accurate for |m| up to ~2^50.
    pub fn frac_mul(&self, m: i64) -> f64 {
        match self {
            Real::Rational(r) => {
                if let Some((p, q)) = small_parts(r) {
                    let rem = (p as i128 * m as i128).rem_euclid(q as i128);
                    return rem as f64 / q as f64;
                }
                let numer = r.numer() * BigInt::from(m);
                let rem = numer.mod_floor(r.denom());
                rational_to_f64(&BigRational::new(rem, r.denom().clone()))
            }
            Real::Irrational { value, .. } => frac_mul_f64(*value, m),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rational(r) => write!(f, "{r}"),
            Real::Irrational { label, .. } => write!(f, "{label}"),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Real::parse(&s).map_err(serde::de::Error::custom)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(i) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(i));
    }
    // exact decimal
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // ToPrimitive may fail for huge components; fall back to a ratio of
        // floats, which is enough for display purposes.
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    let r = frac(x);
    r.min(1.0 - r)
}

/// `{alpha · m}` computed with an error-free product.
#[inline]
pub fn frac_mul_f64(alpha: f64, m: i64) -> f64 {
    let mf = m as f64;
    let p = mf * alpha;
    let err = mf.mul_add(alpha, -p);
    frac(frac(p) + err)
}

/// Kahan–Babuška (Neumaier) compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Arithmetic shared by the exact (rational) and float code paths of the
/// circle and nilmanifold models.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Largest integer not exceeding `self`, as a value of the same type.
    fn floor(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Tolerance under which two endpoints are considered equal. Zero for
    /// exact types.
    fn snap() -> Self;

    fn frac(&self) -> Self {
        let r = self.clone() - self.floor();
        if r >= Self::one() {
            r - Self::one()
        } else {
            r
        }
    }

    fn is_exact() -> bool;
}

/// Endpoint snapping used by the float mode of arc arithmetic.
pub const FLOAT_SNAP: f64 = 1e-12;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn snap() -> Self {
        FLOAT_SNAP
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn floor(&self) -> Self {
        BigRational::floor(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn snap() -> Self {
        <BigRational as Zero>::zero()
    }
    fn is_exact() -> bool {
        true
    }
}

/// Exact value of a finite `f64` as a rational.
pub fn exact_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Range(format!("{x} is not finite")))
}

/// Reduced (numerator, denominator) of a rational with small parts.
pub fn small_parts(r: &BigRational) -> Option<(i64, i64)> {
    let n = r.numer().to_i64()?;
    let d = r.denom().to_i64()?;
    debug_assert!(d.is_positive());
    Some((n, d))
}
