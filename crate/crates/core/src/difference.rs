//! Forward differences of real sequences, Newton's shift identities,
//! polynomials in the difference operator, and the floor-difference identity.
//!
//! All differences are evaluated through the closed alternating sum
//! `Δ^h f(n) = Σ_i (-1)^{h-i} C(h,i) f(n+i)`, never by recursive caching, so
//! every derived sequence is a pure function of `n`.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number::{exact_rational, rational_to_f64};

/// Largest order for which binomial coefficients are supported.
pub const MAX_ORDER: u32 = 60;

/// Magnitude beyond which `f64` no longer represents every integer.
pub const EXACT_INTEGER_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

/// Guard band applied when rounding the floor identity to an integer.
pub const IDENTITY_GUARD: f64 = 1e-6;

/// Fractional parts closer than this to 0 or 1 are reported as ambiguous.
pub const BOUNDARY_BAND: f64 = 1e-9;

type EvalFn = dyn Fn(u64) -> f64 + Send + Sync;

/// A deterministic map `n ↦ f(n)` on `[domain_start, domain_end]`.
#[derive(Clone)]
pub struct RealSequence {
    eval: Arc<EvalFn>,
    domain_start: u64,
    domain_end: u64,
    label: String,
}

impl fmt::Debug for RealSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealSequence")
            .field("label", &self.label)
            .field("domain_start", &self.domain_start)
            .field("domain_end", &self.domain_end)
            .finish()
    }
}

impl RealSequence {
    /// A sequence defined for every `n >= domain_start`.
    pub fn new<F>(label: impl Into<String>, domain_start: u64, eval: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        assert!(domain_start >= 1, "sequences are indexed from 1");
        RealSequence {
            eval: Arc::new(eval),
            domain_start,
            domain_end: u64::MAX,
            label: label.into(),
        }
    }

    /// Restricts the sequence to `n <= horizon`; queries past it fail with a
    /// domain error.
    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.domain_end = horizon;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_start(&self) -> u64 {
        self.domain_start
    }

    pub fn domain_end(&self) -> u64 {
        self.domain_end
    }

    /// Evaluates with domain and finiteness checks.
    pub fn value(&self, n: u64) -> Result<f64> {
        if n < self.domain_start || n > self.domain_end {
            return Err(Error::Domain {
                label: self.label.clone(),
                n,
                start: self.domain_start,
                end: self.domain_end,
            });
        }
        let v = (self.eval)(n);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                label: self.label.clone(),
                n,
            });
        }
        Ok(v)
    }

    /// Unchecked evaluation for hot loops whose range was validated up front.
    #[inline]
    pub fn eval_unchecked(&self, n: u64) -> f64 {
        (self.eval)(n)
    }

    /// Checks that `[from, to]` lies in the domain.
    pub fn check_range(&self, from: u64, to: u64) -> Result<()> {
        self.value(from)?;
        if to > self.domain_end {
            return Err(Error::Domain {
                label: self.label.clone(),
                n: to,
                start: self.domain_start,
                end: self.domain_end,
            });
        }
        Ok(())
    }

    /// `f(n+k)` as a new sequence with the same domain start.
    pub fn shifted(&self, k: u64) -> RealSequence {
        let inner = self.eval.clone();
        RealSequence {
            eval: Arc::new(move |n| inner(n + k)),
            domain_start: self.domain_start,
            domain_end: self.domain_end.saturating_sub(k),
            label: format!("{}(·+{k})", self.label),
        }
    }

    /// Pointwise `a·f + b·g`.
    pub fn linear_combination(a: f64, f: &RealSequence, b: f64, g: &RealSequence) -> RealSequence {
        let (fe, ge) = (f.eval.clone(), g.eval.clone());
        RealSequence {
            eval: Arc::new(move |n| a * fe(n) + b * ge(n)),
            domain_start: f.domain_start.max(g.domain_start),
            domain_end: f.domain_end.min(g.domain_end),
            label: format!("{a}·{} + {b}·{}", f.label, g.label),
        }
    }
}

/// Binomial coefficient in 128-bit arithmetic, `n <= MAX_ORDER`.
pub fn binomial(n: u32, k: u32) -> Result<u128> {
    if n > MAX_ORDER {
        return Err(Error::Range(format!(
            "binomial order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n as u128 - i) / (i + 1);
    }
    Ok(c)
}

/// Row `h` of Pascal's triangle with alternating signs:
/// `w_i = (-1)^{h-i} C(h,i)`.
pub fn reverse_weights(h: u32) -> Result<Vec<i128>> {
    (0..=h)
        .map(|i| {
            let c = binomial(h, i)? as i128;
            Ok(if (h - i) % 2 == 0 { c } else { -c })
        })
        .collect()
}

fn weighted_sum(f: &RealSequence, n: u64, weights: &[i128]) -> Result<f64> {
    let last = n
        .checked_add(weights.len() as u64 - 1)
        .ok_or_else(|| Error::Range("index overflow".into()))?;
    f.check_range(n, last)?;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w != 0 {
            acc += w as f64 * f.eval_unchecked(n + i as u64);
        }
    }
    Ok(acc)
}

/// `Σ_i |w_i|·|f(n+i)|`: the scale against which rounding in a weighted sum
/// of samples is measured.
pub fn condition_scale(f: &RealSequence, n: u64, weights: &[i128]) -> Result<f64> {
    let last = n + weights.len() as u64 - 1;
    f.check_range(n, last)?;
    Ok(weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (w as f64).abs() * f.eval_unchecked(n + i as u64).abs())
        .sum())
}

/// `Δ^h f` as a lazily evaluated sequence.
///
/// The result shares `f`'s domain start; its domain end shrinks by `h` so
/// that every query of `Δ^h f(n)` stays inside `f`'s domain.
pub fn delta(f: &RealSequence, order: u32) -> Result<RealSequence> {
    if order == 0 {
        return Ok(f.clone());
    }
    let weights = reverse_weights(order)?;
    let inner = f.eval.clone();
    let label = format!("Δ^{order} {}", f.label);
    Ok(RealSequence {
        eval: Arc::new(move |n| {
            let mut acc = 0.0;
            for (i, &w) in weights.iter().enumerate() {
                acc += w as f64 * inner(n + i as u64);
            }
            acc
        }),
        domain_start: f.domain_start,
        domain_end: f.domain_end.saturating_sub(order as u64),
        label,
    })
}

/// Like [`delta`] but with a checked order coming from untrusted input.
pub fn delta_checked(f: &RealSequence, order: i64) -> Result<RealSequence> {
    if order < 0 {
        return Err(Error::arg(format!("difference order must be >= 0, got {order}")));
    }
    let order = u32::try_from(order).map_err(|_| Error::Range(format!("order {order}")))?;
    delta(f, order)
}

/// `Σ_{i=0}^h (-1)^{h-i} C(h,i) f(n+i)`, i.e. `Δ^h f(n)`.
pub fn reverse_difference(f: &RealSequence, h: u32, n: u64) -> Result<f64> {
    let w = reverse_weights(h)?;
    weighted_sum(f, n, &w)
}

/// Newton's forward formula `Σ_{i=0}^h C(h,i) Δ^i f(n)`, which equals
/// `f(n+h)`.
pub fn newton_shift(f: &RealSequence, h: u32, n: u64) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..=h {
        let c = binomial(h, i)? as f64;
        acc += c * reverse_difference(f, i, n)?;
    }
    Ok(acc)
}

/// A polynomial `a_0 + a_1 x + ... + a_d x^d` with integer coefficients,
/// applied to the difference operator.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DeltaPolynomial {
    coefficients: Vec<i64>,
}

impl DeltaPolynomial {
    /// Coefficients in increasing degree; trailing zeros are trimmed and the
    /// zero polynomial is rejected.
    pub fn new(mut coefficients: Vec<i64>) -> Result<Self> {
        while coefficients.last() == Some(&0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            return Err(Error::arg("the zero polynomial has no degree"));
        }
        if coefficients.len() as u32 > MAX_ORDER + 1 {
            return Err(Error::Range(format!("degree {} too large", coefficients.len() - 1)));
        }
        Ok(DeltaPolynomial { coefficients })
    }

    /// `(1 + x)^k`; applied to `f` it yields `n ↦ f(n+k)`.
    pub fn shift(k: u32) -> Result<Self> {
        let c = (0..=k)
            .map(|i| Ok(binomial(k, i)? as i64))
            .collect::<Result<Vec<_>>>()?;
        DeltaPolynomial::new(c)
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn degree(&self) -> u32 {
        self.coefficients.len() as u32 - 1
    }

    /// Weights `v_j` with `p(Δ)f(n) = Σ_j v_j f(n+j)`, computed exactly:
    /// `v_j = Σ_t a_t (-1)^{t-j} C(t,j)`.
    pub fn sample_weights(&self) -> Result<Vec<i128>> {
        let d = self.degree();
        let mut v = vec![0i128; d as usize + 1];
        for (t, &a) in self.coefficients.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, w) in reverse_weights(t as u32)?.into_iter().enumerate() {
                v[j] = v[j]
                    .checked_add((a as i128).checked_mul(w).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
        }
        Ok(v)
    }

    /// Parses `1,0,2` as `1 + 2x^2`.
    pub fn parse(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::parse("polynomial", format!("bad coefficient `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        DeltaPolynomial::new(coeffs)
    }
}

fn overflow() -> Error {
    Error::Range("polynomial weight overflow".into())
}

/// `p(Δ) f = Σ a_i Δ^i f`, evaluated lazily as one weighted sample sum.
pub fn apply_delta_polynomial(p: &DeltaPolynomial, f: &RealSequence) -> Result<RealSequence> {
    let weights = p.sample_weights()?;
    let inner = f.eval.clone();
    let d = p.degree() as u64;
    Ok(RealSequence {
        eval: Arc::new(move |n| {
            let mut acc = 0.0;
            for (j, &w) in weights.iter().enumerate() {
                if w != 0 {
                    acc += w as f64 * inner(n + j as u64);
                }
            }
            acc
        }),
        domain_start: f.domain_start,
        domain_end: f.domain_end.saturating_sub(d),
        label: format!("p(Δ){}", f.label),
    })
}

type IntEvalFn = dyn Fn(u64) -> Result<i64> + Send + Sync;

/// An integer-valued sequence, typically `g = ⌊f⌋`.
#[derive(Clone)]
pub struct IntegerSequence {
    eval: Arc<IntEvalFn>,
    domain_start: u64,
    label: String,
}

impl fmt::Debug for IntegerSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegerSequence")
            .field("label", &self.label)
            .field("domain_start", &self.domain_start)
            .finish()
    }
}

impl IntegerSequence {
    pub fn new<F>(label: impl Into<String>, domain_start: u64, eval: F) -> Self
    where
        F: Fn(u64) -> Result<i64> + Send + Sync + 'static,
    {
        IntegerSequence {
            eval: Arc::new(eval),
            domain_start,
            label: label.into(),
        }
    }

    pub fn value(&self, n: u64) -> Result<i64> {
        if n < self.domain_start {
            return Err(Error::Domain {
                label: self.label.clone(),
                n,
                start: self.domain_start,
                end: u64::MAX,
            });
        }
        (self.eval)(n)
    }

    pub fn domain_start(&self) -> u64 {
        self.domain_start
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Δ^h g(n)` in exact integer arithmetic.
    pub fn delta(&self, h: u32, n: u64) -> Result<i64> {
        let w = reverse_weights(h)?;
        let mut acc: i128 = 0;
        for (i, &wi) in w.iter().enumerate() {
            acc += wi * self.value(n + i as u64)? as i128;
        }
        i64::try_from(acc).map_err(|_| Error::Range(format!("Δ^{h} g({n}) overflows i64")))
    }
}

/// `⌊x⌋` as an exact integer, rejecting magnitudes where `f64` spacing
/// exceeds 1.
pub fn floor_to_i64(x: f64) -> Result<i64> {
    if !x.is_finite() || x.abs() >= EXACT_INTEGER_LIMIT {
        return Err(Error::Range(format!(
            "{x} lies outside the exactly representable integer range"
        )));
    }
    Ok(x.floor() as i64)
}

/// `g(n) = ⌊f(n)⌋`.
pub fn floor_sequence(f: &RealSequence) -> IntegerSequence {
    let f = f.clone();
    IntegerSequence::new(format!("⌊{}⌋", f.label), f.domain_start, move |n| {
        floor_to_i64(f.value(n)?)
    })
}

/// Outcome of [`delta_floor_identity`].
#[derive(Clone, Debug, PartialEq)]
pub struct FloorIdentity {
    /// `Δ^h g(n)`, confirmed by both the identity and direct floors.
    pub value: i64,
    /// `Δ^h f(n)` from the same samples.
    pub delta_f: f64,
    /// Identity right-hand side before rounding.
    pub identity_raw: f64,
    /// Some `{f(n+t)}` lies within [`BOUNDARY_BAND`] of 0 or 1 (exact zeros
    /// excepted), so the floor of the sampled value may differ from the floor
    /// of the underlying real function.
    pub boundary_ambiguous: bool,
}

/// Evaluates
/// `Δ^h f(n) − Σ_{t=0}^h C(h,t)(−1)^{h−t} {Σ_{s=0}^t C(t,s) Δ^s f(n)}`
/// and checks it against `Δ^h ⌊f⌋(n)` computed from direct floors, together
/// with the bound `|Δ^h g(n) − Δ^h f(n)| < 2^h`.
///
/// The samples `f(n), ..., f(n+h)` are taken as exact dyadic rationals and
/// the identity is evaluated in exact rational arithmetic. Plain `f64`
/// differencing would lose every fractional digit once `f(n)` reaches ~10^12.
pub fn delta_floor_identity(f: &RealSequence, h: u32, n: u64) -> Result<FloorIdentity> {
    if h == 0 {
        return Err(Error::arg("the floor identity needs h >= 1"));
    }
    if h > MAX_ORDER {
        return Err(Error::Range(format!("order {h} exceeds {MAX_ORDER}")));
    }
    let samples: Vec<f64> = (0..=h as u64)
        .map(|i| f.value(n + i))
        .collect::<Result<_>>()?;
    let floors: Vec<i64> = samples.iter().map(|&x| floor_to_i64(x)).collect::<Result<_>>()?;

    let boundary_ambiguous = samples.iter().any(|&x| {
        let r = x - x.floor();
        r != 0.0 && (r < BOUNDARY_BAND || r > 1.0 - BOUNDARY_BAND)
    });

    // direct Δ^h g(n)
    let w = reverse_weights(h)?;
    let direct: i128 = w.iter().zip(&floors).map(|(&wi, &g)| wi * g as i128).sum();
    let direct = i64::try_from(direct).map_err(|_| Error::Range("Δ^h g overflow".into()))?;

    let exact: Vec<BigRational> = samples.iter().map(|&x| exact_rational(x)).collect::<Result<_>>()?;
    // Δ^s f(n) for s = 0..=h
    let diffs: Vec<BigRational> = (0..=h)
        .map(|s| {
            let ws = reverse_weights(s)?;
            Ok(ws
                .iter()
                .zip(&exact)
                .fold(BigRational::zero(), |acc, (&wi, x)| acc + x * BigRational::from_integer(wi.into())))
        })
        .collect::<Result<_>>()?;
    let delta_h_f = diffs[h as usize].clone();

    let mut correction = BigRational::zero();
    for t in 0..=h {
        let mut inner = BigRational::zero();
        for s in 0..=t {
            inner += &diffs[s as usize] * BigRational::from_integer((binomial(t, s)? as i128).into());
        }
        let fractional = &inner - inner.floor();
        let sign: i128 = if (h - t) % 2 == 0 { 1 } else { -1 };
        correction += fractional * BigRational::from_integer((sign * binomial(h, t)? as i128).into());
    }
    let rhs = &delta_h_f - correction;
    let identity_raw = rational_to_f64(&rhs);
    let rounded = identity_raw.round();
    if (identity_raw - direct as f64).abs() > IDENTITY_GUARD || rounded as i64 != direct {
        return Err(Error::NumericalConsistency {
            n,
            identity: identity_raw,
            direct: direct as f64,
        });
    }

    let gap = (BigRational::from_integer(direct.into()) - &delta_h_f).abs();
    let bound = BigRational::from_integer((1i128 << h).into());
    if gap >= bound {
        return Err(Error::NumericalConsistency {
            n,
            identity: gap.to_f64().unwrap_or(f64::NAN),
            direct: bound.to_f64().unwrap_or(f64::NAN),
        });
    }

    Ok(FloorIdentity {
        value: direct,
        delta_f: rational_to_f64(&delta_h_f),
        identity_raw,
        boundary_ambiguous,
    })
}
