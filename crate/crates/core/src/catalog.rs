//! Concrete slowly growing functions and a finite-horizon membership scan for
//! the classes `F_{ℓ+1}` (the `(ℓ+1)`-th difference decreases monotonically to
//! zero while its partial sums diverge).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::difference::{reverse_weights, RealSequence};
use crate::error::{Error, Result};
use crate::number::{KahanSum, Real, SQRT2};

/// The parametric families that can be built from a string spec.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `b·n^c`, `c > 0` not an integer.
    Power { b: f64, c: f64 },
    /// `b·n^c·log^r n`, `c > 0` not an integer, `r >= 0`.
    PowerLog { b: f64, c: f64, r: f64 },
    /// `n^c·(cos(log^r n) + 2)`, `c > 0` not an integer, `0 < r < 1`.
    Oscillating { c: f64, r: f64 },
    /// `log^r n`, `r > 0`.
    LogPower { r: f64 },
    /// A named function with a declared level.
    Custom { name: String },
}

/// One entry of [`registry`]: family name, parameters and constraints.
#[derive(Clone, Debug, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub constraints: &'static str,
}

/// Families and named custom functions, sorted by name.
pub fn registry() -> Vec<RegistryEntry> {
    vec![
        RegistryEntry {
            name: "custom",
            params: &["name", "level"],
            constraints: "name in {exp2, half, identity, linear_sqrt2, square}; level >= 0",
        },
        RegistryEntry {
            name: "log_power",
            params: &["r"],
            constraints: "r > 0; level 0",
        },
        RegistryEntry {
            name: "oscillating",
            params: &["c", "r"],
            constraints: "c > 0, c not an integer, 0 < r < 1; level ceil(c)-1",
        },
        RegistryEntry {
            name: "power",
            params: &["b", "c"],
            constraints: "b != 0, c > 0, c not an integer; level ceil(c)-1",
        },
        RegistryEntry {
            name: "power_log",
            params: &["b", "c", "r"],
            constraints: "b != 0, c > 0, c not an integer, r >= 0; level ceil(c)-1",
        },
    ]
}

const CUSTOM_NAMES: &[&str] = &["exp2", "half", "identity", "linear_sqrt2", "square"];

/// A catalog function `f` together with its declared level `ℓ`, meaning
/// `f ∈ F_{ℓ+1}` (so `W = Δ^ℓ f` is the natural weight).
#[derive(Clone)]
pub struct CatalogFunction {
    family: Family,
    level: u32,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl fmt::Debug for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogFunction")
            .field("label", &self.label)
            .field("level", &self.level)
            .finish()
    }
}

impl PartialEq for CatalogFunction {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.level == other.level && self.label == other.label
    }
}

fn non_integer_exponent(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::arg(format!("exponent c must be positive, got {c}")));
    }
    if c.fract() == 0.0 {
        return Err(Error::arg(format!(
            "exponent c = {c} is a positive integer; polynomial growth is excluded from the catalog"
        )));
    }
    Ok(())
}

fn level_for_exponent(c: f64) -> u32 {
    c.ceil() as u32 - 1
}

impl CatalogFunction {
    pub fn power(b: f64, c: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(Error::arg("power family needs b != 0"));
        }
        non_integer_exponent(c)?;
        Ok(CatalogFunction {
            family: Family::Power { b, c },
            level: level_for_exponent(c),
            eval: Arc::new(move |x| b * x.powf(c)),
            label: format!("{b}·n^{c}"),
        })
    }

    pub fn power_log(b: f64, c: f64, r: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(Error::arg("power_log family needs b != 0"));
        }
        non_integer_exponent(c)?;
        if !(r >= 0.0) {
            return Err(Error::arg(format!("power_log needs r >= 0, got {r}")));
        }
        Ok(CatalogFunction {
            family: Family::PowerLog { b, c, r },
            level: level_for_exponent(c),
            eval: Arc::new(move |x| b * x.powf(c) * x.ln().powf(r)),
            label: format!("{b}·n^{c}·log^{r} n"),
        })
    }

    pub fn oscillating(c: f64, r: f64) -> Result<Self> {
        non_integer_exponent(c)?;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::arg(format!("oscillating family needs 0 < r < 1, got {r}")));
        }
        Ok(CatalogFunction {
            family: Family::Oscillating { c, r },
            level: level_for_exponent(c),
            eval: Arc::new(move |x| x.powf(c) * (x.ln().powf(r).cos() + 2.0)),
            label: format!("n^{c}·(cos(log^{r} n) + 2)"),
        })
    }

    pub fn log_power(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::arg(format!("log_power needs r > 0, got {r}")));
        }
        Ok(CatalogFunction {
            family: Family::LogPower { r },
            level: 0,
            eval: Arc::new(move |x| x.ln().powf(r)),
            label: format!("log^{r} n"),
        })
    }

    /// One of the named test functions: `identity` (n), `half` (n/2),
    /// `square` (n²), `linear_sqrt2` (n√2), `exp2` (2^n).
    pub fn custom_named(name: &str, level: u32) -> Result<Self> {
        let eval: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match name {
            "identity" => Arc::new(|x| x),
            "half" => Arc::new(|x| x / 2.0),
            "square" => Arc::new(|x| x * x),
            "linear_sqrt2" => Arc::new(|x| x * SQRT2),
            "exp2" => Arc::new(|x: f64| x.exp2()),
            other => {
                return Err(Error::arg(format!(
                    "unknown custom function `{other}` (known: {})",
                    CUSTOM_NAMES.join(", ")
                )))
            }
        };
        Ok(CatalogFunction {
            family: Family::Custom { name: name.to_string() },
            level,
            eval,
            label: name.to_string(),
        })
    }

    /// An arbitrary closure with a declared level.
    pub fn custom<F>(name: impl Into<String>, level: u32, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        CatalogFunction {
            family: Family::Custom { name: name.clone() },
            level,
            eval: Arc::new(f),
            label: name,
        }
    }

    /// Parses `family:key=value,...`, e.g. `power:b=1,c=3/2` or
    /// `oscillating:c=0.5,r=0.5`. Parameter values may be decimals,
    /// fractions or named constants.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_params(rest)?;
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.iter().find(|(k, _)| k == key) {
                Some((_, v)) => Ok(Real::parse(v)
                    .map_err(|_| Error::parse("function", format!("bad value for `{key}`: `{v}`")))?
                    .to_f64()),
                None => default.ok_or_else(|| {
                    Error::parse("function", format!("family `{family}` needs parameter `{key}`"))
                }),
            }
        };
        let allowed: &[&str] = match family {
            "power" => &["b", "c"],
            "power_log" => &["b", "c", "r"],
            "oscillating" => &["c", "r"],
            "log_power" => &["r"],
            "custom" => &["name", "level"],
            other => {
                return Err(Error::parse(
                    "function",
                    format!("unknown family `{other}` (known: custom, log_power, oscillating, power, power_log)"),
                ))
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::parse("function", format!("family `{family}` has no parameter `{k}`")));
        }
        match family {
            "power" => CatalogFunction::power(get("b", Some(1.0))?, get("c", None)?),
            "power_log" => CatalogFunction::power_log(get("b", Some(1.0))?, get("c", None)?, get("r", None)?),
            "oscillating" => CatalogFunction::oscillating(get("c", None)?, get("r", None)?),
            "log_power" => CatalogFunction::log_power(get("r", Some(1.0))?),
            _ => {
                let name = params
                    .iter()
                    .find(|(k, _)| k == "name")
                    .map(|(_, v)| v.as_str())
                    .ok_or_else(|| Error::parse("function", "custom needs `name`"))?;
                let level = match params.iter().find(|(k, _)| k == "level") {
                    Some((_, v)) => v
                        .parse::<u32>()
                        .map_err(|_| Error::parse("function", format!("bad level `{v}`")))?,
                    None => 0,
                };
                CatalogFunction::custom_named(name, level)
            }
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Declared `ℓ` with `f ∈ F_{ℓ+1}`.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, n: u64) -> f64 {
        (self.eval)(n as f64)
    }

    /// The function as a sequence on `n >= 1`.
    pub fn sequence(&self) -> RealSequence {
        let e = self.eval.clone();
        RealSequence::new(self.label.clone(), 1, move |n| e(n as f64))
    }
}

/// Below this index differences are summed directly.
const DIRECT_BELOW: u64 = 16;

impl CatalogFunction {
    /// `ln f(n+i) − ln f(n)` computed without cancellation, for the families
    /// that have a closed form; `None` means "sum directly".
    fn log_ratio(&self, n: u64, i: u64) -> Option<f64> {
        let x = n as f64;
        let t = (i as f64 / x).ln_1p();
        let log_l = |r: f64| r * (t / x.ln()).ln_1p();
        match self.family {
            Family::Power { c, .. } => Some(c * t),
            Family::PowerLog { c, r, .. } => Some(c * t + log_l(r)),
            Family::LogPower { r } => Some(log_l(r)),
            Family::Oscillating { c, r } => {
                let a = x.ln().powf(r);
                let da = a * log_l(r).exp_m1();
                let dcos = -2.0 * (a + da / 2.0).sin() * (da / 2.0).sin();
                Some(c * t + (dcos / (a.cos() + 2.0)).ln_1p())
            }
            Family::Custom { .. } => None,
        }
    }

    /// `Δ^h f(n)` together with an estimate of its rounding error.
    ///
    /// For the closed-form families the samples are written as
    /// `f(n)·(1 + expm1(ln f(n+i) − ln f(n)))`; the constant part cancels
    /// exactly, which keeps several digits where the plain alternating sum
    /// of values of size `n^c` would lose all of them.
    pub fn delta_with_error(&self, h: u32, n: u64) -> Result<(f64, f64)> {
        let w = reverse_weights(h)?;
        let direct = || {
            let mut v = 0.0;
            let mut scale = 0.0;
            for (i, wi) in w.iter().enumerate() {
                let x = self.eval(n + i as u64);
                v += *wi as f64 * x;
                scale += (*wi as f64).abs() * x.abs();
            }
            (v, 8.0 * f64::EPSILON * scale)
        };
        if h == 0 || n < DIRECT_BELOW || self.log_ratio(n, 1).is_none() {
            return Ok(direct());
        }
        let base = self.eval(n);
        let mut v = 0.0;
        let mut scale = 0.0;
        for (i, wi) in w.iter().enumerate().skip(1) {
            let d = self.log_ratio(n, i as u64).unwrap_or(0.0);
            let e = d.exp_m1();
            v += *wi as f64 * e;
            scale += (*wi as f64).abs() * (e.abs() + d.abs());
        }
        Ok((base * v, 16.0 * f64::EPSILON * (base * scale).abs()))
    }

    /// `Δ^h f(n)` (see [`CatalogFunction::delta_with_error`]).
    pub fn delta(&self, h: u32, n: u64) -> Result<f64> {
        self.delta_with_error(h, n).map(|(v, _)| v)
    }

    /// The sequence `n ↦ Δ^h f(n)`.
    pub fn difference_sequence(&self, h: u32) -> Result<RealSequence> {
        reverse_weights(h)?;
        let f = self.clone();
        Ok(RealSequence::new(
            format!("Δ^{h} {}", self.label),
            1,
            move |n| f.delta(h, n).unwrap_or(f64::NAN),
        ))
    }
}

pub(crate) fn parse_params(rest: &str) -> Result<Vec<(String, String)>> {
    rest.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse("spec", format!("expected key=value, got `{kv}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Verdict of a membership scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipVerdict {
    /// Consistent with `f ∈ F_{ℓ+1}` up to the horizon; never a proof.
    Consistent,
    Inconsistent,
}

/// What the finite scan observed about `Δ^{ℓ+1} f` on `[1, horizon]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub level: u32,
    pub horizon: u64,
    /// Smallest `n₀` such that `Δ^{ℓ+1}f` is monotone (up to rounding noise)
    /// on `[n₀, horizon]`.
    pub monotone_onset: u64,
    /// The monotone tail covers at least half of the scanned range.
    pub monotone_tail: bool,
    pub terminal_value: f64,
    pub partial_sum: f64,
    pub divergence_threshold: f64,
    pub verdict: MembershipVerdict,
}

/// Terminal values at or above this are taken as "not tending to zero".
pub const TERMINAL_LIMIT: f64 = 0.1;

/// Scans `Δ^{ℓ+1} f` on `[1, horizon]`.
///
/// Monotonicity is judged up to the rounding noise of the alternating sum,
/// `8·ε·Σ_i C(ℓ+1,i)|f(n+i)|`. The partial sum `Σ|Δ^{ℓ+1}f|` is summed
/// directly on the prefix before the monotone onset and telescoped on the
/// tail, where the sign is constant.
pub fn verify_class_membership(
    f: &CatalogFunction,
    level: u32,
    horizon: u64,
    divergence_threshold: f64,
) -> Result<MembershipReport> {
    if horizon < 1000 {
        return Err(Error::arg(format!("membership scan needs horizon >= 1000, got {horizon}")));
    }
    let order = level + 1;
    let mut values = Vec::with_capacity(horizon as usize);
    let mut noise = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        let (v, tol) = f.delta_with_error(order, n)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                label: f.label().to_string(),
                n,
            });
        }
        values.push(v);
        noise.push(tol);
    }

    // backward scan for the longest monotone tail
    let (mut inc_ok, mut dec_ok) = (true, true);
    let mut onset = horizon;
    for idx in (0..values.len() - 1).rev() {
        let (a, b) = (values[idx], values[idx + 1]);
        let tol = noise[idx] + noise[idx + 1];
        inc_ok &= b >= a - tol;
        dec_ok &= b <= a + tol;
        if !(inc_ok || dec_ok) {
            break;
        }
        onset = idx as u64 + 1;
    }
    let monotone_tail = onset <= horizon / 2;

    let mut prefix = KahanSum::new();
    for v in &values[..(onset - 1) as usize] {
        prefix.add(v.abs());
    }
    let tail = (f.delta(level, horizon + 1)? - f.delta(level, onset)?).abs();
    let partial_sum = prefix.value() + tail;
    let terminal_value = values[values.len() - 1].abs();

    let verdict = if monotone_tail && terminal_value < TERMINAL_LIMIT && partial_sum > divergence_threshold {
        MembershipVerdict::Consistent
    } else {
        MembershipVerdict::Inconsistent
    };
    Ok(MembershipReport {
        level,
        horizon,
        monotone_onset: onset,
        monotone_tail,
        terminal_value,
        partial_sum,
        divergence_threshold,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_levels_follow_exponent() {
        assert_eq!(CatalogFunction::power(1.0, 1.5).unwrap().level(), 1);
        assert_eq!(CatalogFunction::power(1.0, 0.5).unwrap().level(), 0);
        assert_eq!(CatalogFunction::power(-2.0, 2.3).unwrap().level(), 2);
    }

    #[test]
    fn integer_exponents_rejected() {
        let e = CatalogFunction::power(1.0, 2.0).unwrap_err();
        assert!(e.to_string().contains("integer"), "{e}");
        assert!(CatalogFunction::parse("power:c=2").is_err());
        assert!(CatalogFunction::power(0.0, 1.5).is_err());
        assert!(CatalogFunction::oscillating(0.5, 1.0).is_err());
    }

    #[test]
    fn oscillating_matches_closed_form() {
        let f = CatalogFunction::oscillating(0.5, 0.5).unwrap();
        for n in [1u64, 10, 1000, 123_456] {
            let x = n as f64;
            let expect = x.sqrt() * (x.ln().sqrt().cos() + 2.0);
            assert_eq!(f.eval(n), expect);
        }
        assert_eq!(f.level(), 0);
    }

    #[test]
    fn parse_specs() {
        let f = CatalogFunction::parse("power:b=1,c=1.5").unwrap();
        assert_eq!(f.family(), &Family::Power { b: 1.0, c: 1.5 });
        let g = CatalogFunction::parse("power:c=3/2").unwrap();
        assert_eq!(g.eval(4), 8.0);
        let h = CatalogFunction::parse("custom:name=square,level=1").unwrap();
        assert_eq!(h.level(), 1);
        assert_eq!(h.eval(3), 9.0);
        assert!(CatalogFunction::parse("nope:c=1").is_err());
        assert!(CatalogFunction::parse("power:c=1.5,zz=3").is_err());
        assert!(CatalogFunction::parse("power_log:c=1.5").is_err());
    }

    #[test]
    fn registry_is_sorted() {
        let names: Vec<_> = registry().iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        assert_eq!(names, sorted);
        for fam in ["power", "power_log", "oscillating"] {
            assert!(names.contains(&fam));
        }
    }

    #[test]
    fn square_is_not_in_f2() {
        let f = CatalogFunction::custom_named("square", 1).unwrap();
        let r = verify_class_membership(&f, 1, 10_000, 10.0).unwrap();
        assert_eq!(r.verdict, MembershipVerdict::Inconsistent);
        assert_eq!(r.terminal_value, 2.0);
    }

    #[test]
    fn log_is_consistent_with_f1() {
        let f = CatalogFunction::log_power(1.0).unwrap();
        let r = verify_class_membership(&f, 0, 1_000_000, 10.0).unwrap();
        assert_eq!(r.verdict, MembershipVerdict::Consistent, "{r:?}");
        // Σ Δ log = log(horizon + 1)
        assert!((r.partial_sum - (1_000_001f64).ln()).abs() < 1e-6);
    }

    #[test]
    fn powers_consistent_with_their_class() {
        for c in [0.5, 1.5, 2.5, 1.7, 2.3] {
            let f = CatalogFunction::power(1.0, c).unwrap();
            let r = verify_class_membership(&f, f.level(), 1_000_000, 10.0).unwrap();
            assert_eq!(r.verdict, MembershipVerdict::Consistent, "c = {c}: {r:?}");
        }
    }

    #[test]
    fn accurate_differences_match_direct_ones_at_small_n() {
        let f = CatalogFunction::oscillating(1.5, 0.5).unwrap();
        let g = CatalogFunction::power_log(2.0, 2.5, 1.0).unwrap();
        for func in [f, g] {
            for h in 0..5 {
                for n in [20u64, 50, 200] {
                    let seq = func.sequence();
                    let direct = crate::difference::reverse_difference(&seq, h, n).unwrap();
                    let w = reverse_weights(h).unwrap();
                    let noise = 8.0 * f64::EPSILON * crate::difference::condition_scale(&seq, n, &w).unwrap();
                    let accurate = func.delta(h, n).unwrap();
                    assert!((direct - accurate).abs() <= noise + 1e-9 * direct.abs(), "{} {h} {n}: {direct} vs {accurate}", func.label());
                }
            }
        }
    }

    #[test]
    fn small_horizon_rejected() {
        let f = CatalogFunction::log_power(1.0).unwrap();
        assert!(verify_class_membership(&f, 0, 999, 1.0).is_err());
    }
}
