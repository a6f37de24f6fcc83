//! Intervals on which `Δ^ℓ⌊f⌋` is constant, the set `D` of good starting
//! points, and the density of the values `Δ^ℓ g` takes on it.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CatalogFunction;
use crate::difference::{floor_to_i64, reverse_weights};
use crate::error::{Error, Result};
use crate::number::{dist_to_int, frac, Real};
use crate::riesz::{upper_w_density, DensityReport, SubsetOfNaturals, WeightScheme};

/// Denominator `2(1 + 3^{ℓ+1} 2^N)` of [`block_delta`].
pub fn block_delta_denominator(level: u32, n: u32) -> Result<u128> {
    if n == 0 {
        return Err(Error::arg("block length N must be at least 1"));
    }
    let overflow = || Error::Range(format!("3^{} · 2^{n} is not representable", level + 1));
    let p3 = 3u128.checked_pow(level + 1).ok_or_else(overflow)?;
    let p2 = 2u128.checked_pow(n).ok_or_else(overflow)?;
    p3.checked_mul(p2)
        .and_then(|x| x.checked_add(1))
        .and_then(|x| x.checked_mul(2))
        .ok_or_else(overflow)
}

/// `δ = 1 / (2(1 + 3^{ℓ+1} 2^N))`, half of the largest admissible threshold.
pub fn block_delta(level: u32, n: u32) -> Result<f64> {
    Ok(1.0 / block_delta_denominator(level, n)? as f64)
}

/// `Δ^ℓ g(a+n) = s` for all `n ∈ [0, N]`, `g = ⌊f⌋`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockWitness {
    pub a: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub s: i64,
    pub delta: f64,
    pub ell: u32,
}

/// `g(n), …, g(n+k−1)` as exact integers.
fn floors(f: &CatalogFunction, n: u64, k: usize) -> Result<Vec<i128>> {
    (0..k as u64).map(|j| floor_to_i64(f.eval(n + j)).map(i128::from)).collect()
}

fn delta_g(weights: &[i128], g: &[i128]) -> Result<i64> {
    let v: i128 = weights.iter().zip(g).map(|(w, x)| w * x).sum();
    i64::try_from(v).map_err(|_| Error::Range("floor difference overflow".into()))
}

/// `Δ^ℓ g(a+n)` for `n = 0..=len`, from directly evaluated floors.
pub fn floor_differences(f: &CatalogFunction, level: u32, a: u64, len: u64) -> Result<Vec<i64>> {
    let w = reverse_weights(level)?;
    let g = floors(f, a, (len + 1) as usize + level as usize)?;
    (0..=len as usize).map(|n| delta_g(&w, &g[n..n + w.len()])).collect()
}

/// Re-checks a witness by direct floor evaluation.
pub fn verify_block(f: &CatalogFunction, b: &BlockWitness) -> Result<()> {
    let d = floor_differences(f, b.ell, b.a, b.n)?;
    for (offset, &v) in d.iter().enumerate() {
        if v != b.s {
            return Err(Error::LemmaViolation {
                a: b.a,
                offset: offset as u64,
                expected: b.s,
                found: v,
            });
        }
    }
    Ok(())
}

fn block_condition(f: &CatalogFunction, level: u32, delta: f64, a: u64) -> Result<bool> {
    if f.delta(level + 1, a)? >= delta {
        return Ok(false);
    }
    for i in 0..=level {
        if frac(f.delta(i, a)?) >= delta {
            return Ok(false);
        }
    }
    Ok(true)
}

const SCAN_CHUNK: u64 = 1 << 16;

/// First `a` in `[1, horizon]` with `{Δ^i f(a)} < δ` for `i <= ℓ` and
/// `Δ^{ℓ+1} f(a) < δ`, where `ℓ` is the declared level of `f`.
///
/// The hit is re-verified on `[a, a+N]` by direct floor evaluation; a
/// verification failure is reported as [`Error::LemmaViolation`].
pub fn find_block(f: &CatalogFunction, n: u32, delta: f64, horizon: u64) -> Result<Option<BlockWitness>> {
    let level = f.level();
    let max_delta = block_delta(level, n)? * 2.0;
    if !(delta > 0.0) || delta >= max_delta {
        return Err(Error::arg(format!(
            "δ = {delta} must lie in (0, {max_delta}) for ℓ = {level}, N = {n}"
        )));
    }
    let threads = rayon::current_num_threads() as u64;
    let mut start = 1u64;
    while start <= horizon {
        let chunks: Vec<(u64, u64)> = (0..threads)
            .map(|i| start + i * SCAN_CHUNK)
            .filter(|&s| s <= horizon)
            .map(|s| (s, (s + SCAN_CHUNK - 1).min(horizon)))
            .collect();
        let hits = chunks
            .par_iter()
            .map(|&(lo, hi)| {
                for a in lo..=hi {
                    if block_condition(f, level, delta, a)? {
                        return Ok(Some(a));
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(a) = hits.into_iter().flatten().next() {
            let s = floor_differences(f, level, a, 0)?[0];
            let witness = BlockWitness {
                a,
                n: n as u64,
                s,
                delta,
                ell: level,
            };
            verify_block(f, &witness)?;
            return Ok(Some(witness));
        }
        start = chunks.last().map_or(horizon + 1, |c| c.1 + 1);
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct DSetReport {
    #[serde(skip)]
    pub set: SubsetOfNaturals,
    pub count: u64,
    pub horizon: u64,
    /// First index after which `Δ^{ℓ+1} f < δ` throughout the scanned range.
    pub onset: Option<u64>,
    pub density: DensityReport,
}

/// `D = {a <= horizon : ‖α Δ^i g(a)‖ <= δ and {Δ^i f(a)} < δ for i <= ℓ}`
/// with its upper W-density estimate for `W = Δ^ℓ f`.
pub fn d_set(f: &CatalogFunction, level: u32, alpha: &[Real], delta: f64, horizon: u64) -> Result<DSetReport> {
    if !(delta > 0.0) {
        return Err(Error::arg("δ must be positive"));
    }
    let w = WeightScheme::from_catalog(f, level)?;
    let start = w.positivity_start();
    if horizon <= start * 1024 {
        return Err(Error::arg(format!("horizon {horizon} too small for a density estimate")));
    }
    let bits: Vec<(bool, bool)> = (1..=horizon)
        .into_par_iter()
        .map(|a| -> Result<(bool, bool)> {
            let small = f.delta(level + 1, a)? < delta;
            if delta >= 1.0 {
                return Ok((true, small));
            }
            let g = floors(f, a, level as usize + 1)?;
            for i in 0..=level {
                if frac(f.delta(i, a)?) >= delta {
                    return Ok((false, small));
                }
                let dg = delta_g(&reverse_weights(i)?, &g[..i as usize + 1])?;
                if alpha.iter().any(|x| dist_to_int(x.frac_mul(dg)) > delta) {
                    return Ok((false, small));
                }
            }
            Ok((true, small))
        })
        .collect::<Result<Vec<_>>>()?;
    let onset = match bits.iter().rposition(|b| !b.1) {
        None => Some(1),
        Some(i) if (i as u64 + 1) < horizon => Some(i as u64 + 2),
        Some(_) => None,
    };
    let mask: Vec<bool> = bits.iter().map(|b| b.0).collect();
    let count = mask.iter().filter(|&&b| b).count() as u64;
    let set = SubsetOfNaturals::mask(1, mask);
    let schedule: Vec<u64> = (0..10).rev().map(|j| horizon >> j).collect();
    let density = upper_w_density(&set, &w, &schedule)?;
    Ok(DSetReport {
        set,
        count,
        horizon,
        onset,
        density,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageDensity {
    /// Number of distinct positive values in `B`.
    pub size: u64,
    pub points: Vec<(u64, f64)>,
    pub estimate: f64,
}

/// `B = Δ^ℓ g(D ∩ [1, horizon])`; returns `max_K |B ∩ [1,K]| / K` over
/// `K = ⌈max B / 2^j⌉`, `j = 0..=5`.
pub fn image_upper_density(f: &CatalogFunction, level: u32, d: &SubsetOfNaturals, horizon: u64) -> Result<ImageDensity> {
    let weights = reverse_weights(level)?;
    let members = d.members_in(1, horizon);
    let mut values = members
        .par_iter()
        .map(|&n| delta_g(&weights, &floors(f, n, weights.len())?))
        .collect::<Result<Vec<i64>>>()?;
    values.retain(|&v| v > 0);
    values.sort_unstable();
    values.dedup();
    let Some(&max) = values.last() else {
        return Ok(ImageDensity {
            size: 0,
            points: Vec::new(),
            estimate: 0.0,
        });
    };
    let mut points = Vec::new();
    for j in (0..=5u32).rev() {
        let k = (max as u64).div_ceil(1 << j);
        let count = values.partition_point(|&v| v as u64 <= k);
        points.push((k, count as f64 / k as f64));
    }
    points.dedup_by_key(|p| p.0);
    let estimate = points.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(ImageDensity {
        size: values.len() as u64,
        points,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deltas() {
        assert_eq!(block_delta_denominator(1, 4).unwrap(), 290);
        assert_eq!(block_delta_denominator(0, 1).unwrap(), 14);
        assert_eq!(block_delta(1, 4).unwrap(), 1.0 / 290.0);
        for (l, n) in [(0, 1), (2, 7), (5, 20)] {
            let d = block_delta_denominator(l, n).unwrap();
            assert_eq!(d % 2, 0);
            assert_eq!((d / 2 - 1), 3u128.pow(l + 1) * 2u128.pow(n));
        }
        assert!(matches!(block_delta(3, 200), Err(Error::Range(_))));
        assert!(block_delta(1, 0).is_err());
    }

    #[test]
    fn identity_block_at_start() {
        let f = CatalogFunction::custom_named("identity", 1).unwrap();
        let b = find_block(&f, 4, block_delta(1, 4).unwrap(), 100).unwrap().unwrap();
        assert_eq!((b.a, b.s), (1, 1));
    }

    #[test]
    fn sqrt_blocks_are_constant_floors() {
        let f = CatalogFunction::power(1.0, 0.5).unwrap();
        let b = find_block(&f, 10, block_delta(0, 10).unwrap(), 10_000_000).unwrap().unwrap();
        let s = (b.a as f64).sqrt().floor() as i64;
        assert_eq!(b.s, s);
        verify_block(&f, &b).unwrap();
    }

    #[test]
    fn threshold_above_bound_rejected() {
        let f = CatalogFunction::power(1.0, 1.5).unwrap();
        assert!(find_block(&f, 3, 0.5, 100).is_err());
    }

    #[test]
    fn vacuous_d_set() {
        let f = CatalogFunction::power(1.0, 1.5).unwrap();
        let r = d_set(&f, 1, &[Real::integer(0)], 1.0, 200_000).unwrap();
        assert_eq!(r.count, 200_000);
        assert!((r.density.estimate - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_image() {
        let f = CatalogFunction::power(1.0, 0.5).unwrap();
        let r = image_upper_density(&f, 0, &SubsetOfNaturals::empty(), 1000).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn witness_json_fields() {
        let b = BlockWitness { a: 3, n: 4, s: 2, delta: 0.5, ell: 1 };
        let v = serde_json::to_value(&b).unwrap();
        for key in ["a", "N", "s", "delta", "ell"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
