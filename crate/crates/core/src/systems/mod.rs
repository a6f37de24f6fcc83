//! Invertible measure-preserving systems with exact or Monte Carlo
//! intersection measures: torus rotations, cyclic shifts, the skew product
//! `(x, y) ↦ (x+α, y+x)` and Heisenberg nilsystems.

pub mod arcs;
pub mod heisenberg;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use arcs::{arc_intersection, arc_intersection_measure, single_arc_overlap, ArcSet, MAX_SHIFTS};
pub use heisenberg::{HeisenbergElement, HeisenbergSystem};

use crate::catalog::parse_params;
use crate::error::{Error, Result};
use crate::number::{frac, frac_mul_f64, small_parts, Real};

/// `x ↦ x + α` on `T^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSystem {
    alpha: Vec<Real>,
}

impl RotationSystem {
    pub fn new(alpha: Vec<Real>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::arg("rotation needs dimension d >= 1"));
        }
        Ok(RotationSystem { alpha })
    }

    pub fn alpha(&self) -> &[Real] {
        &self.alpha
    }

    pub fn is_exact(&self) -> bool {
        self.alpha.iter().all(Real::is_rational)
    }
}

/// `k ↦ k + r mod q` on `ℤ/q`, points stored as `k` in a single coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicSystem {
    pub q: u64,
    pub r: u64,
}

/// `(x, y) ↦ (x + α, y + x)` on `T²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewProductSystem {
    pub alpha: Real,
}

impl SkewProductSystem {
    /// `(x + mα, y + mx + C(m,2)α)`.
    pub fn iterate(&self, p: &[f64], m: i64) -> [f64; 2] {
        let c2 = ((m as i128 * (m as i128 - 1)) / 2) as i64;
        let x = frac(p[0] + self.alpha.frac_mul(m));
        let y = frac(p[1] + frac_mul_f64(p[0], m) + self.alpha.frac_mul(c2));
        [x, y]
    }
}

/// The systems available to experiments.
#[derive(Clone, Debug, PartialEq)]
pub enum DynamicalSystem {
    Rotation(RotationSystem),
    Cyclic(CyclicSystem),
    Skew(SkewProductSystem),
    Heisenberg(HeisenbergSystem),
}

/// Named systems with their parameters, sorted by name.
pub fn system_registry() -> Vec<(&'static str, &'static str)> {
    vec![
        ("cyclic", "q >= 1, r: k ↦ k + r mod q"),
        ("heisenberg", "a, b, c: translation by (a, b, c) on the Heisenberg nilmanifold"),
        ("identity", "no parameters: rotation by 0"),
        ("rotation", "d >= 1, alpha = a_1;...;a_d: x ↦ x + alpha on T^d"),
        ("skew", "alpha: (x, y) ↦ (x + alpha, y + x) on T^2"),
    ]
}

impl DynamicalSystem {
    /// Parses `rotation:d=1,alpha=sqrt2`, `rotation:d=2,alpha=sqrt2;1/3`,
    /// `cyclic:q=12,r=5`, `skew:alpha=golden`, `heisenberg:a=..,b=..,c=..`
    /// or `identity`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_params(rest).map_err(|_| Error::parse("system", format!("bad parameters in `{spec}`")))?;
        let get = |key: &str| -> Result<&str> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::parse("system", format!("`{kind}` needs parameter `{key}`")))
        };
        let real = |key: &str| -> Result<Real> {
            Real::parse(get(key)?).map_err(|e| Error::parse("system", format!("`{key}`: {e}")))
        };
        let allowed: &[&str] = match kind {
            "rotation" => &["d", "alpha"],
            "cyclic" => &["q", "r"],
            "skew" => &["alpha"],
            "heisenberg" => &["a", "b", "c"],
            "identity" => &[],
            other => {
                return Err(Error::parse(
                    "system",
                    format!("unknown system `{other}` (known: cyclic, heisenberg, identity, rotation, skew)"),
                ))
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::parse("system", format!("`{kind}` has no parameter `{k}`")));
        }
        match kind {
            "rotation" => {
                let alpha = get("alpha")?
                    .split(';')
                    .map(|s| Real::parse(s).map_err(|e| Error::parse("system", format!("`alpha`: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                if let Ok(d) = get("d") {
                    let d: usize = d.parse().map_err(|_| Error::parse("system", format!("bad d `{d}`")))?;
                    if d != alpha.len() {
                        return Err(Error::parse("system", format!("d = {d} but {} alpha values", alpha.len())));
                    }
                }
                Ok(DynamicalSystem::Rotation(RotationSystem::new(alpha)?))
            }
            "cyclic" => {
                let q: u64 = get("q")?.parse().map_err(|_| Error::parse("system", "bad q"))?;
                let r: u64 = get("r")?.parse().map_err(|_| Error::parse("system", "bad r"))?;
                if q == 0 {
                    return Err(Error::parse("system", "q must be at least 1"));
                }
                Ok(DynamicalSystem::Cyclic(CyclicSystem { q, r: r % q }))
            }
            "skew" => Ok(DynamicalSystem::Skew(SkewProductSystem { alpha: real("alpha")? })),
            "heisenberg" => Ok(DynamicalSystem::Heisenberg(HeisenbergSystem::new(
                real("a")?,
                real("b")?,
                real("c")?,
            )?)),
            _ => Ok(DynamicalSystem::identity()),
        }
    }

    pub fn identity() -> Self {
        DynamicalSystem::Rotation(RotationSystem { alpha: vec![Real::integer(0)] })
    }

    pub fn rotation(alpha: Real) -> Self {
        DynamicalSystem::Rotation(RotationSystem { alpha: vec![alpha] })
    }

    pub fn dim(&self) -> usize {
        match self {
            DynamicalSystem::Rotation(r) => r.alpha.len(),
            DynamicalSystem::Cyclic(_) => 1,
            DynamicalSystem::Skew(_) => 2,
            DynamicalSystem::Heisenberg(_) => 3,
        }
    }

    /// `T^m p` for any integer `m`.
    pub fn iterate(&self, p: &[f64], m: i64) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::arg(format!("point has {} coordinates, system has {}", p.len(), self.dim())));
        }
        Ok(match self {
            DynamicalSystem::Rotation(r) => r.alpha.iter().zip(p).map(|(a, x)| frac(x + a.frac_mul(m))).collect(),
            DynamicalSystem::Cyclic(c) => {
                let k = (p[0] as i128 + m as i128 * c.r as i128).rem_euclid(c.q as i128);
                vec![k as f64]
            }
            DynamicalSystem::Skew(s) => s.iterate(p, m).to_vec(),
            DynamicalSystem::Heisenberg(h) => h.iterate(p, m)?.to_vec(),
        })
    }

    /// A point distributed according to the invariant measure.
    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            DynamicalSystem::Cyclic(c) => out[0] = rng.random_range(0..c.q) as f64,
            _ => out.iter_mut().for_each(|x| *x = rng.random::<f64>()),
        }
    }
}

/// A measurable set: a union of arcs on `T`, a product of arc sets on
/// `T^d`, or a set of residues for cyclic systems. Endpoints are exact when
/// given as rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Arcs(Vec<(Real, Real)>),
    Box(Vec<(Real, Real)>),
    Residues(Vec<u64>),
}

impl Region {
    /// Parses `arc:0,0.3`, `arcs:0,0.1;0.5,0.7`, `box:0,1/2;0,1/2;0,1/2` or
    /// `residues:0,3,4`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::parse("set", format!("expected kind:values, got `{spec}`")))?;
        let pairs = |s: &str| -> Result<Vec<(Real, Real)>> {
            s.split(';')
                .map(|p| {
                    let (l, r) = p
                        .split_once(',')
                        .ok_or_else(|| Error::parse("set", format!("expected l,r in `{p}`")))?;
                    Ok((Real::parse(l)?, Real::parse(r)?))
                })
                .collect()
        };
        match kind.trim() {
            "arc" | "arcs" => Ok(Region::Arcs(pairs(rest)?)),
            "box" => Ok(Region::Box(pairs(rest)?)),
            "residues" => {
                let v = rest
                    .split(',')
                    .map(|s| s.trim().parse::<u64>().map_err(|_| Error::parse("set", format!("bad residue `{s}`"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Region::Residues(v))
            }
            other => Err(Error::parse("set", format!("unknown set kind `{other}` (known: arc, arcs, box, residues)"))),
        }
    }

    /// The single arc `[l, r)`.
    pub fn arc(l: Real, r: Real) -> Self {
        Region::Arcs(vec![(l, r)])
    }

    fn float_arcs(pairs: &[(Real, Real)]) -> Result<ArcSet<f64>> {
        ArcSet::from_arcs(pairs.iter().map(|(l, r)| (l.to_f64(), r.to_f64())).collect())
    }

    fn exact_arcs(pairs: &[(Real, Real)]) -> Option<Result<ArcSet<BigRational>>> {
        let v: Option<Vec<(BigRational, BigRational)>> = pairs
            .iter()
            .map(|(l, r)| Some((l.as_rational()?.clone(), r.as_rational()?.clone())))
            .collect();
        v.map(ArcSet::from_arcs)
    }

    /// Per-coordinate arc sets.
    pub fn coordinate_sets(&self) -> Result<Vec<ArcSet<f64>>> {
        match self {
            Region::Arcs(p) => Ok(vec![Region::float_arcs(p)?]),
            Region::Box(p) => p.iter().map(|c| Region::float_arcs(std::slice::from_ref(c))).collect(),
            Region::Residues(_) => Err(Error::arg("residue sets have no arc structure")),
        }
    }

    /// Membership test for a point of the system's space.
    pub fn indicator(&self, dim: usize) -> Result<Box<dyn Fn(&[f64]) -> bool + Send + Sync>> {
        match self {
            Region::Residues(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                Ok(Box::new(move |p: &[f64]| v.binary_search(&(p[0] as u64)).is_ok()))
            }
            _ => {
                let sets = self.coordinate_sets()?;
                if sets.len() != dim {
                    return Err(Error::arg(format!("set has {} coordinates, system has {dim}", sets.len())));
                }
                Ok(Box::new(move |p: &[f64]| sets.iter().zip(p).all(|(s, x)| s.contains(x))))
            }
        }
    }

    /// `μ(A)` with respect to the invariant measure of `system`.
    pub fn measure(&self, system: &DynamicalSystem) -> Result<f64> {
        match (self, system) {
            (Region::Residues(v), DynamicalSystem::Cyclic(c)) => {
                let mut v: Vec<u64> = v.iter().copied().filter(|&k| k < c.q).collect();
                v.sort_unstable();
                v.dedup();
                Ok(v.len() as f64 / c.q as f64)
            }
            (Region::Residues(_), _) => Err(Error::arg("residue sets need a cyclic system")),
            (_, DynamicalSystem::Cyclic(_)) => Err(Error::arg("cyclic systems need a residue set")),
            (r, s) => {
                let sets = r.coordinate_sets()?;
                if sets.len() != s.dim() {
                    return Err(Error::arg(format!("set has {} coordinates, system has {}", sets.len(), s.dim())));
                }
                Ok(sets.iter().map(ArcSet::measure).product())
            }
        }
    }
}

/// Exact measures `μ(A ∩ T^{−m_1}A ∩ ⋯)` for rotations and cyclic systems.
///
/// For rational rotations the value depends only on the residues of the
/// shifts, and single-shift queries are memoized by residue.
pub struct ExactIntersection {
    kind: ExactKind,
}

enum ExactKind {
    Float { alpha: Vec<Real>, sets: Vec<ArcSet<f64>>, single: Option<f64> },
    Rational { alpha: Vec<BigRational>, sets: Vec<ArcSet<BigRational>>, table: Option<(u64, Vec<f64>)> },
    Cyclic { system: CyclicSystem, members: Vec<bool> },
}

/// Largest period for which single-shift measures of a rational rotation are
/// tabulated.
const TABLE_LIMIT: u64 = 1 << 16;

impl ExactIntersection {
    /// `None` when the system has no exact intersection oracle.
    pub fn new(system: &DynamicalSystem, a: &Region) -> Result<Option<Self>> {
        match (system, a) {
            (DynamicalSystem::Cyclic(c), Region::Residues(v)) => {
                let mut members = vec![false; c.q as usize];
                for &k in v {
                    if k < c.q {
                        members[k as usize] = true;
                    }
                }
                Ok(Some(ExactIntersection {
                    kind: ExactKind::Cyclic { system: c.clone(), members },
                }))
            }
            (DynamicalSystem::Rotation(r), region) => {
                let pairs: Vec<(Real, Real)> = match region {
                    Region::Arcs(p) if r.alpha.len() == 1 => p.clone(),
                    Region::Box(p) if p.len() == r.alpha.len() => p.clone(),
                    _ => return Err(Error::arg("set does not match the rotation's dimension")),
                };
                let exact_sets: Option<Result<Vec<ArcSet<BigRational>>>> = if r.is_exact() {
                    let per: Option<Vec<Result<ArcSet<BigRational>>>> = match region {
                        Region::Arcs(p) => Region::exact_arcs(p).map(|s| vec![s]),
                        _ => pairs.iter().map(|c| Region::exact_arcs(std::slice::from_ref(c))).collect(),
                    };
                    per.map(|v| v.into_iter().collect())
                } else {
                    None
                };
                if let Some(sets) = exact_sets {
                    let sets = sets?;
                    let alpha: Vec<BigRational> = r.alpha.iter().map(|a| a.as_rational().unwrap().clone()).collect();
                    let period = alpha
                        .iter()
                        .try_fold(1u64, |acc, a| small_parts(a).map(|(_, q)| num_integer::lcm(acc, q as u64)));
                    let mut ex = ExactIntersection {
                        kind: ExactKind::Rational { alpha, sets, table: None },
                    };
                    if let Some(q) = period.filter(|&q| q <= TABLE_LIMIT) {
                        let table = (0..q as i64)
                            .map(|m| ex.rational_measure(&[m]).map(|v| v.to_f64().unwrap_or(f64::NAN)))
                            .collect::<Result<Vec<_>>>()?;
                        if let ExactKind::Rational { table: t, .. } = &mut ex.kind {
                            *t = Some((q, table));
                        }
                    }
                    return Ok(Some(ex));
                }
                let sets = region.coordinate_sets()?;
                let single = match sets.as_slice() {
                    [s] if s.arcs().len() == 1 => Some(s.measure()),
                    _ => None,
                };
                Ok(Some(ExactIntersection {
                    kind: ExactKind::Float { alpha: r.alpha.clone(), sets, single },
                }))
            }
            (DynamicalSystem::Cyclic(_), _) => Err(Error::arg("cyclic systems need a residue set")),
            (_, Region::Residues(_)) => Err(Error::arg("residue sets need a cyclic system")),
            _ => Ok(None),
        }
    }

    fn rational_measure(&self, shifts: &[i64]) -> Result<BigRational> {
        let ExactKind::Rational { alpha, sets, .. } = &self.kind else {
            unreachable!("rational oracle");
        };
        let mut total = BigRational::from_integer(1.into());
        for (a, set) in alpha.iter().zip(sets) {
            let s: Vec<BigRational> = shifts
                .iter()
                .map(|&m| a * BigRational::from_integer(m.into()))
                .collect();
            total *= arc_intersection_measure(set, &s)?;
            if total.is_zero() {
                break;
            }
        }
        Ok(total)
    }

    /// Exact rational value when the system and set are rational.
    pub fn exact_value(&self, shifts: &[i64]) -> Option<Result<BigRational>> {
        match &self.kind {
            ExactKind::Rational { .. } => Some(self.rational_measure(shifts)),
            _ => None,
        }
    }

    /// `μ(A ∩ T^{−m_1}A ∩ ⋯ ∩ T^{−m_k}A)`.
    pub fn measure(&self, shifts: &[i64]) -> Result<f64> {
        if shifts.len() > MAX_SHIFTS {
            return Err(Error::Complexity(format!(
                "{} shifts requested, at most {MAX_SHIFTS} supported",
                shifts.len()
            )));
        }
        match &self.kind {
            ExactKind::Cyclic { system, members } => {
                let q = system.q as i128;
                let count = (0..system.q as i128)
                    .filter(|&k| {
                        members[k as usize]
                            && shifts
                                .iter()
                                .all(|&m| members[(k + m as i128 * system.r as i128).rem_euclid(q) as usize])
                    })
                    .count();
                Ok(count as f64 / system.q as f64)
            }
            ExactKind::Rational { table, .. } => {
                if let (Some((q, t)), [m]) = (table, shifts) {
                    return Ok(t[m.rem_euclid(*q as i64) as usize]);
                }
                Ok(self.rational_measure(shifts)?.to_f64().unwrap_or(f64::NAN))
            }
            ExactKind::Float { alpha, sets, single } => {
                if let (Some(len), [m]) = (single, shifts) {
                    return Ok(single_arc_overlap(*len, alpha[0].frac_mul(*m)));
                }
                let mut total = 1.0;
                for (a, set) in alpha.iter().zip(sets) {
                    let s: Vec<f64> = shifts.iter().map(|&m| a.frac_mul(m)).collect();
                    total *= arc_intersection_measure(set, &s)?;
                }
                Ok(total)
            }
        }
    }
}

/// Monte Carlo estimate with its standard error `√(p(1−p)/samples)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 4096;

/// Estimates `μ(A ∩ T^{−m_1}A ∩ ⋯ ∩ T^{−m_k}A)` by sampling the invariant
/// measure: `x` counts when `x ∈ A` and every `T^{m_i}x ∈ A`.
///
/// The sample index space is cut into fixed chunks, each drawing from its own
/// ChaCha8 stream, so the result depends only on `seed`.
pub fn measure_estimate<F>(system: &DynamicalSystem, indicator: F, shifts: &[i64], samples: u64, seed: u64) -> Result<MeasureEstimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if samples == 0 {
        return Err(Error::arg("samples must be positive"));
    }
    let d = system.dim();
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut p = vec![0.0; d];
            let mut hits = 0;
            for _ in 0..n {
                system.sample(&mut rng, &mut p);
                if !indicator(&p) {
                    continue;
                }
                let mut all = true;
                for &m in shifts {
                    if !indicator(&system.iterate(&p, m)?) {
                        all = false;
                        break;
                    }
                }
                hits += all as u64;
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<u64>();
    let p = hits as f64 / samples as f64;
    Ok(MeasureEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert!(matches!(DynamicalSystem::parse("rotation:d=1,alpha=sqrt2").unwrap(), DynamicalSystem::Rotation(_)));
        let r = DynamicalSystem::parse("rotation:d=2,alpha=sqrt2;1/3").unwrap();
        assert_eq!(r.dim(), 2);
        assert!(DynamicalSystem::parse("rotation:d=3,alpha=sqrt2").is_err());
        assert!(matches!(DynamicalSystem::parse("skew:alpha=1/4").unwrap(), DynamicalSystem::Skew(_)));
        assert!(matches!(DynamicalSystem::parse("heisenberg:a=sqrt2,b=sqrt3,c=0").unwrap(), DynamicalSystem::Heisenberg(_)));
        assert!(matches!(DynamicalSystem::parse("cyclic:q=7,r=3").unwrap(), DynamicalSystem::Cyclic(_)));
        assert_eq!(DynamicalSystem::parse("identity").unwrap(), DynamicalSystem::identity());
        let e = DynamicalSystem::parse("torus:alpha=1").unwrap_err();
        assert!(e.to_string().contains("system"));
    }

    #[test]
    fn skew_closed_form() {
        let s = SkewProductSystem { alpha: Real::rational(1, 4) };
        assert_eq!(s.iterate(&[0.0, 0.0], 4), [0.0, 0.5]);
        let mut p = [0.3, 0.8];
        for _ in 0..5 {
            p = [frac(p[0] + 0.25), frac(p[1] + p[0])];
        }
        let q = s.iterate(&[0.3, 0.8], 5);
        assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        let back = s.iterate(&q, -5);
        assert!((back[0] - 0.3).abs() < 1e-12 && (back[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn iterate_zero_is_identity() {
        for spec in ["rotation:alpha=sqrt2", "skew:alpha=golden", "heisenberg:a=1/3,b=sqrt2,c=0", "cyclic:q=9,r=2"] {
            let s = DynamicalSystem::parse(spec).unwrap();
            let p: Vec<f64> = match &s {
                DynamicalSystem::Cyclic(_) => vec![4.0],
                _ => (0..s.dim()).map(|i| 0.1 + 0.2 * i as f64).collect(),
            };
            assert_eq!(s.iterate(&p, 0).unwrap(), p, "{spec}");
        }
    }

    #[test]
    fn monte_carlo_plain_measure() {
        let s = DynamicalSystem::rotation(Real::parse("sqrt2").unwrap());
        let a = Region::parse("arc:0,0.3").unwrap();
        let ind = a.indicator(1).unwrap();
        let m = measure_estimate(&s, &ind, &[], 20_000, 3).unwrap();
        assert!((m.estimate - 0.3).abs() < 3.0 * m.stderr + 1e-12);
        let again = measure_estimate(&s, &ind, &[], 20_000, 3).unwrap();
        assert_eq!(m, again);
        assert!(measure_estimate(&s, &ind, &[], 0, 3).is_err());
    }

    #[test]
    fn exact_rotation_oracle() {
        let s = DynamicalSystem::rotation(Real::rational(1, 4));
        let a = Region::parse("arc:0,1/4").unwrap();
        let ex = ExactIntersection::new(&s, &a).unwrap().unwrap();
        assert_eq!(ex.measure(&[1]).unwrap(), 0.0);
        assert_eq!(ex.measure(&[4]).unwrap(), 0.25);
        assert_eq!(ex.exact_value(&[2]).unwrap().unwrap(), BigRational::zero());
    }

    #[test]
    fn cyclic_oracle() {
        let s = DynamicalSystem::parse("cyclic:q=6,r=1").unwrap();
        let a = Region::parse("residues:0,1,2").unwrap();
        let ex = ExactIntersection::new(&s, &a).unwrap().unwrap();
        assert_eq!(ex.measure(&[]).unwrap(), 0.5);
        assert!((ex.measure(&[1]).unwrap() - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(a.measure(&s).unwrap(), 0.5);
    }
}
