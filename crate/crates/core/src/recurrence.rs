//! Return sets `{n : μ(A ∩ T^{−⌊f(n)⌋}A) > μ(A)² − ε}`, their multiple
//! and `p(Δ)` variants, and the weighted averages bounding them from below.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CatalogFunction;
use crate::difference::{apply_delta_polynomial, floor_sequence, floor_to_i64, DeltaPolynomial, IntegerSequence};
use crate::error::{Error, Result};
use crate::riesz::{
    default_run_length, probe_windows, riesz_mean_real, thickness_check, w_syndetic_check, SubsetOfNaturals,
    SyndeticReport, ThicknessReport, WeightScheme, WindowSchedule,
};
use crate::systems::{measure_estimate, DynamicalSystem, ExactIntersection, Region};

/// Knobs shared by the return-set computations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnOptions {
    /// W-span of the syndeticity probes (spans cycle `l, 2l, 4l`).
    pub l: f64,
    pub probes: usize,
    /// Run length required for thickness; `None` uses [`default_run_length`].
    pub run_length: Option<u64>,
    /// Monte Carlo samples per `n` when no exact oracle exists.
    pub samples: u64,
    pub seed: u64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        ReturnOptions {
            l: 5.0,
            probes: 200,
            run_length: None,
            samples: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    Exact,
    MonteCarlo,
}

/// Whether any member was found up to the horizon. An empty set is reported
/// as "no witness", which is not a failure of any claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnStatus {
    Witnessed,
    NoWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnRow {
    pub n: u64,
    pub shifts: Vec<i64>,
    pub measure: f64,
    /// Zero in exact mode.
    pub stderr: f64,
    pub member: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnSetReport {
    #[serde(skip)]
    pub set: SubsetOfNaturals,
    pub horizon: u64,
    pub epsilon: Option<f64>,
    pub measure_a: f64,
    /// `μ(A)²`.
    pub measure_floor: f64,
    pub mode: MeasureMode,
    pub status: ReturnStatus,
    pub member_count: u64,
    pub thickness: ThicknessReport,
    pub w_syndeticity: Option<SyndeticReport>,
    pub rows: Vec<ReturnRow>,
}

/// Intersection measures for one system and set, exact when possible.
pub struct MeasureOracle<'a> {
    system: &'a DynamicalSystem,
    exact: Option<ExactIntersection>,
    indicator: Box<dyn Fn(&[f64]) -> bool + Send + Sync>,
    measure_a: f64,
    samples: u64,
    seed: u64,
}

impl<'a> MeasureOracle<'a> {
    pub fn new(system: &'a DynamicalSystem, a: &Region, samples: u64, seed: u64) -> Result<Self> {
        let measure_a = a.measure(system)?;
        if !(measure_a > 0.0) {
            return Err(Error::arg("the set A must have positive measure"));
        }
        Ok(MeasureOracle {
            system,
            exact: ExactIntersection::new(system, a)?,
            indicator: a.indicator(system.dim())?,
            measure_a,
            samples,
            seed,
        })
    }

    pub fn mode(&self) -> MeasureMode {
        if self.exact.is_some() {
            MeasureMode::Exact
        } else {
            MeasureMode::MonteCarlo
        }
    }

    pub fn measure_a(&self) -> f64 {
        self.measure_a
    }

    /// `(μ(A ∩ T^{−m_1}A ∩ ⋯), stderr)`; `key` decorrelates Monte Carlo
    /// streams between calls.
    pub fn measure(&self, shifts: &[i64], key: u64) -> Result<(f64, f64)> {
        match &self.exact {
            Some(e) => Ok((e.measure(shifts)?, 0.0)),
            None => {
                let seed = self.seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let m = measure_estimate(self.system, &self.indicator, shifts, self.samples, seed)?;
                Ok((m.estimate, m.stderr))
            }
        }
    }
}

fn weight_for(f: &CatalogFunction) -> Result<WeightScheme> {
    WeightScheme::from_catalog(f, f.level())
}

fn rows_for<S>(oracle: &MeasureOracle, horizon: u64, shifts: S, member: impl Fn(f64, f64) -> bool + Sync) -> Result<Vec<ReturnRow>>
where
    S: Fn(u64) -> Result<Vec<i64>> + Sync,
{
    (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let s = shifts(n)?;
            let (measure, stderr) = oracle.measure(&s, n)?;
            Ok(ReturnRow {
                member: member(measure, stderr),
                n,
                shifts: s,
                measure,
                stderr,
            })
        })
        .collect()
}

fn assemble(
    oracle: &MeasureOracle,
    f: &CatalogFunction,
    epsilon: Option<f64>,
    horizon: u64,
    rows: Vec<ReturnRow>,
    opts: &ReturnOptions,
) -> Result<ReturnSetReport> {
    let set = SubsetOfNaturals::mask(1, rows.iter().map(|r| r.member).collect());
    let member_count = rows.iter().filter(|r| r.member).count() as u64;
    let run_length = opts.run_length.unwrap_or_else(|| default_run_length(horizon)).max(1);
    let thickness = thickness_check(&set, run_length, horizon)?;
    let w = weight_for(f)?;
    // skipped when [1, horizon] is too short for even one probe window
    let w_syndeticity = match probe_windows(&w, opts.l, opts.probes, 1, horizon, opts.seed) {
        Ok(probes) => Some(w_syndetic_check(&set, &w, opts.l, &probes)?),
        Err(_) => None,
    };
    let mu = oracle.measure_a();
    Ok(ReturnSetReport {
        set,
        horizon,
        epsilon,
        measure_a: mu,
        measure_floor: mu * mu,
        mode: oracle.mode(),
        status: if member_count > 0 { ReturnStatus::Witnessed } else { ReturnStatus::NoWitness },
        member_count,
        thickness,
        w_syndeticity,
        rows,
    })
}

fn floor_of(f: &CatalogFunction, n: u64) -> Result<i64> {
    floor_to_i64(f.eval(n))
}

/// `R_{ε,A}` on `[1, horizon]`, with thickness and W-syndeticity for
/// `W = Δ^ℓ f`.
pub fn single_return_set(
    system: &DynamicalSystem,
    a: &Region,
    f: &CatalogFunction,
    epsilon: f64,
    horizon: u64,
    opts: &ReturnOptions,
) -> Result<ReturnSetReport> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("ε must be positive"));
    }
    let oracle = MeasureOracle::new(system, a, opts.samples, opts.seed)?;
    let threshold = oracle.measure_a().powi(2) - epsilon;
    let rows = rows_for(&oracle, horizon, |n| Ok(vec![floor_of(f, n)?]), |m, _| m > threshold)?;
    assemble(&oracle, f, Some(epsilon), horizon, rows, opts)
}

fn positive(measure: f64, stderr: f64, mode: MeasureMode) -> bool {
    match mode {
        MeasureMode::Exact => measure > 0.0,
        MeasureMode::MonteCarlo => measure > 4.0 * stderr,
    }
}

/// `R^{(k)}_A = {n : μ(A ∩ T^{−⌊f(n)⌋}A ∩ ⋯ ∩ T^{−⌊f(n+k)⌋}A) > 0}`.
pub fn multiple_return_set(
    system: &DynamicalSystem,
    a: &Region,
    f: &CatalogFunction,
    k: u32,
    horizon: u64,
    opts: &ReturnOptions,
) -> Result<ReturnSetReport> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let oracle = MeasureOracle::new(system, a, opts.samples, opts.seed)?;
    let mode = oracle.mode();
    let rows = rows_for(
        &oracle,
        horizon,
        |n| (0..=k as u64).map(|i| floor_of(f, n + i)).collect(),
        |m, s| positive(m, s, mode),
    )?;
    assemble(&oracle, f, None, horizon, rows, opts)
}

/// `{n : μ(A ∩ T^{−⌊p_1(Δ)f(n)⌋}A ∩ ⋯ ∩ T^{−⌊p_k(Δ)f(n)⌋}A) > 0}`.
///
/// With `p_i = (1+x)^i` for `i = 0..=k` this is exactly
/// [`multiple_return_set`].
pub fn poly_delta_return_set(
    system: &DynamicalSystem,
    a: &Region,
    f: &CatalogFunction,
    polys: &[DeltaPolynomial],
    horizon: u64,
    opts: &ReturnOptions,
) -> Result<ReturnSetReport> {
    if polys.is_empty() {
        return Err(Error::arg("at least one polynomial is required"));
    }
    let base = f.sequence();
    let seqs: Vec<IntegerSequence> = polys
        .iter()
        .map(|p| apply_delta_polynomial(p, &base).map(|s| floor_sequence(&s)))
        .collect::<Result<_>>()?;
    let oracle = MeasureOracle::new(system, a, opts.samples, opts.seed)?;
    let mode = oracle.mode();
    let rows = rows_for(
        &oracle,
        horizon,
        |n| seqs.iter().map(|g| g.value(n)).collect(),
        |m, s| positive(m, s, mode),
    )?;
    assemble(&oracle, f, None, horizon, rows, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KhintchineVerdict {
    BoundMet,
    BoundNotMet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KhintchineWindow {
    pub window: [u64; 2],
    pub span: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KhintchineReport {
    pub measure_floor: f64,
    pub tol: f64,
    pub estimates: Vec<KhintchineWindow>,
    /// Smallest estimate over the last third of the schedule.
    pub tail_min: f64,
    pub verdict: KhintchineVerdict,
}

/// Riesz means of `n ↦ μ(A ∩ T^{−⌊f(n)⌋}A)` on each schedule window; the
/// bound is met iff every tail-third estimate is at least `μ(A)² − tol`.
///
/// The reported minimum is what was observed; no limit is inferred from it.
pub fn khintchine_tail(
    system: &DynamicalSystem,
    a: &Region,
    f: &CatalogFunction,
    w: &WeightScheme,
    schedule: &WindowSchedule,
    tol: f64,
    opts: &ReturnOptions,
) -> Result<KhintchineReport> {
    if schedule.is_empty() {
        return Err(Error::arg("empty window schedule"));
    }
    let oracle = MeasureOracle::new(system, a, opts.samples, opts.seed)?;
    let x = |n: u64| -> Result<f64> { Ok(oracle.measure(&[floor_of(f, n)?], n)?.0) };
    let estimates = schedule
        .windows()
        .par_iter()
        .zip(schedule.spans().par_iter())
        .map(|(&(m, n), &span)| {
            let values: Vec<f64> = (m..n).map(&x).collect::<Result<_>>()?;
            let estimate = riesz_mean_real(|k| values[(k - m) as usize], w, m, n)?;
            Ok(KhintchineWindow {
                window: [m, n],
                span,
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let floor = oracle.measure_a().powi(2);
    let tail_min = estimates[schedule.tail_indices()]
        .iter()
        .map(|e| e.estimate)
        .fold(f64::INFINITY, f64::min);
    Ok(KhintchineReport {
        measure_floor: floor,
        tol,
        estimates,
        tail_min,
        verdict: if tail_min >= floor - tol { KhintchineVerdict::BoundMet } else { KhintchineVerdict::BoundNotMet },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Real;

    fn opts() -> ReturnOptions {
        ReturnOptions {
            probes: 20,
            ..ReturnOptions::default()
        }
    }

    #[test]
    fn large_arc_is_always_returning() {
        let s = DynamicalSystem::rotation(Real::parse("sqrt2").unwrap());
        let a = Region::parse("arc:0,0.8").unwrap();
        let f = CatalogFunction::power(1.0, 1.5).unwrap();
        let r = single_return_set(&s, &a, &f, 0.5, 2000, &opts()).unwrap();
        assert_eq!(r.member_count, 2000);
        assert_eq!(r.mode, MeasureMode::Exact);
    }

    #[test]
    fn identity_system_returns_everywhere() {
        let s = DynamicalSystem::identity();
        let a = Region::parse("arc:0.2,0.5").unwrap();
        let f = CatalogFunction::custom_named("identity", 0).unwrap();
        let r = single_return_set(&s, &a, &f, 0.01, 1000, &opts()).unwrap();
        assert_eq!(r.member_count, 1000);
        let m = multiple_return_set(&s, &a, &f, 1, 500, &opts()).unwrap();
        assert_eq!(m.member_count, 500);
    }

    #[test]
    fn null_set_rejected() {
        let s = DynamicalSystem::identity();
        let a = Region::parse("arc:0.2,0.2").unwrap();
        let f = CatalogFunction::power(1.0, 1.5).unwrap();
        assert!(single_return_set(&s, &a, &f, 0.1, 10, &opts()).is_err());
        assert!(multiple_return_set(&s, &Region::parse("arc:0,0.5").unwrap(), &f, 0, 10, &opts()).is_err());
    }

    #[test]
    fn rows_carry_shifts() {
        let s = DynamicalSystem::rotation(Real::rational(1, 3));
        let a = Region::parse("arc:0,1/3").unwrap();
        let f = CatalogFunction::custom_named("identity", 0).unwrap();
        let r = multiple_return_set(&s, &a, &f, 2, 9, &opts()).unwrap();
        assert_eq!(r.rows[0].shifts, vec![1, 2, 3]);
        // a third of the circle never meets its two other translates
        assert_eq!(r.status, ReturnStatus::NoWitness);
    }
}
