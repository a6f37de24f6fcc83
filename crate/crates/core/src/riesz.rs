//! Weighted averages along the increments of a slowly growing weight `W`:
//! Riesz means over windows, uniform-limit diagnostics, densities,
//! W-syndeticity and thickness scans.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CatalogFunction;
use crate::difference::RealSequence;
use crate::error::{Error, Result};
use crate::number::KahanSum;

/// Default number of indices scanned when locating `positivity_start`.
pub const POSITIVITY_SCAN: u64 = 10_000;

/// A weight `W ∈ F_1` and its increments `ΔW`.
#[derive(Clone)]
pub struct WeightScheme {
    w: RealSequence,
    dw: RealSequence,
    positivity_start: u64,
}

impl fmt::Debug for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightScheme")
            .field("w", &self.w.label())
            .field("positivity_start", &self.positivity_start)
            .finish()
    }
}

impl WeightScheme {
    /// `W` with `ΔW(n) = W(n+1) − W(n)`; `positivity_start` is found by
    /// scanning `[domain_start, scan]`.
    pub fn new(w: RealSequence, scan: u64) -> Result<Self> {
        let inner = w.clone();
        let dw = RealSequence::new(format!("Δ{}", w.label()), w.domain_start(), move |n| {
            inner.eval_unchecked(n + 1) - inner.eval_unchecked(n)
        });
        WeightScheme::with_increments(w, dw, scan)
    }

    /// `W` with separately supplied increments (which must equal `ΔW`).
    pub fn with_increments(w: RealSequence, dw: RealSequence, scan: u64) -> Result<Self> {
        let start = w.domain_start();
        if scan <= start {
            return Err(Error::arg("positivity scan must extend past the domain start"));
        }
        let mut last_bad = None;
        for n in start..=scan {
            let d = dw.value(n)?;
            if !(d > 0.0) {
                last_bad = Some(n);
            }
        }
        let positivity_start = match last_bad {
            None => start,
            Some(n) if n < scan => n + 1,
            Some(_) => {
                return Err(Error::arg(format!(
                    "weight `{}` has no positive increments near n = {scan}",
                    w.label()
                )))
            }
        };
        Ok(WeightScheme {
            w,
            dw,
            positivity_start,
        })
    }

    /// `W = Δ^ℓ f` for a catalog function, with increments `Δ^{ℓ+1} f`.
    pub fn from_catalog(f: &CatalogFunction, level: u32) -> Result<Self> {
        let w = f.difference_sequence(level)?;
        let dw = f.difference_sequence(level + 1)?;
        WeightScheme::with_increments(w, dw, POSITIVITY_SCAN)
    }

    /// `W(n) = n`: Riesz means become Cesàro averages.
    pub fn identity() -> Self {
        WeightScheme {
            w: RealSequence::new("n", 1, |n| n as f64),
            dw: RealSequence::new("1", 1, |_| 1.0),
            positivity_start: 1,
        }
    }

    /// `W(n) = √n`.
    pub fn sqrt() -> Self {
        WeightScheme::new(RealSequence::new("√n", 1, |n| (n as f64).sqrt()), 100)
            .expect("√n is increasing")
    }

    pub fn label(&self) -> &str {
        self.w.label()
    }

    pub fn positivity_start(&self) -> u64 {
        self.positivity_start
    }

    #[inline]
    pub fn value(&self, n: u64) -> f64 {
        self.w.eval_unchecked(n)
    }

    #[inline]
    pub fn increment(&self, n: u64) -> f64 {
        self.dw.eval_unchecked(n)
    }

    /// `W(N) − W(M)`.
    pub fn span(&self, m: u64, n: u64) -> f64 {
        self.value(n) - self.value(m)
    }

    /// Smallest `N >= m` with `W(N) − W(m) >= target`, searching up to `limit`.
    pub fn first_reaching(&self, m: u64, target: f64, limit: u64) -> Option<u64> {
        if self.span(m, limit) < target {
            return None;
        }
        let (mut lo, mut hi) = (m, limit);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.span(m, mid) >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    fn check_window(&self, m: u64, n: u64) -> Result<f64> {
        if m < self.positivity_start {
            return Err(Error::arg(format!(
                "window start {m} precedes positivity start {}",
                self.positivity_start
            )));
        }
        let span = self.span(m, n);
        if n <= m || !(span > 0.0) {
            return Err(Error::DegenerateWindow { m, n, span });
        }
        Ok(span)
    }
}

/// Riesz mean of `a` over the window `[M, N)`:
/// `Σ_{M<=n<N} ΔW(n) a(n) / (W(N) − W(M))`.
///
/// The sum runs over the half-open window so that the weights telescope to
/// the normalizer; the normalizer is the compensated sum of those same
/// weights, which makes constant sequences average to themselves.
pub fn riesz_mean<A>(a: A, w: &WeightScheme, m: u64, n: u64) -> Result<Complex64>
where
    A: Fn(u64) -> Complex64,
{
    w.check_window(m, n)?;
    let (mut re, mut im, mut total) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for k in m..n {
        let dw = w.increment(k);
        let z = a(k);
        re.add(dw * z.re);
        im.add(dw * z.im);
        total.add(dw);
    }
    let t = total.value();
    Ok(Complex64::new(re.value() / t, im.value() / t))
}

/// Real-valued version of [`riesz_mean`].
pub fn riesz_mean_real<A>(a: A, w: &WeightScheme, m: u64, n: u64) -> Result<f64>
where
    A: Fn(u64) -> f64,
{
    w.check_window(m, n)?;
    let (mut acc, mut total) = (KahanSum::new(), KahanSum::new());
    for k in m..n {
        let dw = w.increment(k);
        acc.add(dw * a(k));
        total.add(dw);
    }
    Ok(acc.value() / total.value())
}

/// Several real sequences averaged over one window in a single pass.
pub fn riesz_means_real<A>(a: A, count: usize, w: &WeightScheme, m: u64, n: u64) -> Result<Vec<f64>>
where
    A: Fn(u64, &mut [f64]),
{
    w.check_window(m, n)?;
    let mut acc = vec![KahanSum::new(); count];
    let mut total = KahanSum::new();
    let mut buf = vec![0.0; count];
    for k in m..n {
        let dw = w.increment(k);
        a(k, &mut buf);
        for (s, v) in acc.iter_mut().zip(&buf) {
            s.add(dw * v);
        }
        total.add(dw);
    }
    let t = total.value();
    Ok(acc.iter().map(|s| s.value() / t).collect())
}

/// Windows `[M_i, N_i)` with strictly increasing spans.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowSchedule {
    windows: Vec<(u64, u64)>,
    spans: Vec<f64>,
}

impl WindowSchedule {
    /// Validates explicit windows.
    pub fn from_windows(w: &WeightScheme, windows: Vec<(u64, u64)>) -> Result<Self> {
        let mut spans = Vec::with_capacity(windows.len());
        for &(m, n) in &windows {
            let s = w.check_window(m, n)?;
            if spans.last().is_some_and(|&p| s <= p) {
                return Err(Error::arg(format!(
                    "window spans must increase strictly; [{m}, {n}] has span {s}"
                )));
            }
            spans.push(s);
        }
        Ok(WindowSchedule { windows, spans })
    }

    /// `N_i = ⌈N_0·2^i⌉`, `M_0 = start`, later `M_i` drawn uniformly from
    /// `[start, N_{i−1}]`; if a draw would not increase the span, `M_i = start`.
    pub fn geometric(w: &WeightScheme, start: u64, n0: u64, count: usize, seed: u64) -> Result<Self> {
        let start = start.max(w.positivity_start());
        if n0 <= start {
            return Err(Error::arg(format!("N_0 = {n0} must exceed the start {start}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut windows = Vec::with_capacity(count);
        let mut spans: Vec<f64> = Vec::with_capacity(count);
        let mut prev_n = start;
        for i in 0..count {
            let n = (n0 as f64 * 2f64.powi(i as i32)).ceil() as u64;
            let mut m = if i == 0 { start } else { rng.random_range(start..=prev_n) };
            let prev_span = spans.last().copied().unwrap_or(0.0);
            if !(w.span(m, n) > prev_span) {
                m = start;
            }
            let s = w.check_window(m, n)?;
            if s <= prev_span {
                return Err(Error::arg("weight grows too slowly for a geometric schedule"));
            }
            windows.push((m, n));
            spans.push(s);
            prev_n = n;
        }
        Ok(WindowSchedule { windows, spans })
    }

    /// One window per target span: `M` uniform in `[start, m_max]`, `N` the
    /// first index reaching the span. Targets must increase.
    pub fn with_spans(w: &WeightScheme, targets: &[f64], start: u64, m_max: u64, seed: u64) -> Result<Self> {
        let start = start.max(w.positivity_start());
        if m_max < start {
            return Err(Error::arg("empty range for window starts"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut windows = Vec::with_capacity(targets.len());
        for &t in targets {
            let m = rng.random_range(start..=m_max);
            let limit = m.saturating_mul(4).max(16).max(m + 16);
            let n = search_reaching(w, m, t, limit)?;
            windows.push((m, n));
        }
        WindowSchedule::from_windows(w, windows)
    }

    pub fn windows(&self) -> &[(u64, u64)] {
        &self.windows
    }

    pub fn spans(&self) -> &[f64] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Indices of the last third of the schedule (at least one window).
    pub fn tail_indices(&self) -> std::ops::Range<usize> {
        let k = self.len();
        let first = k - (k / 3).max(1);
        first..k
    }
}

fn search_reaching(w: &WeightScheme, m: u64, target: f64, mut limit: u64) -> Result<u64> {
    for _ in 0..64 {
        if let Some(n) = w.first_reaching(m, target, limit) {
            return Ok(n.max(m + 1));
        }
        limit = limit.checked_mul(2).ok_or_else(|| Error::Range("window end overflow".into()))?;
    }
    Err(Error::Range(format!("span {target} not reachable from {m}")))
}

/// A subset of ℕ given by a predicate, an explicit sorted list, or a bit
/// mask on an interval.
#[derive(Clone)]
pub enum SubsetOfNaturals {
    Predicate {
        label: String,
        pred: Arc<dyn Fn(u64) -> bool + Send + Sync>,
    },
    Listed(Vec<u64>),
    Mask { start: u64, bits: Vec<bool> },
}

impl fmt::Debug for SubsetOfNaturals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetOfNaturals::Predicate { label, .. } => write!(f, "Predicate({label})"),
            SubsetOfNaturals::Listed(v) => write!(f, "Listed({} members)", v.len()),
            SubsetOfNaturals::Mask { start, bits } => write!(f, "Mask[{start}, {})", start + bits.len() as u64),
        }
    }
}

impl SubsetOfNaturals {
    pub fn predicate<P>(label: impl Into<String>, pred: P) -> Self
    where
        P: Fn(u64) -> bool + Send + Sync + 'static,
    {
        SubsetOfNaturals::Predicate {
            label: label.into(),
            pred: Arc::new(pred),
        }
    }

    pub fn all() -> Self {
        SubsetOfNaturals::predicate("ℕ", |_| true)
    }

    pub fn empty() -> Self {
        SubsetOfNaturals::Listed(Vec::new())
    }

    /// Explicit members; sorted and deduplicated.
    pub fn listed(mut members: Vec<u64>) -> Self {
        members.sort_unstable();
        members.dedup();
        SubsetOfNaturals::Listed(members)
    }

    /// Membership bits for `start, start+1, …`; indices outside are absent.
    pub fn mask(start: u64, bits: Vec<bool>) -> Self {
        SubsetOfNaturals::Mask { start, bits }
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        match self {
            SubsetOfNaturals::Predicate { pred, .. } => pred(n),
            SubsetOfNaturals::Listed(v) => v.binary_search(&n).is_ok(),
            SubsetOfNaturals::Mask { start, bits } => {
                n >= *start && bits.get((n - start) as usize).copied().unwrap_or(false)
            }
        }
    }

    /// Members in `[from, to]`, ascending.
    pub fn members_in(&self, from: u64, to: u64) -> Vec<u64> {
        match self {
            SubsetOfNaturals::Listed(v) => {
                let lo = v.partition_point(|&x| x < from);
                let hi = v.partition_point(|&x| x <= to);
                v[lo..hi].to_vec()
            }
            _ => (from..=to).filter(|&n| self.contains(n)).collect(),
        }
    }
}

/// One row of a uniform-limit report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowEstimate {
    pub window: [u64; 2],
    pub span: f64,
    pub estimate_re: f64,
    pub estimate_im: f64,
}

impl WindowEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.estimate_re, self.estimate_im)
    }
}

/// Per-window Riesz means and the spread over the last third of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UwReport {
    pub estimates: Vec<WindowEstimate>,
    pub tail_deviation: f64,
}

impl UwReport {
    /// Tail spread below `tol`. A finite-horizon diagnostic, not a limit.
    pub fn converged(&self, tol: f64) -> bool {
        self.tail_deviation < tol
    }

    pub fn tail(&self) -> &[WindowEstimate] {
        let k = self.estimates.len();
        &self.estimates[k - (k / 3).max(1)..]
    }
}

/// Riesz means of `a` on every schedule window, computed in parallel with
/// sequential summation inside each window.
pub fn uw_lim_estimate<A>(a: A, w: &WeightScheme, schedule: &WindowSchedule) -> Result<UwReport>
where
    A: Fn(u64) -> Complex64 + Sync,
{
    if schedule.len() < 3 {
        return Err(Error::arg(format!(
            "a schedule needs at least 3 windows, got {}",
            schedule.len()
        )));
    }
    let estimates = schedule
        .windows()
        .par_iter()
        .zip(schedule.spans().par_iter())
        .map(|(&(m, n), &span)| {
            riesz_mean(&a, w, m, n).map(|z| WindowEstimate {
                window: [m, n],
                span,
                estimate_re: z.re,
                estimate_im: z.im,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail: Vec<Complex64> = estimates[schedule.tail_indices()].iter().map(WindowEstimate::value).collect();
    let mut dev: f64 = 0.0;
    for (i, x) in tail.iter().enumerate() {
        for y in &tail[i + 1..] {
            dev = dev.max((x - y).norm());
        }
    }
    Ok(UwReport {
        estimates,
        tail_deviation: dev,
    })
}

/// Normalized mass `Σ_{n∈R, s<=n<N} ΔW(n) / (W(N) − W(s))` at each `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub points: Vec<(u64, f64)>,
    /// Maximum over the last half of the schedule.
    pub estimate: f64,
}

/// Upper W-density estimated as the running maximum over the tail of an
/// increasing schedule of `N`.
///
/// Sums start at `positivity_start` and are normalized by `W(N) − W(start)`,
/// which has the same limsup as `1/W(N)` and gives exactly 1 for `R = ℕ`.
pub fn upper_w_density(r: &SubsetOfNaturals, w: &WeightScheme, n_schedule: &[u64]) -> Result<DensityReport> {
    if n_schedule.is_empty() {
        return Err(Error::arg("empty N schedule"));
    }
    if n_schedule.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::arg("N schedule must increase strictly"));
    }
    let s = w.positivity_start();
    let mut acc = KahanSum::new();
    let mut total = KahanSum::new();
    let mut points = Vec::with_capacity(n_schedule.len());
    let mut k = s;
    for &n in n_schedule {
        if n <= s {
            return Err(Error::DegenerateWindow { m: s, n, span: w.span(s, n) });
        }
        while k < n {
            let dw = w.increment(k);
            if r.contains(k) {
                acc.add(dw);
            }
            total.add(dw);
            k += 1;
        }
        points.push((n, acc.value() / total.value()));
    }
    let tail = &points[points.len() / 2..];
    let estimate = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(DensityReport { points, estimate })
}

/// `[min, max]` of `riesz_mean(1_E)` over the schedule windows.
pub fn banach_w_density(e: &SubsetOfNaturals, w: &WeightScheme, schedule: &WindowSchedule) -> Result<(f64, f64)> {
    let values = schedule
        .windows()
        .par_iter()
        .map(|&(m, n)| riesz_mean_real(|k| if e.contains(k) { 1.0 } else { 0.0 }, w, m, n))
        .collect::<Result<Vec<_>>>()?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of probing W-syndeticity on finitely many windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyndeticReport {
    pub verdict: Verdict,
    pub l: f64,
    pub windows_checked: usize,
    /// First window whose mass is below 1.
    pub witness: Option<[u64; 2]>,
    pub min_mass: f64,
}

/// Checks `Σ_{n∈R∩[M,N]} ΔW(n) >= 1` on each probe window `[M, N]`.
pub fn w_syndetic_check(r: &SubsetOfNaturals, w: &WeightScheme, l: f64, probes: &[(u64, u64)]) -> Result<SyndeticReport> {
    for &(m, n) in probes {
        let span = w.span(m, n);
        if m < w.positivity_start() || n < m || span < l {
            return Err(Error::arg(format!(
                "probe window [{m}, {n}] has span {span} below l = {l}"
            )));
        }
    }
    let masses: Vec<f64> = probes
        .par_iter()
        .map(|&(m, n)| {
            let mut acc = KahanSum::new();
            for k in m..=n {
                if r.contains(k) {
                    acc.add(w.increment(k));
                }
            }
            acc.value()
        })
        .collect();
    let witness = probes.iter().zip(&masses).find(|(_, &mass)| mass < 1.0).map(|(&(m, n), _)| [m, n]);
    Ok(SyndeticReport {
        verdict: if witness.is_none() { Verdict::Pass } else { Verdict::Fail },
        l,
        windows_checked: probes.len(),
        witness,
        min_mass: masses.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// `count` seeded windows inside `[lo, hi]` whose spans cycle through
/// `l, 2l, 4l`; each is the shortest window from its start reaching the span.
pub fn probe_windows(w: &WeightScheme, l: f64, count: usize, lo: u64, hi: u64, seed: u64) -> Result<Vec<(u64, u64)>> {
    let lo = lo.max(w.positivity_start());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let target = l * [1.0, 2.0, 4.0][i % 3];
        if w.span(lo, hi) < target {
            return Err(Error::arg(format!("[{lo}, {hi}] has W-span below {target}")));
        }
        // largest start that still reaches the target before hi
        let (mut a, mut b) = (lo, hi);
        while a < b {
            let mid = a + (b - a).div_ceil(2);
            if w.span(mid, hi) >= target {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        let m = rng.random_range(lo..=a);
        let n = w.first_reaching(m, target, hi).expect("start chosen to reach the target");
        out.push((m, n));
    }
    Ok(out)
}

/// A maximal run `[start, start+len)` of consecutive members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub start: u64,
    pub len: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThicknessReport {
    pub verdict: Verdict,
    pub min_length: u64,
    pub runs: Vec<Run>,
    pub longest: Option<Run>,
}

/// Maximal runs of length at least `L` inside `[from, to]`.
pub fn runs_in(r: &SubsetOfNaturals, min_length: u64, from: u64, to: u64) -> Result<ThicknessReport> {
    if min_length == 0 {
        return Err(Error::arg("run length L must be at least 1"));
    }
    let mut runs = Vec::new();
    let mut longest: Option<Run> = None;
    let mut current: Option<u64> = None;
    let mut close = |start: u64, end: u64, runs: &mut Vec<Run>| {
        let run = Run { start, len: end - start };
        if longest.map_or(true, |l| run.len > l.len) {
            longest = Some(run);
        }
        if run.len >= min_length {
            runs.push(run);
        }
    };
    for n in from..=to {
        match (r.contains(n), current) {
            (true, None) => current = Some(n),
            (false, Some(s)) => {
                close(s, n, &mut runs);
                current = None;
            }
            _ => {}
        }
    }
    if let Some(s) = current {
        close(s, to + 1, &mut runs);
    }
    Ok(ThicknessReport {
        verdict: if runs.is_empty() { Verdict::Fail } else { Verdict::Pass },
        min_length,
        runs,
        longest,
    })
}

/// Runs of length at least `L` in `[1, horizon]`; passes iff one exists.
pub fn thickness_check(r: &SubsetOfNaturals, min_length: u64, horizon: u64) -> Result<ThicknessReport> {
    runs_in(r, min_length, 1, horizon)
}

/// Default run-length target: `2·⌊log₁₀ horizon⌋`, i.e. 10 at `10⁵`.
pub fn default_run_length(horizon: u64) -> u64 {
    2 * (horizon.max(1) as f64).log10().floor() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FolnerReport {
    /// Best window of each requested length and its mean `|x_n − L|`.
    pub windows: Vec<([u64; 2], f64)>,
    pub hypothesis_met: bool,
    pub thickness: Option<ThicknessReport>,
}

/// For each length, the window inside `[1, scan_end]` minimizing the mean of
/// `|x_n − L|`. The hypothesis is met when the mean on the longest window is
/// below `ε/4`; then `E = {x_n > L − ε}` is scanned for a run of
/// `run_length` inside that window.
pub fn thick_from_folner<X>(
    x: X,
    target: f64,
    eps: f64,
    lengths: &[u64],
    scan_end: u64,
    run_length: u64,
) -> Result<FolnerReport>
where
    X: Fn(u64) -> f64 + Send + Sync,
{
    if !(eps > 0.0) {
        return Err(Error::arg("ε must be positive"));
    }
    if lengths.is_empty() || lengths.iter().any(|&l| l == 0 || l > scan_end) {
        return Err(Error::arg("window lengths must lie in [1, scan_end]"));
    }
    let values: Vec<f64> = (1..=scan_end).into_par_iter().map(&x).collect();
    let mut prefix = Vec::with_capacity(values.len() + 1);
    let mut acc = KahanSum::new();
    prefix.push(0.0);
    for v in &values {
        acc.add((v - target).abs());
        prefix.push(acc.value());
    }
    let mut windows = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let len = len as usize;
        let mut best = (0usize, f64::INFINITY);
        for a in 0..=values.len() - len {
            let mean = (prefix[a + len] - prefix[a]) / len as f64;
            if mean < best.1 {
                best = (a, mean);
            }
        }
        windows.push(([best.0 as u64 + 1, (best.0 + len) as u64], best.1));
    }
    let &(last, mean) = windows.last().expect("lengths non-empty");
    let hypothesis_met = mean < eps / 4.0;
    let thickness = if hypothesis_met {
        let e = SubsetOfNaturals::mask(1, values.iter().map(|v| *v > target - eps).collect());
        Some(runs_in(&e, run_length, last[0], last[1])?)
    } else {
        None
    };
    Ok(FolnerReport {
        windows,
        hypothesis_met,
        thickness,
    })
}
