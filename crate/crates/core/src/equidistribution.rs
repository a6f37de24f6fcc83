//! Weyl sums along Riesz means, the explicit van der Corput bound, Haar
//! integrals on one-parameter subgroups of `T²`, and well-distribution
//! reports for sequences built from `f`, its differences and its floor.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CatalogFunction;
use crate::difference::{floor_to_i64, reverse_weights};
use crate::error::{Error, Result};
use crate::number::{frac, small_parts, KahanSum, Real};
use crate::riesz::{WeightScheme, WindowSchedule};

/// `e(θ) = exp(2πiθ)`, reducing `θ` mod 1 first.
#[inline]
pub fn e(theta: f64) -> Complex64 {
    let t = frac(theta);
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// A point of `T^d` with coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TorusPoint(coords.into_iter().map(frac).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A character `x ↦ e(⟨x, τ⟩)` with `τ ∈ ℤ^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TorusCharacter(pub Vec<i64>);

impl TorusCharacter {
    pub fn new(tau: Vec<i64>) -> Self {
        TorusCharacter(tau)
    }

    pub fn tau(&self) -> &[i64] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&t| t == 0)
    }

    /// Phase `⟨x, τ⟩ mod 1`.
    #[inline]
    pub fn phase(&self, coords: &[f64]) -> f64 {
        let mut s = 0.0;
        for (t, x) in self.0.iter().zip(coords) {
            s += frac(*t as f64 * x);
        }
        frac(s)
    }

    pub fn eval(&self, coords: &[f64]) -> Complex64 {
        e(self.phase(coords))
    }
}

/// All characters of `T^d` with every `|τ_j| <= bound`, in lexicographic order.
pub fn characters_up_to(d: usize, bound: i64) -> Vec<TorusCharacter> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |t| {
                    let mut w = v.clone();
                    w.push(t);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(TorusCharacter).collect()
}

/// `{(x, αx)}` inside `T²`: a closed circle when `α = a/b`, all of `T²`
/// when `α` is declared irrational.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SlopedSubgroup {
    Rational { a: i64, b: i64 },
    Irrational { value: f64 },
}

impl SlopedSubgroup {
    pub fn from_real(alpha: &Real) -> Result<Self> {
        match alpha.as_rational() {
            Some(r) => {
                let (a, b) = small_parts(r).ok_or_else(|| Error::Range(format!("slope {r} too large")))?;
                Ok(SlopedSubgroup::Rational { a, b })
            }
            None => Ok(SlopedSubgroup::Irrational { value: alpha.to_f64() }),
        }
    }

    pub fn rational(a: i64, b: i64) -> Result<Self> {
        SlopedSubgroup::from_real(&Real::rational(a, b))
    }

    /// Whether `e(τ_x x + τ_y y)` is constant (hence 1) on the subgroup.
    pub fn annihilated_by(&self, tx: i64, ty: i64) -> bool {
        match *self {
            SlopedSubgroup::Rational { a, b } => b as i128 * tx as i128 + a as i128 * ty as i128 == 0,
            SlopedSubgroup::Irrational { .. } => tx == 0 && ty == 0,
        }
    }
}

/// Integral of `ψ` against the normalized Haar measure of `H`.
///
/// Rational slope `a/b`: composite midpoint rule for
/// `(1/b)∫_0^b ψ({x}, {ax/b}) dx` with cells split where either coordinate
/// wraps, nodes spread in proportion to cell length. Irrational slope:
/// midpoint product rule on `T²` with `⌈√resolution⌉` nodes per axis.
pub fn haar_integral<P>(h: &SlopedSubgroup, psi: P, resolution: usize) -> Result<Complex64>
where
    P: Fn(f64, f64) -> Complex64 + Sync,
{
    if resolution == 0 {
        return Err(Error::arg("quadrature resolution must be positive"));
    }
    match *h {
        SlopedSubgroup::Rational { a, b } => {
            if b <= 0 {
                return Err(Error::arg("slope denominator must be positive"));
            }
            // breakpoints k (x wraps) and k·b/a (y wraps), as fractions of b
            let mut cuts: Vec<(i64, i64)> = (0..=b).map(|k| (k, b)).collect();
            let aa = a.unsigned_abs() as i64;
            cuts.extend((0..=aa).map(|k| (k, aa.max(1))));
            let mut pts: Vec<f64> = cuts.iter().map(|&(p, q)| p as f64 / q as f64).collect();
            pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            pts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
            let slope = a as f64 / b as f64;
            let bf = b as f64;
            let cells: Vec<(f64, f64)> = pts.windows(2).map(|p| (p[0] * bf, p[1] * bf)).collect();
            let sums: Vec<(f64, f64)> = cells
                .par_iter()
                .map(|&(lo, hi)| {
                    let len = hi - lo;
                    let k = ((resolution as f64 * len / bf).round() as usize).max(1);
                    let step = len / k as f64;
                    let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
                    for j in 0..k {
                        let x = lo + (j as f64 + 0.5) * step;
                        let v = psi(frac(x), frac(slope * x));
                        re.add(v.re * step);
                        im.add(v.im * step);
                    }
                    (re.value(), im.value())
                })
                .collect();
            let re: KahanSum = sums.iter().map(|s| s.0).collect();
            let im: KahanSum = sums.iter().map(|s| s.1).collect();
            Ok(Complex64::new(re.value() / bf, im.value() / bf))
        }
        SlopedSubgroup::Irrational { .. } => {
            let k = (resolution as f64).sqrt().ceil() as usize;
            let step = 1.0 / k as f64;
            let rows: Vec<Complex64> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let x = (i as f64 + 0.5) * step;
                    let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
                    for j in 0..k {
                        let v = psi(x, (j as f64 + 0.5) * step);
                        re.add(v.re);
                        im.add(v.im);
                    }
                    Complex64::new(re.value(), im.value())
                })
                .collect();
            let re: KahanSum = rows.iter().map(|z| z.re).collect();
            let im: KahanSum = rows.iter().map(|z| z.im).collect();
            let n = (k * k) as f64;
            Ok(Complex64::new(re.value() / n, im.value() / n))
        }
    }
}

/// Orbit closure of `n ↦ nα` in `T^d`.
///
/// Coordinates declared irrational are treated as rationally independent of
/// each other and of 1; rational coordinates are exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KroneckerGroup {
    alpha: Vec<Real>,
}

impl KroneckerGroup {
    pub fn new(alpha: Vec<Real>) -> Self {
        KroneckerGroup { alpha }
    }

    pub fn alpha(&self) -> &[Real] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// `⟨α, τ⟩ ∈ ℤ`, i.e. the character is trivial on `K`.
    pub fn annihilated_by(&self, tau: &[i64]) -> bool {
        let mut rational_part = num_rational::BigRational::zero();
        for (a, &t) in self.alpha.iter().zip(tau) {
            match a.as_rational() {
                Some(r) => rational_part += r * num_rational::BigRational::from_integer(t.into()),
                None if t != 0 => return false,
                None => {}
            }
        }
        rational_part.is_integer()
    }
}

/// Riesz mean of `n ↦ e(⟨x(n), τ⟩)` over `[M, N)`; exactly 1 for `τ = 0`.
pub fn weyl_sum<X>(x: X, tau: &TorusCharacter, w: &WeightScheme, m: u64, n: u64) -> Result<Complex64>
where
    X: Fn(u64) -> TorusPoint,
{
    if tau.is_trivial() {
        crate::riesz::riesz_mean_real(|_| 1.0, w, m, n)?;
        return Ok(Complex64::new(1.0, 0.0));
    }
    crate::riesz::riesz_mean(|k| tau.eval(x(k).coords()), w, m, n)
}

/// Riesz means of several characters in one pass over `[M, N)`.
///
/// `x(n, buf)` writes the coordinates of the `n`-th point into `buf`.
pub fn character_means<X>(x: &X, dim: usize, chars: &[TorusCharacter], w: &WeightScheme, m: u64, n: u64) -> Result<Vec<Complex64>>
where
    X: Fn(u64, &mut [f64]),
{
    let span = w.span(m, n);
    if m < w.positivity_start() || n <= m || !(span > 0.0) {
        return Err(Error::DegenerateWindow { m, n, span });
    }
    let mut re = vec![KahanSum::new(); chars.len()];
    let mut im = vec![KahanSum::new(); chars.len()];
    let mut total = KahanSum::new();
    let mut buf = vec![0.0; dim];
    for k in m..n {
        let dw = w.increment(k);
        x(k, &mut buf);
        for (j, c) in chars.iter().enumerate() {
            if c.is_trivial() {
                continue;
            }
            let z = c.eval(&buf);
            re[j].add(dw * z.re);
            im[j].add(dw * z.im);
        }
        total.add(dw);
    }
    let t = total.value();
    Ok(chars
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if c.is_trivial() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(re[j].value() / t, im[j].value() / t)
            }
        })
        .collect())
}

/// Pass tolerance by window span: 0.02 from `10⁵`, else 0.05.
pub fn default_tolerance(span: f64) -> f64 {
    if span >= 1e5 {
        0.02
    } else {
        0.05
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WdRow {
    pub character: Vec<i64>,
    pub expected: f64,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub span: f64,
    pub window: [u64; 2],
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WdReport {
    pub rows: Vec<WdRow>,
    pub pass: bool,
}

impl WdReport {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.error).fold(0.0, f64::max)
    }
}

/// Compares character averages with their expected Haar values on every
/// window in the last third of the schedule.
///
/// `tolerance = None` selects [`default_tolerance`] per window.
pub fn wd_report<X>(
    x: X,
    dim: usize,
    w: &WeightScheme,
    characters: &[TorusCharacter],
    schedule: &WindowSchedule,
    expected: &[f64],
    tolerance: Option<f64>,
) -> Result<WdReport>
where
    X: Fn(u64, &mut [f64]) + Sync,
{
    if characters.len() != expected.len() {
        return Err(Error::arg("one expected value per character is required"));
    }
    if let Some(c) = characters.iter().find(|c| c.tau().len() != dim) {
        return Err(Error::arg(format!("character {:?} does not have dimension {dim}", c.tau())));
    }
    let tail = schedule.tail_indices();
    let windows = &schedule.windows()[tail.clone()];
    let spans = &schedule.spans()[tail];
    let means = windows
        .par_iter()
        .map(|&(m, n)| character_means(&x, dim, characters, w, m, n))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (c, (ch, &exp)) in characters.iter().zip(expected).enumerate() {
        for ((win, &span), vals) in windows.iter().zip(spans).zip(&means) {
            let z = vals[c];
            let error = (z - Complex64::new(exp, 0.0)).norm();
            let tol = tolerance.unwrap_or_else(|| default_tolerance(span));
            rows.push(WdRow {
                character: ch.tau().to_vec(),
                expected: exp,
                estimate_re: z.re,
                estimate_im: z.im,
                span,
                window: [win.0, win.1],
                error,
                tolerance: tol,
                pass: error < tol,
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(WdReport { rows, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VdcCertificate {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|(1/N)Σu_n|` against
/// `2/√N + sqrt(1/√N + (2/√N) Σ_{1<=m<=√N} |(1/(N−m)) Σ_{n<=N−m} u_{n+m} conj(u_n)|)`.
pub fn vdc_certificate(u: &[Complex64]) -> Result<VdcCertificate> {
    let n = u.len();
    if n < 4 {
        return Err(Error::arg(format!("van der Corput bound needs N >= 4, got {n}")));
    }
    if let Some((i, z)) = u.iter().enumerate().find(|(_, z)| z.norm() > 1.0 + 1e-12) {
        return Err(Error::arg(format!("|u_{}| = {} exceeds 1", i + 1, z.norm())));
    }
    let nf = n as f64;
    let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
    for z in u {
        re.add(z.re);
        im.add(z.im);
    }
    let lhs = Complex64::new(re.value(), im.value()).norm() / nf;
    let root = nf.sqrt();
    let hmax = root.floor() as usize;
    let mut corr = KahanSum::new();
    for m in 1..=hmax {
        let (mut cr, mut ci) = (KahanSum::new(), KahanSum::new());
        for k in 0..n - m {
            let z = u[k + m] * u[k].conj();
            cr.add(z.re);
            ci.add(z.im);
        }
        corr.add(Complex64::new(cr.value(), ci.value()).norm() / (n - m) as f64);
    }
    let rhs = 2.0 / root + (1.0 / root + 2.0 / root * corr.value()).sqrt();
    Ok(VdcCertificate {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
    })
}

/// A character of `(K × T)^{ℓ+1}`: `τ_i ∈ ℤ^d` on `αΔ^i g` and `h_i ∈ ℤ`
/// on `Δ^i f`, for `i = 0..=ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JointCharacter {
    pub tau: Vec<Vec<i64>>,
    pub h: Vec<i64>,
}

impl JointCharacter {
    /// Flattened as `(τ_0, h_0, τ_1, h_1, …)`, matching [`joint_point`].
    pub fn flatten(&self) -> TorusCharacter {
        let mut v = Vec::new();
        for (t, h) in self.tau.iter().zip(&self.h) {
            v.extend_from_slice(t);
            v.push(*h);
        }
        TorusCharacter(v)
    }

    /// Haar value on `(K × T)^{ℓ+1}`: 1 iff every `⟨α, τ_i⟩ ∈ ℤ` and every
    /// `h_i = 0`.
    pub fn expected(&self, k: &KroneckerGroup) -> f64 {
        let trivial = self.tau.iter().all(|t| k.annihilated_by(t)) && self.h.iter().all(|&h| h == 0);
        if trivial {
            1.0
        } else {
            0.0
        }
    }
}

/// Writes `(α_j Δ^i g(n) mod 1 for j, Δ^i f(n) mod 1)_{i=0..=ℓ}` into `buf`.
pub fn joint_point(f: &CatalogFunction, level: u32, alpha: &[Real], n: u64, buf: &mut [f64]) -> Result<()> {
    let d = alpha.len();
    let mut g = Vec::with_capacity(level as usize + 1);
    for j in 0..=level as u64 {
        g.push(floor_to_i64(f.eval(n + j))? as i128);
    }
    for i in 0..=level {
        let w = reverse_weights(i)?;
        let dg: i128 = w.iter().zip(&g).map(|(a, b)| a * b).sum();
        let dg = i64::try_from(dg).map_err(|_| Error::Range("floor difference overflow".into()))?;
        let base = i as usize * (d + 1);
        for (j, a) in alpha.iter().enumerate() {
            buf[base + j] = a.frac_mul(dg);
        }
        buf[base + d] = frac(f.delta(i, n)?);
    }
    Ok(())
}

/// Well-distribution report for `G(n) = (αΔ^i g(n), Δ^i f(n))_{i<=ℓ}` with
/// `W = Δ^ℓ f`, against the Haar values of `(K × T)^{ℓ+1}`.
pub fn joint_floor_fraction_report(
    f: &CatalogFunction,
    level: u32,
    alpha: &[Real],
    characters: &[JointCharacter],
    schedule: &WindowSchedule,
    w: &WeightScheme,
    tolerance: Option<f64>,
) -> Result<WdReport> {
    let d = alpha.len();
    let dim = (level as usize + 1) * (d + 1);
    for c in characters {
        if c.tau.len() != level as usize + 1 || c.h.len() != level as usize + 1 || c.tau.iter().any(|t| t.len() != d) {
            return Err(Error::arg("joint character shape does not match (ℓ+1) × (d+1)"));
        }
    }
    let k = KroneckerGroup::new(alpha.to_vec());
    let flat: Vec<TorusCharacter> = characters.iter().map(JointCharacter::flatten).collect();
    let expected: Vec<f64> = characters.iter().map(|c| c.expected(&k)).collect();
    let alpha = alpha.to_vec();
    let f2 = f.clone();
    let x = move |n: u64, buf: &mut [f64]| {
        if joint_point(&f2, level, &alpha, n, buf).is_err() {
            buf.iter_mut().for_each(|v| *v = f64::NAN);
        }
    };
    let report = wd_report(x, dim, w, &flat, schedule, &expected, tolerance)?;
    if report.rows.iter().any(|r| r.estimate_re.is_nan()) {
        return Err(Error::Range(format!("`{}` left the exactly representable range", f.label())));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_character_is_exactly_one() {
        let w = WeightScheme::sqrt();
        let z = weyl_sum(|n| TorusPoint::new(vec![(n as f64).sqrt()]), &TorusCharacter::new(vec![0]), &w, 5, 500).unwrap();
        assert_eq!(z, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn thirds_with_tau_three() {
        let w = WeightScheme::identity();
        let z = weyl_sum(|n| TorusPoint::new(vec![n as f64 / 3.0]), &TorusCharacter::new(vec![3]), &w, 1, 3000).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn sqrt_phase_decays() {
        let w = WeightScheme::sqrt();
        let m = 1_000_000u64;
        let n = w.first_reaching(m, 1000.0, 10_000_000).unwrap();
        let z = weyl_sum(|k| TorusPoint::new(vec![(k as f64).sqrt()]), &TorusCharacter::new(vec![1]), &w, m, n).unwrap();
        assert!(z.norm() < 0.05, "{z}");
    }

    #[test]
    fn haar_examples() {
        let h = SlopedSubgroup::rational(1, 2).unwrap();
        let one = haar_integral(&h, |_, _| Complex64::new(1.0, 0.0), 1000).unwrap();
        assert!((one.re - 1.0).abs() < 1e-12);
        let z = haar_integral(&h, |x, _| e(x), 100_000).unwrap();
        assert!(z.norm() < 1e-6);
        let z = haar_integral(&h, |x, y| e(2.0 * y - x), 100_000).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(h.annihilated_by(-1, 2));
        assert!(haar_integral(&h, |_, _| Complex64::new(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn haar_irrational_is_full_torus() {
        let h = SlopedSubgroup::Irrational { value: std::f64::consts::SQRT_2 };
        let z = haar_integral(&h, |x, y| e(x + y), 10_000).unwrap();
        assert!(z.norm() < 1e-9);
        assert!(!h.annihilated_by(1, 0));
    }

    #[test]
    fn kronecker_annihilator() {
        let k = KroneckerGroup::new(vec![Real::rational(1, 2), Real::parse("sqrt2").unwrap()]);
        assert!(k.annihilated_by(&[2, 0]));
        assert!(!k.annihilated_by(&[1, 0]));
        assert!(!k.annihilated_by(&[2, 1]));
    }

    #[test]
    fn vdc_constant() {
        let u = vec![Complex64::new(1.0, 0.0); 64];
        let c = vdc_certificate(&u).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-12 && c.holds);
        assert!(vdc_certificate(&u[..3]).is_err());
        assert!(vdc_certificate(&[Complex64::new(2.0, 0.0); 8]).is_err());
    }

    #[test]
    fn characters_enumeration() {
        let c = characters_up_to(2, 1);
        assert_eq!(c.len(), 9);
        assert_eq!(c[0].tau(), &[-1, -1]);
    }

    #[test]
    fn joint_expected_values() {
        let k = KroneckerGroup::new(vec![Real::rational(1, 2)]);
        let triv = JointCharacter { tau: vec![vec![0], vec![0]], h: vec![0, 0] };
        assert_eq!(triv.expected(&k), 1.0);
        let c = JointCharacter { tau: vec![vec![1], vec![0]], h: vec![0, 0] };
        assert_eq!(c.expected(&k), 0.0);
        let c = JointCharacter { tau: vec![vec![2], vec![0]], h: vec![0, 1] };
        assert_eq!(c.expected(&k), 0.0);
        let c = JointCharacter { tau: vec![vec![2], vec![4]], h: vec![0, 0] };
        assert_eq!(c.expected(&k), 1.0);
    }
}
