//! Bookkeeping for the family `S(f)` of rational combinations
//! `Σ c_i Δ^i f + β` (β decaying), their degrees, characteristic vectors and
//! the van der Corput step used in the PET induction.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::catalog::CatalogFunction;
use crate::difference::{binomial, reverse_weights};
use crate::error::{Error, Result};

type Eval = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// `Σ_{i=0}^{ℓ} c_i Δ^i f + β` for a base `f ∈ F_{ℓ+1}`.
///
/// The element keeps its full value as a closure; the perturbation is
/// whatever remains after subtracting the coefficient part and is assumed
/// to tend to zero.
#[derive(Clone)]
pub struct SFamilyElement {
    base: CatalogFunction,
    coefficients: Vec<BigRational>,
    eval: Eval,
}

impl fmt::Debug for SFamilyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        write!(f, "S({})[{}]", self.base.label(), c.join(", "))
    }
}

fn difference_eval(base: &CatalogFunction, coefficients: &[BigRational]) -> Result<Eval> {
    let weights: Vec<(f64, Vec<i128>)> = coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| Ok((crate::number::rational_to_f64(c), reverse_weights(i as u32)?)))
        .collect::<Result<_>>()?;
    let f = base.clone();
    Ok(Arc::new(move |n| {
        weights
            .iter()
            .map(|(c, w)| {
                let d: f64 = w.iter().enumerate().map(|(j, wj)| *wj as f64 * f.eval(n + j as u64)).sum();
                c * d
            })
            .sum()
    }))
}

impl SFamilyElement {
    /// Builds `Σ c_i Δ^i f + β`. `coefficients` may be shorter than `ℓ+1`
    /// (missing entries are zero) but not longer, and not all zero.
    pub fn new(
        base: &CatalogFunction,
        coefficients: Vec<BigRational>,
        perturbation: Option<crate::difference::RealSequence>,
    ) -> Result<Self> {
        let len = base.level() as usize + 1;
        if coefficients.len() > len {
            return Err(Error::arg(format!(
                "{} coefficients given for a base of level {} (at most {len})",
                coefficients.len(),
                base.level()
            )));
        }
        if coefficients.iter().all(Zero::is_zero) {
            return Err(Error::arg("S(f) element needs a nonzero coefficient"));
        }
        let mut coefficients = coefficients;
        coefficients.resize(len, BigRational::zero());
        let main = difference_eval(base, &coefficients)?;
        let eval: Eval = match perturbation {
            None => main,
            Some(beta) => Arc::new(move |n| main(n) + beta.eval_unchecked(n)),
        };
        Ok(SFamilyElement {
            base: base.clone(),
            coefficients,
            eval,
        })
    }

    /// Convenience constructor from small integer fractions `(num, den)`.
    pub fn from_fractions(base: &CatalogFunction, coefficients: &[(i64, i64)]) -> Result<Self> {
        let c = coefficients
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    Err(Error::arg("zero denominator"))
                } else {
                    Ok(BigRational::new(p.into(), q.into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        SFamilyElement::new(base, c, None)
    }

    pub fn base(&self) -> &CatalogFunction {
        &self.base
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn eval(&self, n: u64) -> f64 {
        (self.eval)(n)
    }

    /// `Δ^{ℓ+1}`-truncated expansion of `e(n + m)`.
    fn shifted_coefficients(&self, m: u64) -> Result<Vec<BigRational>> {
        let len = self.coefficients.len();
        let mut out = vec![BigRational::zero(); len];
        let m = u32::try_from(m).map_err(|_| Error::Range(format!("shift {m} too large")))?;
        for (t, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, slot) in out.iter_mut().enumerate().skip(t) {
                let k = (j - t) as u32;
                if k > m {
                    break;
                }
                let b = binomial(m, k)?;
                *slot += c * BigRational::from_integer(b.into());
            }
        }
        Ok(out)
    }
}

/// Degree `ℓ+1 − min{i : c_i ≠ 0}` and the coefficient at that index.
pub fn sfamily_degree(e: &SFamilyElement) -> Result<(u32, BigRational)> {
    degree_of(&e.coefficients)
        .ok_or_else(|| Error::arg("S(f) element with all coefficients zero has no degree"))
}

fn degree_of(c: &[BigRational]) -> Option<(u32, BigRational)> {
    let i = c.iter().position(|x| !x.is_zero())?;
    Some(((c.len() - i) as u32, c[i].clone()))
}

/// Counts `m_1, …, m_{ℓ+1}` of equivalence classes per degree.
///
/// Ordered by the largest index at which two vectors differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacteristicVector(pub Vec<usize>);

impl CharacteristicVector {
    pub fn counts(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for CharacteristicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl PartialOrd for CharacteristicVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CharacteristicVector {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.0.len().max(other.0.len());
        for j in (0..len).rev() {
            let a = self.0.get(j).copied().unwrap_or(0);
            let b = other.0.get(j).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

fn check_same_base(p: &[SFamilyElement]) -> Result<&CatalogFunction> {
    let first = p.first().ok_or_else(|| Error::arg("family is empty"))?;
    if let Some(e) = p.iter().find(|e| e.base != first.base) {
        return Err(Error::arg(format!(
            "family mixes bases `{}` and `{}`",
            first.base.label(),
            e.base.label()
        )));
    }
    Ok(&first.base)
}

fn vector_of(level: u32, coefficient_sets: &[Vec<BigRational>]) -> CharacteristicVector {
    let classes: BTreeSet<(u32, BigRational)> =
        coefficient_sets.iter().filter_map(|c| degree_of(c)).collect();
    let mut counts = vec![0; level as usize + 1];
    for (d, _) in classes {
        counts[d as usize - 1] += 1;
    }
    CharacteristicVector(counts)
}

/// Characteristic vector of a non-empty family over a single base.
pub fn characteristic_vector(p: &[SFamilyElement]) -> Result<CharacteristicVector> {
    let base = check_same_base(p)?;
    let sets: Vec<Vec<BigRational>> = p.iter().map(|e| e.coefficients.clone()).collect();
    Ok(vector_of(base.level(), &sets))
}

/// One van der Corput step: with `f_1 = P[pivot]` of minimal degree, returns
/// `{f_i(·+m) − f_1}` for all `i` together with `{f_i − f_1}` for `i ≠ pivot`,
/// dropping members whose coefficient part vanishes (they tend to zero).
///
/// Terms of order `ℓ+1` and higher produced by the shift are absorbed into the
/// perturbation; the returned elements still evaluate exactly to
/// `f_i(n+m) − f_1(n)`.
pub fn vdc_transform(p: &[SFamilyElement], pivot: usize, m: u64) -> Result<Vec<SFamilyElement>> {
    let base = check_same_base(p)?;
    if m == 0 {
        return Err(Error::arg("shift m must be at least 1"));
    }
    let pivot_el = p
        .get(pivot)
        .ok_or_else(|| Error::arg(format!("pivot {pivot} out of range for family of size {}", p.len())))?;
    let (pivot_degree, _) = sfamily_degree(pivot_el)?;
    for e in p {
        let (d, _) = sfamily_degree(e)?;
        if d < pivot_degree {
            return Err(Error::arg(format!(
                "pivot has degree {pivot_degree} but the family contains degree {d}"
            )));
        }
    }

    let mut out = Vec::with_capacity(2 * p.len());
    let sub = |a: &[BigRational], b: &[BigRational]| -> Vec<BigRational> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    };
    let push = |out: &mut Vec<SFamilyElement>, coefficients: Vec<BigRational>, eval: Eval| {
        if coefficients.iter().any(|c| !c.is_zero()) {
            out.push(SFamilyElement {
                base: base.clone(),
                coefficients,
                eval,
            });
        }
    };
    for e in p {
        let c = sub(&e.shifted_coefficients(m)?, &pivot_el.coefficients);
        let (fi, f1) = (e.eval.clone(), pivot_el.eval.clone());
        push(&mut out, c, Arc::new(move |n| fi(n + m) - f1(n)));
    }
    for (i, e) in p.iter().enumerate() {
        if i == pivot {
            continue;
        }
        let c = sub(&e.coefficients, &pivot_el.coefficients);
        let (fi, f1) = (e.eval.clone(), pivot_el.eval.clone());
        push(&mut out, c, Arc::new(move |n| fi(n) - f1(n)));
    }
    Ok(out)
}

/// Index of the first element of minimal degree.
pub fn lowest_degree_index(p: &[SFamilyElement]) -> Result<usize> {
    let mut best: Option<(u32, usize)> = None;
    for (i, e) in p.iter().enumerate() {
        let (d, _) = sfamily_degree(e)?;
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i).ok_or_else(|| Error::arg("family is empty"))
}

/// All indices whose element has minimal degree.
pub fn valid_pivots(p: &[SFamilyElement]) -> Result<Vec<usize>> {
    let degrees = p
        .iter()
        .map(|e| sfamily_degree(e).map(|(d, _)| d))
        .collect::<Result<Vec<_>>>()?;
    let min = degrees.iter().copied().min().ok_or_else(|| Error::arg("family is empty"))?;
    Ok((0..p.len()).filter(|&i| degrees[i] == min).collect())
}

/// Helper for building the identity coefficient vector `(1, 0, …)`.
pub fn unit(index: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); index + 1];
    v[index] = BigRational::one();
    v
}

/// A random family of 1 to 5 elements over `base`. Leading coefficients are
/// drawn from a small pool so that equivalent elements occur often.
pub fn random_family<R: Rng>(base: &CatalogFunction, rng: &mut R) -> Result<Vec<SFamilyElement>> {
    const LEADING: [(i64, i64); 4] = [(1, 1), (2, 1), (-1, 1), (1, 2)];
    let len = base.level() as usize + 1;
    let size = rng.random_range(1..=5);
    (0..size)
        .map(|_| {
            let first = rng.random_range(0..len);
            let mut c = vec![BigRational::zero(); len];
            let (p, q) = LEADING[rng.random_range(0..LEADING.len())];
            c[first] = BigRational::new(p.into(), q.into());
            for slot in c.iter_mut().skip(first + 1) {
                let p: i64 = rng.random_range(-3..=3);
                let q: i64 = rng.random_range(1..=3);
                *slot = BigRational::new(p.into(), q.into());
            }
            SFamilyElement::new(base, c, None)
        })
        .collect()
}

/// Before and after one van der Corput step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PetStep {
    pub before: CharacteristicVector,
    pub after: CharacteristicVector,
    pub pivot: usize,
    pub m: u64,
    pub size_before: usize,
    pub size_after: usize,
    pub decreased: bool,
}

/// Applies [`vdc_transform`] at the lowest-degree element. An empty result
/// has the zero vector.
pub fn pet_step(p: &[SFamilyElement], m: u64) -> Result<PetStep> {
    let before = characteristic_vector(p)?;
    let pivot = lowest_degree_index(p)?;
    let q = vdc_transform(p, pivot, m)?;
    let after = if q.is_empty() {
        CharacteristicVector(vec![0; before.0.len()])
    } else {
        characteristic_vector(&q)?
    };
    Ok(PetStep {
        decreased: after < before,
        before,
        after,
        pivot,
        m,
        size_before: p.len(),
        size_after: q.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::difference::RealSequence;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn f3() -> CatalogFunction {
        CatalogFunction::power(1.0, 2.5).unwrap()
    }

    #[test]
    fn degrees() {
        let f = f3();
        let e = SFamilyElement::from_fractions(&f, &[(1, 1)]).unwrap();
        assert_eq!(sfamily_degree(&e).unwrap(), (3, r(1, 1)));
        let e = SFamilyElement::from_fractions(&f, &[(0, 1), (5, 1)]).unwrap();
        assert_eq!(sfamily_degree(&e).unwrap(), (2, r(5, 1)));
        let e = SFamilyElement::from_fractions(&f, &[(1, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(sfamily_degree(&e).unwrap(), (3, r(1, 1)));
        assert!(SFamilyElement::from_fractions(&f, &[(0, 1)]).is_err());
        assert!(SFamilyElement::from_fractions(&f, &[(1, 1); 4]).is_err());
    }

    #[test]
    fn vectors() {
        let f = f3();
        let one = SFamilyElement::from_fractions(&f, &[(1, 1)]).unwrap();
        assert_eq!(characteristic_vector(&[one.clone()]).unwrap().0, vec![0, 0, 1]);
        let d1 = SFamilyElement::from_fractions(&f, &[(0, 1), (1, 1)]).unwrap();
        let d2 = SFamilyElement::from_fractions(&f, &[(0, 1), (2, 1)]).unwrap();
        let v = characteristic_vector(&[d1.clone(), d2, one]).unwrap();
        assert_eq!(v.0, vec![0, 2, 1]);
        let beta = RealSequence::new("1/n", 1, |n| 1.0 / n as f64);
        let d1b = SFamilyElement::new(&f, vec![r(0, 1), r(1, 1)], Some(beta)).unwrap();
        assert_eq!(characteristic_vector(&[d1, d1b]).unwrap().0, vec![0, 1, 0]);
    }

    #[test]
    fn mixed_bases_rejected() {
        let a = SFamilyElement::from_fractions(&f3(), &[(1, 1)]).unwrap();
        let g = CatalogFunction::power(1.0, 1.5).unwrap();
        let b = SFamilyElement::from_fractions(&g, &[(1, 1)]).unwrap();
        assert!(characteristic_vector(&[a, b]).is_err());
        assert!(characteristic_vector(&[]).is_err());
    }

    #[test]
    fn order_compares_from_top() {
        let a = CharacteristicVector(vec![1, 0]);
        let b = CharacteristicVector(vec![0, 1]);
        assert!(a < b);
        assert!(CharacteristicVector(vec![5, 0, 1]) < CharacteristicVector(vec![0, 1, 1]));
        assert_eq!(CharacteristicVector(vec![0, 1]).cmp(&CharacteristicVector(vec![0, 1, 0])), Ordering::Equal);
    }

    #[test]
    fn single_element_step() {
        let f = CatalogFunction::power(1.0, 1.5).unwrap();
        let p = vec![SFamilyElement::from_fractions(&f, &[(1, 1)]).unwrap()];
        let q = vdc_transform(&p, 0, 1).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(sfamily_degree(&q[0]).unwrap(), (1, r(1, 1)));
        assert_eq!(characteristic_vector(&q).unwrap().0, vec![1, 0]);
        assert!(characteristic_vector(&q).unwrap() < characteristic_vector(&p).unwrap());
        // value stays exact: f(n+1) - f(n)
        for n in [1u64, 10, 1000] {
            let direct = f.eval(n + 1) - f.eval(n);
            assert!((q[0].eval(n) - direct).abs() <= 1e-12 * direct.abs());
        }
    }

    #[test]
    fn two_elements_step() {
        let f = CatalogFunction::power(1.0, 1.5).unwrap();
        let p = vec![
            SFamilyElement::from_fractions(&f, &[(1, 1)]).unwrap(),
            SFamilyElement::from_fractions(&f, &[(2, 1)]).unwrap(),
        ];
        let before = characteristic_vector(&p).unwrap();
        assert_eq!(before.0, vec![0, 2]);
        let q = vdc_transform(&p, 0, 3).unwrap();
        let after = characteristic_vector(&q).unwrap();
        assert_eq!(after.0[1], 1);
        assert!(after < before);
    }

    #[test]
    fn equivalent_family_drops_degree() {
        let f = f3();
        let beta = RealSequence::new("1/n", 1, |n| 1.0 / n as f64);
        let p = vec![
            SFamilyElement::from_fractions(&f, &[(0, 1), (3, 2)]).unwrap(),
            SFamilyElement::new(&f, vec![r(0, 1), r(3, 2), r(7, 1)], Some(beta)).unwrap(),
        ];
        for m in 1..=3 {
            for e in vdc_transform(&p, 0, m).unwrap() {
                assert!(sfamily_degree(&e).unwrap().0 < 2);
            }
        }
    }

    #[test]
    fn pivot_must_be_lowest() {
        let f = f3();
        let p = vec![
            SFamilyElement::from_fractions(&f, &[(1, 1)]).unwrap(),
            SFamilyElement::from_fractions(&f, &[(0, 1), (1, 1)]).unwrap(),
        ];
        assert!(vdc_transform(&p, 0, 1).is_err());
        assert_eq!(lowest_degree_index(&p).unwrap(), 1);
        assert_eq!(valid_pivots(&p).unwrap(), vec![1]);
        assert!(vdc_transform(&p, 1, 1).is_ok());
        assert!(vdc_transform(&[], 0, 1).is_err());
    }
}
