//! Finite unions of half-open arcs `[l, r)` on the circle `[0, 1)`.

use crate::error::{Error, Result};
use crate::number::Scalar;

/// Sorted, disjoint, non-adjacent half-open arcs inside `[0, 1)`.
///
/// With `f64` endpoints, endpoints closer than `1e-12` are merged and arcs
/// shorter than that are dropped; with rational endpoints everything is
/// exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSet<S: Scalar> {
    arcs: Vec<(S, S)>,
}

fn max<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

fn min<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

impl<S: Scalar> ArcSet<S> {
    pub fn empty() -> Self {
        ArcSet { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        ArcSet {
            arcs: vec![(S::zero(), S::one())],
        }
    }

    fn normalize(mut v: Vec<(S, S)>) -> Self {
        let snap = S::snap();
        let one = S::one();
        for (l, r) in v.iter_mut() {
            if *l < snap {
                *l = S::zero();
            }
            if *r > one.clone() - snap.clone() {
                *r = one.clone();
            }
        }
        v.retain(|(l, r)| r.clone() - l.clone() > snap);
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("endpoints are comparable"));
        let mut out: Vec<(S, S)> = Vec::with_capacity(v.len());
        for (l, r) in v {
            match out.last_mut() {
                Some(last) if l <= last.1.clone() + snap.clone() => last.1 = max(&last.1, &r),
                _ => out.push((l, r)),
            }
        }
        ArcSet { arcs: out }
    }

    /// Arcs given as `(l, r)` with `0 <= l, r <= 1`; `r < l` wraps through 0
    /// and `l == r` is empty.
    pub fn from_arcs(arcs: Vec<(S, S)>) -> Result<Self> {
        let (zero, one) = (S::zero(), S::one());
        let mut v = Vec::with_capacity(arcs.len() + 1);
        for (l, r) in arcs {
            if l < zero || l > one || r < zero || r > one {
                return Err(Error::arg(format!("arc [{l:?}, {r:?}) is not inside [0, 1]")));
            }
            if l <= r {
                v.push((l, r));
            } else {
                v.push((l, one.clone()));
                v.push((zero.clone(), r));
            }
        }
        Ok(ArcSet::normalize(v))
    }

    /// The arc starting at `{start}` of length `len ∈ [0, 1]`.
    pub fn arc(start: S, len: S) -> Result<Self> {
        if len < S::zero() || len > S::one() {
            return Err(Error::arg(format!("arc length {len:?} outside [0, 1]")));
        }
        if len == S::one() {
            return Ok(ArcSet::full());
        }
        let l = start.frac();
        let r = l.clone() + len;
        if r <= S::one() {
            Ok(ArcSet::normalize(vec![(l, r)]))
        } else {
            Ok(ArcSet::normalize(vec![(l, S::one()), (S::zero(), r - S::one())]))
        }
    }

    pub fn arcs(&self) -> &[(S, S)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> S {
        self.arcs
            .iter()
            .fold(S::zero(), |acc, (l, r)| acc + (r.clone() - l.clone()))
    }

    pub fn contains(&self, x: &S) -> bool {
        let i = self.arcs.partition_point(|(l, _)| l <= x);
        i > 0 && *x < self.arcs[i - 1].1
    }

    /// Number of distinct endpoints.
    pub fn endpoint_count(&self) -> usize {
        2 * self.arcs.len()
    }

    pub fn complement(&self) -> Self {
        let mut v = Vec::with_capacity(self.arcs.len() + 1);
        let mut prev = S::zero();
        for (l, r) in &self.arcs {
            v.push((prev, l.clone()));
            prev = r.clone();
        }
        v.push((prev, S::one()));
        ArcSet::normalize(v)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (a, b) = (&self.arcs, &other.arcs);
        let (mut i, mut j) = (0, 0);
        let mut v = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = max(&a[i].0, &b[j].0);
            let hi = min(&a[i].1, &b[j].1);
            if lo < hi {
                v.push((lo, hi));
            }
            if a[i].1 <= b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet::normalize(v)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.arcs.clone();
        v.extend(other.arcs.iter().cloned());
        ArcSet::normalize(v)
    }

    /// `{x + s mod 1 : x ∈ self}`.
    pub fn translate(&self, s: &S) -> Self {
        let s = s.frac();
        let one = S::one();
        let mut v = Vec::with_capacity(self.arcs.len() + 1);
        for (l, r) in &self.arcs {
            let (l2, r2) = (l.clone() + s.clone(), r.clone() + s.clone());
            if r2 <= one {
                v.push((l2, r2));
            } else if l2 >= one {
                v.push((l2 - one.clone(), r2 - one.clone()));
            } else {
                v.push((l2, one.clone()));
                v.push((S::zero(), r2 - one.clone()));
            }
        }
        ArcSet::normalize(v)
    }
}

/// Maximum number of translates accepted by [`arc_intersection_measure`].
pub const MAX_SHIFTS: usize = 64;

/// `μ(A ∩ (A − s_1) ∩ ⋯ ∩ (A − s_k))`.
pub fn arc_intersection_measure<S: Scalar>(a: &ArcSet<S>, shifts: &[S]) -> Result<S> {
    Ok(arc_intersection(a, shifts)?.measure())
}

/// `A ∩ (A − s_1) ∩ ⋯ ∩ (A − s_k)` as an arc set.
pub fn arc_intersection<S: Scalar>(a: &ArcSet<S>, shifts: &[S]) -> Result<ArcSet<S>> {
    if shifts.len() > MAX_SHIFTS {
        return Err(Error::Complexity(format!(
            "{} shifts requested, at most {MAX_SHIFTS} supported",
            shifts.len()
        )));
    }
    let mut acc = a.clone();
    for s in shifts {
        if acc.is_empty() {
            break;
        }
        acc = acc.intersection(&a.translate(&(S::zero() - s.clone())));
    }
    Ok(acc)
}

/// `μ([0,L) ∩ ([0,L) − d))` for `d ∈ [0, 1)`; the overlap of one arc with
/// its rotation.
#[inline]
pub fn single_arc_overlap(len: f64, d: f64) -> f64 {
    (len - d).max(0.0) + (len + d - 1.0).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn examples() {
        let a = ArcSet::from_arcs(vec![(0.0, 0.3)]).unwrap();
        assert!((arc_intersection_measure(&a, &[]).unwrap() - 0.3).abs() < 1e-15);
        assert!((arc_intersection_measure(&a, &[0.1]).unwrap() - 0.2).abs() < 1e-12);
        let b = ArcSet::from_arcs(vec![(q(0, 1), q(1, 4))]).unwrap();
        assert_eq!(arc_intersection_measure(&b, &[q(1, 4)]).unwrap(), q(0, 1));
    }

    #[test]
    fn complement_is_exact() {
        let a = ArcSet::from_arcs(vec![(q(1, 3), q(1, 2)), (q(5, 6), q(1, 10))]).unwrap();
        assert_eq!(a.measure() + a.complement().measure(), q(1, 1));
        assert_eq!(a.measure(), q(1, 6) + q(1, 6) + q(1, 10));
    }

    #[test]
    fn wrap_and_translate() {
        let a = ArcSet::arc(q(9, 10), q(1, 5)).unwrap();
        assert_eq!(a.arcs().len(), 2);
        assert!(a.contains(&q(0, 1)) && !a.contains(&q(1, 10)));
        let t = a.translate(&q(1, 10));
        assert_eq!(t.arcs(), &[(q(0, 1), q(1, 5))]);
    }

    #[test]
    fn too_many_shifts() {
        let a = ArcSet::<f64>::full();
        let s = vec![0.1; 65];
        assert!(matches!(arc_intersection_measure(&a, &s), Err(Error::Complexity(_))));
    }

    #[test]
    fn float_snapping_merges_near_endpoints() {
        let a = ArcSet::from_arcs(vec![(0.0, 0.5), (0.5 + 1e-13, 0.7)]).unwrap();
        assert_eq!(a.arcs().len(), 1);
    }

    #[test]
    fn overlap_formula() {
        for d in [0.0, 0.05, 0.2, 0.5, 0.75, 0.95] {
            let a = ArcSet::from_arcs(vec![(0.0, 0.3)]).unwrap();
            let exact = arc_intersection_measure(&a, &[d]).unwrap();
            assert!((exact - single_arc_overlap(0.3, d)).abs() < 1e-12, "{d}");
        }
    }
}
