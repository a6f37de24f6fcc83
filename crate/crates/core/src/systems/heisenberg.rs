//! The Heisenberg group `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy')`, its
//! lattice `ℤ³` and translations on the quotient.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::number::{exact_rational, frac, Real, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergElement<S: Scalar> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> HeisenbergElement<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        HeisenbergElement { x, y, z }
    }

    pub fn identity() -> Self {
        HeisenbergElement::new(S::zero(), S::zero(), S::zero())
    }

    pub fn mul(&self, o: &Self) -> Self {
        HeisenbergElement {
            x: self.x.clone() + o.x.clone(),
            y: self.y.clone() + o.y.clone(),
            z: self.z.clone() + o.z.clone() + self.x.clone() * o.y.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        HeisenbergElement {
            x: S::zero() - self.x.clone(),
            y: S::zero() - self.y.clone(),
            z: self.x.clone() * self.y.clone() - self.z.clone(),
        }
    }

    /// `b^m = (mα, mβ, mγ + C(m,2)αβ)`.
    pub fn pow(&self, m: i64) -> Self {
        let mm = S::from_i64(m);
        let c2 = S::from_i64(((m as i128 * (m as i128 - 1)) / 2) as i64);
        HeisenbergElement {
            x: mm.clone() * self.x.clone(),
            y: mm.clone() * self.y.clone(),
            z: mm * self.z.clone() + c2 * self.x.clone() * self.y.clone(),
        }
    }

    /// `b^m` by repeated multiplication (for checking [`Self::pow`]).
    pub fn pow_iterated(&self, m: i64) -> Self {
        let step = if m >= 0 { self.clone() } else { self.inverse() };
        let mut acc = HeisenbergElement::identity();
        for _ in 0..m.unsigned_abs() {
            acc = acc.mul(&step);
        }
        acc
    }

    /// Representative in `[0,1)³` of the coset `gℤ³`:
    /// `({x}, {y}, {z − x⌊y⌋})`.
    pub fn reduce(&self) -> Self {
        let fy = self.y.floor();
        HeisenbergElement {
            x: self.x.frac(),
            y: self.y.clone() - fy.clone(),
            z: (self.z.clone() - self.x.clone() * fy).frac(),
        }
    }
}

impl HeisenbergElement<f64> {
    /// `b^t` for real `t`, with `C(t,2) = t(t−1)/2`.
    pub fn pow_real(&self, t: f64) -> Self {
        HeisenbergElement {
            x: t * self.x,
            y: t * self.y,
            z: t * self.z + t * (t - 1.0) / 2.0 * self.x * self.y,
        }
    }
}

/// Translation by `b` on the Heisenberg nilmanifold, with points in the
/// fundamental domain `[0,1)³`.
///
/// Orbits are computed in exact rational arithmetic: irrational parameters
/// enter through the exact value of their `f64` representation, so results
/// do not degrade as `|m|` grows.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergSystem {
    b: HeisenbergElement<BigRational>,
    params: [Real; 3],
}

fn exact(r: &Real) -> Result<BigRational> {
    match r.as_rational() {
        Some(q) => Ok(q.clone()),
        None => exact_rational(r.to_f64()),
    }
}

impl HeisenbergSystem {
    pub fn new(alpha: Real, beta: Real, gamma: Real) -> Result<Self> {
        let b = HeisenbergElement::new(exact(&alpha)?, exact(&beta)?, exact(&gamma)?);
        Ok(HeisenbergSystem {
            b,
            params: [alpha, beta, gamma],
        })
    }

    pub fn params(&self) -> &[Real; 3] {
        &self.params
    }

    pub fn translation(&self) -> &HeisenbergElement<BigRational> {
        &self.b
    }

    /// Exact `reduce(b^m · p)`.
    pub fn iterate_exact(&self, p: &HeisenbergElement<BigRational>, m: i64) -> HeisenbergElement<BigRational> {
        self.b.pow(m).mul(p).reduce()
    }

    /// `reduce(b^m · p)` for a float point in `[0,1)³`.
    pub fn iterate(&self, p: &[f64], m: i64) -> Result<[f64; 3]> {
        if p.len() != 3 {
            return Err(Error::arg("Heisenberg points have three coordinates"));
        }
        let q = HeisenbergElement::new(exact_rational(p[0])?, exact_rational(p[1])?, exact_rational(p[2])?);
        let r = self.iterate_exact(&q, m);
        Ok([frac(r.x.to_f64()), frac(r.y.to_f64()), frac(r.z.to_f64())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn closed_form_matches_iteration() {
        let b = HeisenbergElement::new(q(1, 3), q(2, 7), q(-5, 11));
        for m in [-17, -1, 0, 1, 2, 3, 10, 57] {
            assert_eq!(b.pow(m), b.pow_iterated(m), "m = {m}");
        }
    }

    #[test]
    fn inverse_and_identity() {
        let b = HeisenbergElement::new(q(1, 3), q(2, 7), q(-5, 11));
        assert_eq!(b.mul(&b.inverse()), HeisenbergElement::identity());
        assert_eq!(b.pow(0), HeisenbergElement::identity());
    }

    #[test]
    fn reduction_is_coset_invariant() {
        let g = HeisenbergElement::new(q(7, 3), q(-9, 4), q(13, 5));
        let gamma = HeisenbergElement::new(q(2, 1), q(-3, 1), q(5, 1));
        assert_eq!(g.reduce(), g.mul(&gamma).reduce());
    }

    #[test]
    fn third_power_from_origin() {
        let s = HeisenbergSystem::new(Real::rational(1, 5), Real::rational(2, 3), Real::rational(1, 7)).unwrap();
        let origin = HeisenbergElement::identity();
        let b = s.translation();
        let direct = HeisenbergElement::new(
            q(3, 1) * &b.x,
            q(3, 1) * &b.y,
            q(3, 1) * &b.z + q(3, 1) * &b.x * &b.y,
        )
        .reduce();
        assert_eq!(s.iterate_exact(&origin, 3), direct);
    }

    #[test]
    fn real_powers_extend_integer_ones() {
        let b = HeisenbergElement::new(0.3, 0.7, 0.1);
        let p = b.pow(5);
        let r = b.pow_real(5.0);
        assert!((p.z - r.z).abs() < 1e-12);
        let half = b.pow_real(0.5);
        let whole = half.mul(&half);
        assert!((whole.z - b.z).abs() < 1e-12);
    }
}
