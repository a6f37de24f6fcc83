use floorlab::number::Real;
use floorlab::systems::{
    arc_intersection_measure, measure_estimate, single_arc_overlap, ArcSet, DynamicalSystem, ExactIntersection, Region,
};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

#[test]
fn rational_rotation_is_periodic() {
    let s = DynamicalSystem::rotation(Real::rational(2, 7));
    let a = Region::parse("arcs:0,1/5;1/2,3/4").unwrap();
    let ex = ExactIntersection::new(&s, &a).unwrap().unwrap();
    for m in 0..30 {
        assert_eq!(ex.measure(&[m]).unwrap(), ex.measure(&[m + 7]).unwrap());
    }
    assert_eq!(ex.exact_value(&[7]).unwrap().unwrap(), q(1, 5) + q(1, 4));
}

#[test]
fn box_measures_multiply() {
    let s = DynamicalSystem::parse("rotation:d=2,alpha=1/3;1/5").unwrap();
    let a = Region::parse("box:0,1/2;0,1/4").unwrap();
    assert_eq!(a.measure(&s).unwrap(), 0.125);
    let ex = ExactIntersection::new(&s, &a).unwrap().unwrap();
    assert_eq!(ex.measure(&[15]).unwrap(), 0.125);
}

#[test]
fn heisenberg_has_no_exact_oracle() {
    let s = DynamicalSystem::parse("heisenberg:a=sqrt2,b=1/3,c=0").unwrap();
    let a = Region::parse("box:0,1/2;0,1/2;0,1/2").unwrap();
    assert!(ExactIntersection::new(&s, &a).unwrap().is_none());
    let ind = a.indicator(3).unwrap();
    let m = measure_estimate(&s, &ind, &[], 8000, 1).unwrap();
    assert!((m.estimate - 0.125).abs() < 4.0 * m.stderr);
}

#[test]
fn mismatched_region_rejected() {
    let s = DynamicalSystem::parse("cyclic:q=5,r=2").unwrap();
    assert!(Region::parse("arc:0,1/2").unwrap().measure(&s).is_err());
    assert!(Region::parse("circle:0,1").is_err());
}

proptest! {
    #[test]
    fn complement_partitions_the_circle(l in 0i64..100, r in 0i64..100) {
        let a = ArcSet::from_arcs(vec![(q(l, 100), q(r, 100))]).unwrap();
        prop_assert_eq!(a.measure() + a.complement().measure(), q(1, 1));
        prop_assert!(a.intersection(&a.complement()).is_empty());
    }

    #[test]
    fn translation_preserves_measure(l in 0i64..100, len in 0i64..100, s in -300i64..300) {
        let a = ArcSet::arc(q(l, 100), q(len, 100)).unwrap();
        prop_assert_eq!(a.translate(&q(s, 37)).measure(), a.measure());
    }

    #[test]
    fn intersection_is_commutative(a1 in 0.0f64..1.0, a2 in 0.0f64..1.0, b1 in 0.0f64..1.0, b2 in 0.0f64..1.0) {
        let a = ArcSet::from_arcs(vec![(a1, a2)]).unwrap();
        let b = ArcSet::from_arcs(vec![(b1, b2)]).unwrap();
        prop_assert!((a.intersection(&b).measure() - b.intersection(&a).measure()).abs() < 1e-12);
        prop_assert!(a.union(&b).measure() <= a.measure() + b.measure() + 1e-12);
    }

    #[test]
    fn float_and_exact_arcs_agree(len in 1i64..99, s in 0i64..1000) {
        let exact = arc_intersection_measure(
            &ArcSet::from_arcs(vec![(q(0, 1), q(len, 100))]).unwrap(),
            &[q(s, 1000)],
        ).unwrap();
        let float = single_arc_overlap(len as f64 / 100.0, s as f64 / 1000.0);
        prop_assert!((float - floorlab::number::rational_to_f64(&exact)).abs() < 1e-12);
    }

    #[test]
    fn iterates_compose(m1 in -500i64..500, m2 in -500i64..500, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let s = DynamicalSystem::parse("skew:alpha=golden").unwrap();
        let two = s.iterate(&s.iterate(&[x, y], m1).unwrap(), m2).unwrap();
        let one = s.iterate(&[x, y], m1 + m2).unwrap();
        for (a, b) in two.iter().zip(&one) {
            let d = (a - b).abs();
            prop_assert!(d.min(1.0 - d) < 1e-8);
        }
    }
}
