use floorlab::catalog::CatalogFunction;
use floorlab::pet::{characteristic_vector, pet_step, random_family, valid_pivots, vdc_transform};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn every_minimal_pivot_decreases_the_vector(seed in any::<u64>(), m in 1u64..6) {
        for c in [1.5, 2.5, 3.5] {
            let base = CatalogFunction::power(1.0, c).unwrap();
            let family = random_family(&base, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let before = characteristic_vector(&family).unwrap();
            for pivot in valid_pivots(&family).unwrap() {
                let next = vdc_transform(&family, pivot, m).unwrap();
                if !next.is_empty() {
                    prop_assert!(characteristic_vector(&next).unwrap() < before);
                }
            }
            prop_assert!(pet_step(&family, m).unwrap().decreased);
        }
    }

    #[test]
    fn transformed_elements_evaluate_to_differences(seed in any::<u64>(), m in 1u64..4, n in 10u64..1000) {
        let base = CatalogFunction::power(1.0, 1.5).unwrap();
        let family = random_family(&base, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let step = pet_step(&family, m).unwrap();
        let next = vdc_transform(&family, step.pivot, m).unwrap();
        let pivot = &family[step.pivot];
        let expected: Vec<f64> = family
            .iter()
            .map(|e| e.eval(n + m) - pivot.eval(n))
            .chain(family.iter().enumerate().filter(|(i, _)| *i != step.pivot).map(|(_, e)| e.eval(n) - pivot.eval(n)))
            .collect();
        for e in &next {
            let v = e.eval(n);
            prop_assert!(expected.iter().any(|x| (x - v).abs() <= 1e-9 * (1.0 + x.abs())));
        }
    }
}
