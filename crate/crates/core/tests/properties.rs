use dpp_core::convolution::{conv, one_star};
use dpp_core::study::{adjointness_defect, commutativity_defect};
use dpp_core::*;
use proptest::prelude::*;

fn series(dt: f64, v: &[f64]) -> TimeSeries {
    TimeSeries::new(dt, Kind::Scalar, 1, v.to_vec()).unwrap()
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|n| (prop::collection::vec(-1e3..1e3f64, n), prop::collection::vec(-1e3..1e3f64, n)))
}

proptest! {
    #[test]
    fn convolution_commutes((a, b) in pair(), dt in 1e-3..1.0f64) {
        let (a, b) = (series(dt, &a), series(dt, &b));
        let ab = conv(&a, &b).unwrap();
        let scale = ab.max_abs().max(1e-300);
        prop_assert!(ab.sub(&conv(&b, &a).unwrap()).unwrap().max_abs() <= 1e-13 * scale);
    }

    #[test]
    fn convolution_is_bilinear((a, b) in pair(), c in -10.0..10.0f64) {
        let (a, b) = (series(0.1, &a), series(0.1, &b));
        let lhs = conv(&a.scale(c).add(&b).unwrap(), &b).unwrap();
        let rhs = conv(&a, &b).unwrap().scale(c).add(&conv(&b, &b).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-11 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn one_star_is_convolution_with_one((a, _) in pair()) {
        let a = series(0.05, &a);
        let one = TimeSeries::constant(0.05, a.steps(), Kind::Scalar, &[1.0]);
        let d = one_star(&a).sub(&conv(&one, &a).unwrap()).unwrap();
        prop_assert!(d.max_abs() <= 1e-12 * (1.0 + a.max_abs()));
    }

    #[test]
    fn random_series_commute(steps in 2usize..300, seed in any::<u64>()) {
        prop_assert!(commutativity_defect(steps, 2, seed).unwrap() <= 1e-13);
    }

    #[test]
    fn summation_by_parts(nx in 1usize..20, ny in 1usize..20, lx in 0.1..5.0f64, seed in any::<u64>()) {
        let g1 = StructuredGrid::new(1, &[lx], &[nx]).unwrap();
        let g2 = StructuredGrid::new(2, &[lx, 1.0], &[nx, ny]).unwrap();
        prop_assert!(adjointness_defect(&g1, 3, seed) <= 1e-12);
        prop_assert!(adjointness_defect(&g2, 3, seed) <= 1e-12);
    }
}
