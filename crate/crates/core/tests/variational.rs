use dpp_core::model::manufacture;
use dpp_core::solver::solve;
use dpp_core::study::fit_order;
use dpp_core::variational::*;
use dpp_core::*;
use rand_chacha::rand_core::SeedableRng;

fn smooth(n: usize, steps: usize) -> DppProblem {
    let g = StructuredGrid::new(1, &[1.0], &[n]).unwrap();
    let m = Material::uniform(&g, 1.0, 1.0, 1.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]]);
    let layout = BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Velocity), (Side::Right, BcKind::Pressure)]);
    manufacture(&g, &m, &ManufacturedCase::Smooth { amplitude: 1.0, wavenumber: 1 }, &layout, 1.0, steps).unwrap().0
}

fn layout() -> BoundaryLayout {
    BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Velocity), (Side::Right, BcKind::Pressure)])
}

fn reference(n: usize, steps: usize) -> (DppProblem, Trajectory) {
    let g = StructuredGrid::new(1, &[1.0], &[n]).unwrap();
    let m = Material::uniform(&g, 1.0, 1.0, 1.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]]);
    manufacture(&g, &m, &ManufacturedCase::Smooth { amplitude: 1.0, wavenumber: 1 }, &layout(), 1.0, steps).unwrap()
}

#[test]
fn stationary_at_crank_nicolson_output() {
    let mut dts = vec![];
    let mut rs = vec![];
    for lvl in 0..3 {
        let p = smooth(16, 10 << lvl);
        let (t, _) = solve(&p, Scheme::CrankNicolson).unwrap();
        let x = FieldSet::from_trajectory(&t);
        let s = stationarity(&x, &p, BoundaryForm::Corrected, 20, 1).unwrap();
        assert!(s.fd_agreement <= 1e-8, "{s:?}");
        assert!(s.pairing_ratio <= 1e-13 * s.scale, "{s:?}");
        let r = equivalent_residuals(&x, &p).unwrap();
        assert!(r.norms().iter().all(|&v| v < 1e-12), "{:?}", r.norms());
        dts.push(p.dt());
        rs.push(s.relative);
    }
    assert!(rs[2] <= 1e-3);
    assert!(rs.windows(2).all(|w| w[1] < w[0]));
    assert!(fit_order(&dts, &rs).unwrap().order >= 1.8);
}

#[test]
fn literal_boundary_form_is_not_stationary() {
    let mut rs = vec![];
    for lvl in 0..3 {
        let p = smooth(16, 10 << lvl);
        let (t, _) = solve(&p, Scheme::CrankNicolson).unwrap();
        let s = stationarity(&FieldSet::from_trajectory(&t), &p, BoundaryForm::Literal, 5, 1).unwrap();
        rs.push(s.relative);
    }
    assert!(rs.iter().all(|&r| r > 5e-3), "{rs:?}");
}

#[test]
fn convolved_round_trip_converges() {
    let mut dts = vec![];
    let mut d = vec![];
    for lvl in 0..4 {
        let (p, r) = reference(16, 10 << lvl);
        let rt = convolved_round_trip(&FieldSet::from_trajectory(&r), &p).unwrap();
        assert!(rt.initial.iter().all(|&v| v < 1e-14));
        dts.push(p.dt());
        d.push(rt.max());
    }
    let f = fit_order(&dts, &d).unwrap();
    assert!(f.order >= 1.8, "{d:?} {f:?}");
}

#[test]
fn perturbation_response_is_linear() {
    let p = smooth(8, 10);
    let (t, _) = solve(&p, Scheme::CrankNicolson).unwrap();
    let x = FieldSet::from_trajectory(&t);
    let mut bump = x.scale(0.0);
    for k in 0..=p.steps {
        bump.u[0].sample_mut(k)[3] = 1.0;
    }
    let r1 = equivalent_residuals(&x.axpy(1e-3, &bump).unwrap(), &p).unwrap().norms()[0];
    let r2 = equivalent_residuals(&x.axpy(2e-3, &bump).unwrap(), &p).unwrap().norms()[0];
    assert!(r1 > 1e-4);
    assert!((r2 / r1 - 2.0).abs() < 1e-6);

    let dir = random_direction(&p, &mut rand_chacha::ChaCha8Rng::seed_from_u64(2));
    let v0 = gateaux_variation(&x, &p, &dir, BoundaryForm::Corrected).unwrap();
    let v1 = gateaux_variation(&x.axpy(1e-2, &bump).unwrap(), &p, &dir, BoundaryForm::Corrected).unwrap();
    let v2 = gateaux_variation(&x.axpy(2e-2, &bump).unwrap(), &p, &dir, BoundaryForm::Corrected).unwrap();
    let (a, b) = (v1.assembled.sub(&v0.assembled).unwrap(), v2.assembled.sub(&v0.assembled).unwrap());
    assert!(a.max_abs() > 1e-6);
    assert!(b.axpy(-2.0, &a).unwrap().max_abs() < 1e-10 * b.max_abs().max(1.0));
}

#[test]
fn balanced_difference_matches_assembly() {
    for lvl in 0..3 {
        let p = smooth(8 << lvl, 20 << lvl);
        let (t, _) = solve(&p, Scheme::CrankNicolson).unwrap();
        let s = stationarity(&FieldSet::from_trajectory(&t), &p, BoundaryForm::Corrected, 3, 1).unwrap();
        assert!(s.fd_agreement <= 1e-12, "{s:?}");
        assert!(s.fd_agreement_small > s.fd_agreement, "{s:?}");
    }
}
