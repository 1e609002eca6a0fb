use dpp_core::model::manufacture;
use dpp_core::study::{fit_order, trajectory_error};
use dpp_core::solver::{solve, solve_with, step};
use dpp_core::*;

fn material(g: &StructuredGrid) -> Material {
    Material::uniform(g, 1.0, 1.0, 1.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]])
}

fn layout_1d() -> BoundaryLayout {
    BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Velocity), (Side::Right, BcKind::Pressure)])
}

#[test]
fn decay_orders() {
    for (scheme, expect) in [(Scheme::BackwardEuler, 1.0), (Scheme::CrankNicolson, 2.0)] {
        let g = StructuredGrid::new(1, &[1.0], &[8]).unwrap();
        let m = material(&g);
        let mut dts = vec![];
        let mut errs = vec![];
        for lvl in 0..4 {
            let n = 10 << lvl;
            let (p, r) = manufacture(&g, &m, &ManufacturedCase::UniformDecay { a1: 1.0, a2: 0.5 }, &layout_1d(), 1.0, n).unwrap();
            let (t, _) = solve(&p, scheme).unwrap();
            dts.push(1.0 / n as f64);
            errs.push(trajectory_error(&t, &r).unwrap().combined());
        }
        let f = fit_order(&dts, &errs).unwrap();
        assert!((f.order - expect).abs() < 0.2);
    }
}

#[test]
fn smooth_converges_at_second_order() {
    let mut hs = vec![];
    let mut errs = vec![];
    for lvl in 0..3 {
        let n = 16 << lvl;
        let g = StructuredGrid::new(1, &[1.0], &[n]).unwrap();
        let m = material(&g);
        let (p, r) = manufacture(&g, &m, &ManufacturedCase::Smooth { amplitude: 1.0, wavenumber: 1 }, &layout_1d(), 1.0, n).unwrap();
        let (t, st) = solve(&p, Scheme::CrankNicolson).unwrap();
        assert!(st.max_relative_residual < 1e-10);
        hs.push(1.0 / n as f64);
        errs.push(trajectory_error(&t, &r).unwrap().combined());
    }
    let f = fit_order(&hs, &errs).unwrap();
    assert!((f.order - 2.0).abs() < 0.3, "{errs:?} {f:?}");
}

fn decay_problem(steps: usize) -> DppProblem {
    let g = StructuredGrid::new(1, &[1.0], &[4]).unwrap();
    let m = material(&g);
    let layout = BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Pressure), (Side::Right, BcKind::Pressure)]);
    manufacture(&g, &m, &ManufacturedCase::UniformDecay { a1: 1.0, a2: 0.5 }, &layout, 1.0, steps).unwrap().0
}

#[test]
fn single_step_amplification() {
    let p = decay_problem(4);
    let dt = p.dt();
    let lambda = [0.4, 2.0];
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let (t, _) = solve(&p, scheme).unwrap();
        for n in 0..2 {
            let l = lambda[n] * dt;
            let g = match scheme {
                Scheme::BackwardEuler => 1.0 / (1.0 + l),
                Scheme::CrankNicolson => (1.0 - 0.5 * l) / (1.0 + 0.5 * l),
            };
            let (u0, u1) = (t.snapshots[0].u[n][2], t.snapshots[1].u[n][2]);
            assert!((u1 - g * u0).abs() < 1e-12, "{scheme:?} {n} {u0} {u1}");
        }
    }
}

#[test]
fn step_matches_solve() {
    let p = decay_problem(3);
    let (t, _) = solve(&p, Scheme::CrankNicolson).unwrap();
    let s1 = step(&p, &t.snapshots[0], Scheme::CrankNicolson).unwrap();
    for n in 0..2 {
        for (a, b) in s1.u[n].iter().zip(&t.snapshots[1].u[n]) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}

#[test]
fn solution_is_linear_in_data() {
    let g = StructuredGrid::new(2, &[1.0, 1.0], &[6, 6]).unwrap();
    let m = material(&g);
    let layout = BoundaryLayout::same_for_both(&[
        (Side::Left, BcKind::Velocity),
        (Side::Right, BcKind::Pressure),
        (Side::Bottom, BcKind::Velocity),
        (Side::Top, BcKind::Pressure),
    ]);
    let (pa, _) = manufacture(&g, &m, &ManufacturedCase::UniformDecay { a1: 1.0, a2: 0.5 }, &layout, 1.0, 6).unwrap();
    let (pb, _) = manufacture(&g, &m, &ManufacturedCase::Smooth { amplitude: 0.7, wavenumber: 2 }, &layout, 1.0, 6).unwrap();
    let pc = pa.with_loads(pa.loads.axpy(-1.5, &pb.loads).unwrap());
    let (ta, _) = solve(&pa, Scheme::CrankNicolson).unwrap();
    let (tb, _) = solve(&pb, Scheme::CrankNicolson).unwrap();
    let (tc, _) = solve(&pc, Scheme::CrankNicolson).unwrap();
    let want = ta.combine(-1.5, &tb).unwrap();
    let e = trajectory_error(&tc, &want).unwrap().combined();
    assert!(e < 1e-11, "{e}");
}

#[test]
fn closed_system_needs_a_gauge() {
    let g = StructuredGrid::new(1, &[1.0], &[6]).unwrap();
    let m = Material::uniform(&g, 1.0, 1.0, 0.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]]);
    let layout = BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Velocity), (Side::Right, BcKind::Velocity)]);
    let (p, _) = manufacture(&g, &m, &ManufacturedCase::Rest { pressure: 0.0 }, &layout, 1.0, 2).unwrap();
    assert!(matches!(solve(&p, Scheme::BackwardEuler), Err(Error::Nullspace(_))));
    let opts = SolverOptions { pin_pressure: true, ..SolverOptions::new(Scheme::BackwardEuler) };
    assert!(solve_with(&p, &opts).is_ok());
}

#[test]
fn decay_energy_matches_closed_form() {
    let g = StructuredGrid::new(1, &[2.0], &[8]).unwrap();
    let m = Material::uniform(&g, 1.5, 0.8, 1.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]]);
    let layout = BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Pressure), (Side::Right, BcKind::Pressure)]);
    let (a1, a2) = (1.0, 0.5);
    let lam = |phi: f64, k: f64| 0.8 * phi / (1.5 * k);
    let (l1, l2) = (lam(0.4, 1.0), lam(0.2, 0.1));
    let exact = |t: f64| 0.5 * 2.0 * (1.5 / 0.4 * a1 * a1 * (-2.0 * l1 * t).exp() + 1.5 / 0.2 * a2 * a2 * (-2.0 * l2 * t).exp());
    for (scheme, p) in [(Scheme::BackwardEuler, 1.0), (Scheme::CrankNicolson, 2.0)] {
        let mut dts = vec![];
        let mut errs = vec![];
        for lvl in 0..4 {
            let (prob, _) =
                manufacture(&g, &m, &ManufacturedCase::UniformDecay { a1, a2 }, &layout, 1.0, 10 << lvl).unwrap();
            let (t, _) = solve(&prob, scheme).unwrap();
            let e = dpp_core::energy::energy(&t, &prob.material).unwrap();
            assert!((e.sample(0)[0] - exact(0.0)).abs() < 1e-12 * exact(0.0));
            let err = (0..e.len()).map(|k| (e.sample(k)[0] - exact(k as f64 * prob.dt())).abs()).fold(0.0, f64::max);
            dts.push(prob.dt());
            errs.push(err / exact(0.0));
        }
        let order = fit_order(&dts, &errs).unwrap().order;
        assert!((order - p).abs() < 0.2, "{scheme:?} {order} {errs:?}");
    }
}
