use dpp_core::reciprocity::reciprocity_residual;
use dpp_core::solver::solve;
use dpp_core::study::fit_order;
use dpp_core::*;

fn base(n: usize, steps: usize) -> DppProblem {
    let g = StructuredGrid::new(1, &[1.0], &[n]).unwrap();
    let m = Material::uniform(&g, 1.0, 1.0, 1.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]]);
    let layout = BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Velocity), (Side::Right, BcKind::Pressure)]);
    let b = BoundarySpec::from_layout(&g, &layout);
    let loads = LoadSet::zero(&g, &b, 1.0 / steps as f64, steps);
    DppProblem { grid: g, material: m, boundary: b, loads, t_final: 1.0, steps }
}

fn loaded(p: &DppProblem, k: f64, w: f64, data: bool) -> DppProblem {
    let mut q = p.clone();
    let g = p.grid.clone();
    for n in 0..2 {
        let s = if n == 0 { 1.0 } else { -0.5 };
        q.loads.networks[n].body_force = TimeSeries::from_fn(p.dt(), p.steps, Kind::Face, g.n_faces(), |t, o| {
            for (f, v) in o.iter_mut().enumerate() {
                let x = g.face_center(f)[0];
                *v = s * (k * x).sin() * (w * t).cos() + 0.3 * x * t;
            }
        });
        if data {
            q.loads.networks[n].velocity_data = TimeSeries::scalar_fn(p.dt(), p.steps, |t| s * (w * t).sin()).with_kind(Kind::Boundary);
            q.loads.networks[n].pressure_data = TimeSeries::scalar_fn(p.dt(), p.steps, |t| s * t * t).with_kind(Kind::Boundary);
        }
    }
    q
}

#[test]
fn smooth_pairs_converge() {
    for (k1, w1, k2, w2, d) in [(3.0, 1.0, 5.0, 2.0, false), (1.0, 3.0, 2.0, 0.5, true), (4.0, 2.0, 1.5, 1.0, true)] {
        let mut dts = vec![];
        let mut res = vec![];
        for lvl in 0..3 {
            let p = base(32, 20 << lvl);
            let a = loaded(&p, k1, w1, false);
            let b = loaded(&p, k2, w2, d);
            let (ta, _) = solve(&a, Scheme::CrankNicolson).unwrap();
            let (tb, _) = solve(&b, Scheme::CrankNicolson).unwrap();
            let r = reciprocity_residual(&a, &ta, &b, &tb).unwrap();
            let swapped = reciprocity_residual(&b, &tb, &a, &ta).unwrap();
            let anti = r.residual.add(&swapped.residual).unwrap().max_abs();
            assert!(anti <= 1e-14 * r.functionals.iter().flatten().map(|s| s.max_abs()).fold(0.0, f64::max));
            dts.push(p.dt());
            res.push(r.normalized);
        }
        assert!(res[2] <= 1e-3);
        assert!(fit_order(&dts, &res).unwrap().order >= 1.8);
    }
}

#[test]
fn zero_loads_vanish() {
    let p = base(8, 10);
    let (t, _) = solve(&p, Scheme::BackwardEuler).unwrap();
    let q = loaded(&p, 2.0, 1.0, true);
    let (tq, _) = solve(&q, Scheme::BackwardEuler).unwrap();
    let r = reciprocity_residual(&p, &t, &p, &t).unwrap();
    assert_eq!(r.residual.max_abs(), 0.0);
    // Zero load against a loaded problem: every functional vanishes.
    let r = reciprocity_residual(&p, &t, &q, &tq).unwrap();
    assert_eq!(r.functionals[0][0].max_abs(), 0.0);
    assert_eq!(r.functionals[0][1].max_abs(), 0.0);
}

#[test]
fn mismatched_partitions_rejected() {
    let p = base(8, 10);
    let (t, _) = solve(&p, Scheme::BackwardEuler).unwrap();
    let mut q = p.clone();
    let layout = BoundaryLayout::same_for_both(&[(Side::Left, BcKind::Pressure), (Side::Right, BcKind::Pressure)]);
    q.boundary = BoundarySpec::from_layout(&q.grid, &layout);
    assert!(reciprocity_residual(&p, &t, &q, &t).is_err());
}
