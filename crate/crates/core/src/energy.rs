//! Energy of difference trajectories and the uniqueness diagnostics built on it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convolution::{time_derivative, Kind, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::grid::{FaceField, FaceRule, StructuredGrid};
use crate::model::{DppProblem, Material};
use crate::solver::{difference_trajectory, solve_with, SolverOptions, StateSnapshot, Trajectory};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Rates from the integrand formulas with discrete time derivatives of the fields.
    Formula,
    /// Rates from discrete time derivatives of `E` itself.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub e: TimeSeries,
    pub e_dot: TimeSeries,
    pub e_ddot: TimeSeries,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRates {
    pub formula: EnergySeries,
    pub finite_difference: EnergySeries,
    /// `Ė` from the dissipation identity: minus drag and exchange dissipation.
    pub dissipation: TimeSeries,
}

fn check_material(grid: &StructuredGrid, m: &Material) -> Result<()> {
    if m.phi.iter().any(|p| p.len() != grid.n_cells()) || m.k.iter().any(|k| k.len() != grid.n_cells()) {
        return invalid("material does not match the grid");
    }
    Ok(())
}

/// Weighted inertia `W_f γ/φ_f` per network.
fn inertia_weights(grid: &StructuredGrid, m: &Material) -> [FaceField; 2] {
    let w = grid.face_weights(FaceRule::Trapezoidal);
    [0, 1].map(|n| m.inertia_face(grid, n).iter().zip(&w).map(|(a, w)| a * w).collect())
}

fn quad(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// `½∫(γ/φ₁)u₁·u₁ + ½∫(γ/φ₂)u₂·u₂` for one snapshot.
pub fn kinetic_energy(grid: &StructuredGrid, snap: &StateSnapshot, m: &Material) -> Result<f64> {
    check_material(grid, m)?;
    if snap.u.iter().any(|u| u.len() != grid.n_faces()) {
        return invalid("snapshot does not match the grid");
    }
    let w = inertia_weights(grid, m);
    Ok((0..2).map(|n| 0.5 * quad(&w[n], &snap.u[n], &snap.u[n])).sum())
}

/// `vᵢ = uᵢ/φᵢ` with face porosities.
pub fn seepage_velocities(grid: &StructuredGrid, snap: &StateSnapshot, m: &Material) -> Result<[FaceField; 2]> {
    check_material(grid, m)?;
    if m.phi.iter().flatten().any(|p| !(*p > 0.0)) {
        return invalid("porosity must be positive");
    }
    Ok([0, 1].map(|n| snap.u[n].iter().zip(m.phi_face(grid, n)).map(|(u, p)| u / p).collect()))
}

/// `½∫φᵢγ vᵢ·vᵢ` summed over networks.
pub fn seepage_kinetic_energy(grid: &StructuredGrid, snap: &StateSnapshot, m: &Material) -> Result<f64> {
    let v = seepage_velocities(grid, snap, m)?;
    let w = grid.face_weights(FaceRule::Trapezoidal);
    Ok((0..2)
        .map(|n| {
            let phi = m.phi_face(grid, n);
            (0..grid.n_faces()).map(|f| 0.5 * w[f] * phi[f] * m.gamma * v[n][f] * v[n][f]).sum::<f64>()
        })
        .sum())
}

pub fn energy(traj: &Trajectory, m: &Material) -> Result<TimeSeries> {
    check_material(&traj.grid, m)?;
    let w = inertia_weights(&traj.grid, m);
    let mut e = TimeSeries::zeros(traj.dt, traj.steps(), Kind::Scalar, 1);
    for (k, s) in traj.snapshots.iter().enumerate() {
        e.sample_mut(k)[0] = (0..2).map(|n| 0.5 * quad(&w[n], &s.u[n], &s.u[n])).sum();
    }
    Ok(e)
}

/// Energy rates of a difference trajectory by formula, by differencing `E`,
/// and by the dissipation identity.
pub fn energy_rates(traj: &Trajectory, m: &Material) -> Result<EnergyRates> {
    let g = &traj.grid;
    let e = energy(traj, m)?;
    let w = inertia_weights(g, m);
    let u = [traj.velocity(0), traj.velocity(1)];
    let du = [time_derivative(&u[0])?, time_derivative(&u[1])?];
    let mut e_dot = TimeSeries::zeros(traj.dt, traj.steps(), Kind::Scalar, 1);
    let mut e_ddot = e_dot.clone();
    for k in 0..e.len() {
        e_dot.sample_mut(k)[0] = (0..2).map(|n| quad(&w[n], du[n].sample(k), u[n].sample(k))).sum();
        e_ddot.sample_mut(k)[0] = (0..2).map(|n| 2.0 * quad(&w[n], du[n].sample(k), du[n].sample(k))).sum();
    }
    let fd_dot = time_derivative(&e)?;
    let fd_ddot = time_derivative(&fd_dot)?;

    let fw = g.face_weights(FaceRule::Trapezoidal);
    let drag = [m.drag_face(g, 0), m.drag_face(g, 1)];
    let v = g.cell_volume();
    let mut diss = TimeSeries::zeros(traj.dt, traj.steps(), Kind::Scalar, 1);
    for (k, s) in traj.snapshots.iter().enumerate() {
        let d: f64 = (0..2).map(|n| (0..g.n_faces()).map(|f| fw[f] * drag[n][f] * s.u[n][f] * s.u[n][f]).sum::<f64>()).sum();
        let x: f64 = s.p[0].iter().zip(&s.p[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * v * m.beta / m.mu;
        diss.sample_mut(k)[0] = -(d + x);
    }
    Ok(EnergyRates {
        formula: EnergySeries { e: e.clone(), e_dot, e_ddot, provenance: Provenance::Formula },
        finite_difference: EnergySeries { e, e_dot: fd_dot, e_ddot: fd_ddot, provenance: Provenance::FiniteDifference },
        dissipation: diss,
    })
}

/// `E Ë − Ė²`.
pub fn log_convexity_check(s: &EnergySeries) -> TimeSeries {
    let mut out = TimeSeries::zeros(s.e.dt(), s.e.steps(), Kind::Scalar, 1);
    for k in 0..s.e.len() {
        let (e, d, dd) = (s.e.sample(k)[0], s.e_dot.sample(k)[0], s.e_ddot.sample(k)[0]);
        out.sample_mut(k)[0] = e * dd - d * d;
    }
    out
}

/// `E(t) − E(t₁) exp[Ė(t₁)(t − t₁)/E(t₁)]` for `t ≥ t₁`, zero before.
pub fn exponential_bound_check(s: &EnergySeries, t1: f64, tol: f64) -> Result<TimeSeries> {
    let dt = s.e.dt();
    let k1 = (t1 / dt).round();
    if k1 < 0.0 || k1 as usize >= s.e.len() || (k1 * dt - t1).abs() > 1e-9 * dt.max(t1.abs()) {
        return invalid(format!("t1 = {t1} is not a sample time"));
    }
    let k1 = k1 as usize;
    let e1 = s.e.sample(k1)[0];
    if !(e1 > tol) {
        return Err(Error::Precondition(format!("E(t1) = {e1:e} does not exceed the tolerance {tol:e}")));
    }
    let rate = s.e_dot.sample(k1)[0] / e1;
    let mut out = TimeSeries::zeros(dt, s.e.steps(), Kind::Scalar, 1);
    for k in k1..s.e.len() {
        let t = s.e.time(k);
        out.sample_mut(k)[0] = s.e.sample(k)[0] - e1 * (rate * (t - t1)).exp();
    }
    Ok(out)
}

/// Two sets of initial velocities for the same problem.
#[derive(Debug, Clone, PartialEq)]
pub struct IcPair {
    pub first: [FaceField; 2],
    pub second: [FaceField; 2],
}

/// Smooth random field on faces vanishing on the whole boundary, built from
/// a few sine modes per component.
fn smooth_face_field(grid: &StructuredGrid, rng: &mut ChaCha8Rng, modes: usize) -> FaceField {
    let l = grid.extent();
    let mut coef = vec![[0.0; 2]; modes * modes];
    for c in coef.iter_mut() {
        *c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    }
    (0..grid.n_faces())
        .map(|f| {
            let ax = grid.face_axis(f);
            let [x, y] = grid.face_center(f);
            let mut v = 0.0;
            for a in 1..=modes {
                let sx = (a as f64 * std::f64::consts::PI * x / l[0]).sin();
                if grid.dim() == 1 {
                    v += coef[a - 1][0] * sx / a as f64;
                    continue;
                }
                for b in 1..=modes {
                    let sy = (b as f64 * std::f64::consts::PI * y / l[1]).sin();
                    let cx = (a as f64 * std::f64::consts::PI * x / l[0]).cos();
                    let cy = (b as f64 * std::f64::consts::PI * y / l[1]).cos();
                    let c = coef[(a - 1) * modes + b - 1][ax] / (a * b) as f64;
                    // Each component vanishes where its own face is on the boundary.
                    v += c * if ax == 0 { sx * cy } else { cx * sy };
                }
            }
            v
        })
        .collect()
}

/// Discretely divergence-free face field with zero boundary flux, from a
/// random smooth stream function. Identically zero in 1D.
fn solenoidal_field(grid: &StructuredGrid, rng: &mut ChaCha8Rng, modes: usize) -> FaceField {
    let mut u = vec![0.0; grid.n_faces()];
    if grid.dim() == 1 {
        return u;
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let (h, l) = (grid.h(), grid.extent());
    let mut coef = vec![0.0; modes * modes];
    for c in coef.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    let psi = |i: usize, j: usize| {
        let (x, y) = (i as f64 * h[0], j as f64 * h[1]);
        let mut s = 0.0;
        for a in 1..=modes {
            for b in 1..=modes {
                s += coef[(a - 1) * modes + b - 1] / (a * b) as f64
                    * (a as f64 * std::f64::consts::PI * x / l[0]).sin()
                    * (b as f64 * std::f64::consts::PI * y / l[1]).sin();
            }
        }
        s * l[0].min(l[1])
    };
    let mut nodes = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 1..ny {
        for i in 1..nx {
            nodes[j * (nx + 1) + i] = psi(i, j);
        }
    }
    let node = |i: usize, j: usize| nodes[j * (nx + 1) + i];
    for j in 0..ny {
        for i in 0..=nx {
            u[grid.x_face_index(i, j)] = (node(i, j + 1) - node(i, j)) / h[1];
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            u[grid.y_face_index(i, j)] = -(node(i + 1, j) - node(i, j)) / h[0];
        }
    }
    u
}

/// Pairs the problem's initial velocities with a random smooth perturbation
/// of relative size `amplitude`. The perturbation vanishes on the boundary,
/// keeps the summed mass balance, and keeps each network solenoidal when
/// `β = 0`.
pub fn random_ic_pair(problem: &DppProblem, seed: u64, amplitude: f64) -> IcPair {
    let g = &problem.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = [0, 1].map(|n| problem.loads.networks[n].initial_velocity.clone());
    let modes = 3;
    let (w1, w2) = if problem.material.beta > 0.0 {
        let s = solenoidal_field(g, &mut rng, modes);
        let v = smooth_face_field(g, &mut rng, modes);
        (
            s.iter().zip(&v).map(|(s, v)| 0.5 * s + v).collect::<Vec<_>>(),
            s.iter().zip(&v).map(|(s, v)| 0.5 * s - v).collect::<Vec<_>>(),
        )
    } else {
        (solenoidal_field(g, &mut rng, modes), solenoidal_field(g, &mut rng, modes))
    };
    let w = [w1, w2];
    let second = [0, 1].map(|n| first[n].iter().zip(&w[n]).map(|(a, b)| a + amplitude * b).collect());
    IcPair { first, second }
}

/// Estimated constant by which the pressure difference may be shifted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PressureOffset {
    /// Least-squares shift of the boundary pressure on pressure faces that
    /// best satisfies the discrete momentum balance of the difference.
    Estimated(f64),
    /// No pressure boundary: spatial means of the two pressure differences.
    Means { q1: f64, q2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub identical: bool,
    pub min_energy: f64,
    pub rates: EnergyRates,
    pub log_margin: TimeSeries,
    pub exp_margin: TimeSeries,
    pub t1: f64,
    pub log_tolerance: f64,
    pub exp_tolerance: f64,
    pub offset: PressureOffset,
    pub pass: bool,
}

impl UniquenessReport {
    pub fn min_log_margin(&self) -> f64 {
        self.log_margin.values().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_exp_margin(&self) -> f64 {
        self.exp_margin.values().into_iter().fold(f64::INFINITY, f64::min)
    }
}

fn pressure_offset(problem: &DppProblem, diff: &Trajectory) -> Result<PressureOffset> {
    let g = &problem.grid;
    let has = [problem.boundary.has_pressure_boundary(0), problem.boundary.has_pressure_boundary(1)];
    if !has[0] && !has[1] {
        let last = diff.snapshots.last().unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        return Ok(PressureOffset::Means { q1: mean(&last.p[0]), q2: mean(&last.p[1]) });
    }
    let theta = match diff.scheme {
        Some(s) => s.theta(),
        None => return invalid("pressure offset needs a trajectory produced by the solver"),
    };
    let dt = diff.dt;
    let (mut num, mut den) = (0.0, 0.0);
    for n in 0..2 {
        let inertia = problem.material.inertia_face(g, n);
        let drag = problem.material.drag_face(g, n);
        for bf in &problem.boundary.networks[n].pressure.faces {
            let f = bf.face;
            let h = g.h()[bf.normal_axis()];
            let grad = |s: &StateSnapshot| bf.normal_sign() * (0.0 - s.p[n][bf.cell]) * 2.0 / h;
            let shift = bf.normal_sign() * 2.0 / h;
            for k in 0..diff.steps() {
                let (a, b) = (&diff.snapshots[k], &diff.snapshots[k + 1]);
                let r = inertia[f] * (b.u[n][f] - a.u[n][f]) / dt
                    + theta * (drag[f] * b.u[n][f] + grad(b))
                    + (1.0 - theta) * (drag[f] * a.u[n][f] + grad(a));
                num += r * shift;
                den += shift * shift;
            }
        }
    }
    Ok(PressureOffset::Estimated(if den > 0.0 { -num / den } else { 0.0 }))
}

/// Solves the problem from both initial states and checks the energy of the
/// difference: positivity, log-convexity and the exponential lower bound.
pub fn uniqueness_experiment(
    problem: &DppProblem,
    pair: &IcPair,
    opts: &SolverOptions,
    tol: &Tolerances,
    t1: f64,
) -> Result<UniquenessReport> {
    let mut a = problem.clone();
    let mut b = problem.clone();
    for n in 0..2 {
        a.loads.networks[n].initial_velocity = pair.first[n].clone();
        b.loads.networks[n].initial_velocity = pair.second[n].clone();
    }
    let (ta, _) = solve_with(&a, opts)?;
    let (tb, _) = solve_with(&b, opts)?;
    let diff = difference_trajectory(&ta, &tb)?;
    let rates = energy_rates(&diff, &problem.material)?;
    let f = &rates.formula;
    let emax = f.e.max_abs();
    let min_energy = f.e.values().into_iter().fold(f64::INFINITY, f64::min);
    let identical = pair.first == pair.second || emax == 0.0;

    let hmax = problem.grid.h()[..problem.grid.dim()].iter().fold(0.0_f64, |m, &h| m.max(h));
    let order = opts.scheme.order();
    let log_scale = (0..f.e.len())
        .map(|k| f.e.sample(k)[0] * f.e_ddot.sample(k)[0].abs() + f.e_dot.sample(k)[0].powi(2))
        .fold(0.0, f64::max);
    let log_tolerance = tol.margin(diff.dt, order, hmax, log_scale);
    let exp_tolerance = tol.margin(diff.dt, order, hmax, emax);
    let log_margin = log_convexity_check(f);
    let offset = pressure_offset(problem, &diff)?;
    let exp_margin = if identical {
        TimeSeries::zeros(diff.dt, diff.steps(), Kind::Scalar, 1)
    } else {
        exponential_bound_check(f, t1, exp_tolerance)?
    };
    let pass = if identical {
        emax <= tol.linear_residual
    } else {
        min_energy > 0.0
            && log_margin.values().iter().all(|&m| m >= -log_tolerance)
            && (0..exp_margin.len())
                .filter(|&k| f.e.sample(k)[0] > 10.0 * exp_tolerance)
                .all(|k| exp_margin.sample(k)[0] >= -exp_tolerance)
            && match offset {
                PressureOffset::Estimated(c) => c.abs() <= tol.pressure_offset,
                PressureOffset::Means { .. } => true,
            }
    };
    Ok(UniquenessReport {
        identical,
        min_energy,
        rates,
        log_margin,
        exp_margin,
        t1,
        log_tolerance,
        exp_tolerance,
        offset,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::StateSnapshot;

    fn unit_square() -> (StructuredGrid, Material) {
        let g = StructuredGrid::new(2, &[1.0, 1.0], &[4, 4]).unwrap();
        let m = Material::uniform(&g, 1.0, 1.0, 1.0, [0.5, 0.5], [[1.0, 1.0]; 2]);
        (g, m)
    }

    #[test]
    fn constant_fields() {
        let (g, m) = unit_square();
        let mut s = StateSnapshot::zero(&g, 0.0);
        for f in 0..g.n_faces() {
            if g.face_axis(f) == 0 {
                s.u[0][f] = 1.0;
            } else {
                s.u[1][f] = 2.0;
            }
        }
        let k = kinetic_energy(&g, &s, &m).unwrap();
        assert!((k - 5.0).abs() < 1e-13);
        let ks = seepage_kinetic_energy(&g, &s, &m).unwrap();
        assert!((k - ks).abs() <= 1e-13 * k);
    }

    #[test]
    fn seepage_uses_face_mean() {
        let g = StructuredGrid::new(1, &[1.0], &[2]).unwrap();
        let mut m = Material::uniform(&g, 1.0, 1.0, 1.0, [0.5, 0.5], [[1.0, 1.0]; 2]);
        m.phi[0] = vec![0.2, 0.6];
        let mut s = StateSnapshot::zero(&g, 0.0);
        s.u[0] = vec![1.0, 1.0, 1.0];
        let v = seepage_velocities(&g, &s, &m).unwrap();
        assert_eq!(v[0][1], 1.0 / 0.4);
        assert_eq!(v[0][0], 5.0);
    }

    fn decay_series(lams: &[(f64, f64)], dt: f64, n: usize) -> EnergySeries {
        let e = TimeSeries::scalar_fn(dt, n, |t| lams.iter().map(|(c, l)| c * (-2.0 * l * t).exp()).sum());
        let d = TimeSeries::scalar_fn(dt, n, |t| lams.iter().map(|(c, l)| -2.0 * l * c * (-2.0 * l * t).exp()).sum());
        let dd = TimeSeries::scalar_fn(dt, n, |t| lams.iter().map(|(c, l)| 4.0 * l * l * c * (-2.0 * l * t).exp()).sum());
        EnergySeries { e, e_dot: d, e_ddot: dd, provenance: Provenance::Formula }
    }

    #[test]
    fn single_mode_is_equality() {
        let s = decay_series(&[(2.0, 0.7)], 0.1, 10);
        assert!(log_convexity_check(&s).max_abs() < 1e-13);
        assert!(exponential_bound_check(&s, 0.0, 1e-12).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn two_modes_are_strict() {
        let s = decay_series(&[(1.0, 0.5), (1.0, 2.0)], 0.1, 10);
        // E Ë − Ė² = c₁c₂ 4(λ₁−λ₂)² at t = 0.
        assert!((log_convexity_check(&s).sample(0)[0] - 9.0).abs() < 1e-12);
        let m = exponential_bound_check(&s, 0.0, 1e-12).unwrap();
        assert!(m.values()[1..].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn zero_energy_precondition() {
        let s = decay_series(&[(0.0, 1.0)], 0.1, 4);
        assert!(matches!(exponential_bound_check(&s, 0.0, 1e-12), Err(Error::Precondition(_))));
    }

    #[test]
    fn solenoidal_perturbation() {
        let g = StructuredGrid::new(2, &[1.0, 2.0], &[6, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = solenoidal_field(&g, &mut rng, 3);
        let d = g.divergence(&u).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-12));
        assert!(u.iter().any(|x| x.abs() > 1e-3));
        for bf in g.boundary_faces().faces {
            assert!(u[bf.face].abs() < 1e-14);
        }
        let v = smooth_face_field(&g, &mut rng, 3);
        for bf in g.boundary_faces().faces {
            assert!(v[bf.face].abs() < 1e-14);
        }
    }
}
