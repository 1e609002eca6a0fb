//! Closed-form solutions and the problems that reproduce them.

use std::f64::consts::PI;

use super::{BoundaryLayout, BoundarySpec, DppProblem, LoadSet, Material};
use crate::convolution::{Kind, TimeSeries};
use crate::error::{invalid, Result};
use crate::grid::StructuredGrid;
use crate::solver::{StateSnapshot, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManufacturedCase {
    /// Fluid at rest under a uniform pressure.
    Rest { pressure: f64 },
    /// Uniform x-velocity decaying at `μφᵢ/(γKᵢ)` with zero pressure and no
    /// load. Needs a uniform material and zero pressure data.
    UniformDecay { a1: f64, a2: f64 },
    /// x-dependent exchange-driven flow with body forces chosen to close the
    /// momentum balance. Needs `β > 0`.
    Smooth { amplitude: f64, wavenumber: u32 },
}

impl ManufacturedCase {
    pub fn name(&self) -> &'static str {
        match self {
            ManufacturedCase::Rest { .. } => "rest",
            ManufacturedCase::UniformDecay { .. } => "uniform_decay",
            ManufacturedCase::Smooth { .. } => "smooth",
        }
    }
}

type FaceFn<'a> = Box<dyn Fn(usize, f64, usize) -> f64 + 'a>;
type PointFn<'a> = Box<dyn Fn(usize, f64, [f64; 2]) -> f64 + 'a>;

struct Exact<'a> {
    /// Velocity component normal to face `f`.
    u: FaceFn<'a>,
    p: PointFn<'a>,
    b: FaceFn<'a>,
}

/// Builds the problem whose data reproduce `case`, together with the sampled
/// exact solution on the same grid and time axis.
pub fn manufacture(
    grid: &StructuredGrid,
    material: &Material,
    case: &ManufacturedCase,
    layout: &BoundaryLayout,
    t_final: f64,
    steps: usize,
) -> Result<(DppProblem, Trajectory)> {
    if steps == 0 || !(t_final > 0.0) {
        return invalid("manufactured problems need a positive final time and at least one step");
    }
    let boundary = BoundarySpec::from_layout(grid, layout);
    let (gamma, mu, beta) = (material.gamma, material.mu, material.beta);
    let length = grid.extent()[0];
    let phi_f = [material.phi_face(grid, 0), material.phi_face(grid, 1)];
    let kinv_f = [material.kinv_face(grid, 0), material.kinv_face(grid, 1)];
    let is_x = move |f: usize| grid.face_axis(f) == 0;

    let exact: Exact = match *case {
        ManufacturedCase::Rest { pressure } => {
            let has = [boundary.has_pressure_boundary(0), boundary.has_pressure_boundary(1)];
            let level = [0, 1].map(|n| {
                if has[n] || (beta > 0.0 && (has[0] || has[1])) {
                    pressure
                } else {
                    0.0
                }
            });
            Exact {
                u: Box::new(|_, _, _| 0.0),
                p: Box::new(move |n, _, _| level[n]),
                b: Box::new(|_, _, _| 0.0),
            }
        }
        ManufacturedCase::UniformDecay { a1, a2 } => {
            if !material.is_uniform() {
                return invalid("the uniform decay case needs a uniform material");
            }
            let lambda = [0, 1].map(|n| mu * material.phi[n][0] / (gamma * material.k[n][0][0]));
            let a = [a1, a2];
            Exact {
                u: Box::new(move |n, t, f| if is_x(f) { a[n] * (-lambda[n] * t).exp() } else { 0.0 }),
                p: Box::new(|_, _, _| 0.0),
                b: Box::new(|_, _, _| 0.0),
            }
        }
        ManufacturedCase::Smooth { amplitude, wavenumber } => {
            if !(beta > 0.0) {
                return invalid("the smooth case needs a positive mass-transfer coefficient");
            }
            if wavenumber == 0 {
                return invalid("the smooth case needs a positive wavenumber");
            }
            let amp = amplitude;
            let k = 2.0 * PI * wavenumber as f64 / length;
            let p2 = move |t: f64, x: f64| amp * ((PI * x / length).sin() + x / length) * (1.0 + 0.5 * t);
            let p2x = move |t: f64, x: f64| amp * (PI / length * (PI * x / length).cos() + 1.0 / length) * (1.0 + 0.5 * t);
            let d = move |t: f64, x: f64| amp * mu / beta * (k * x).sin() * t.cos();
            let dx = move |t: f64, x: f64| amp * mu / beta * k * (k * x).cos() * t.cos();
            let sign = [1.0, -1.0];
            let u = move |n: usize, t: f64, x: f64| sign[n] * amp / k * (k * x).cos() * t.cos();
            let ut = move |n: usize, t: f64, x: f64| -sign[n] * amp / k * (k * x).cos() * t.sin();
            let px = move |n: usize, t: f64, x: f64| p2x(t, x) + if n == 0 { dx(t, x) } else { 0.0 };
            Exact {
                u: Box::new(move |n, t, f| if is_x(f) { u(n, t, grid.face_center(f)[0]) } else { 0.0 }),
                p: Box::new(move |n, t, pos| p2(t, pos[0]) + if n == 0 { d(t, pos[0]) } else { 0.0 }),
                b: Box::new(move |n, t, f| {
                    if !is_x(f) {
                        return 0.0;
                    }
                    let x = grid.face_center(f)[0];
                    (gamma / phi_f[n][f] * ut(n, t, x) + mu * kinv_f[n][f] * u(n, t, x) + px(n, t, x)) / gamma
                }),
            }
        }
    };

    let dt = t_final / steps as f64;
    let mut loads = LoadSet::zero(grid, &boundary, dt, steps);
    for n in 0..2 {
        let l = &mut loads.networks[n];
        let bnd = &boundary.networks[n];
        l.body_force = TimeSeries::from_fn(dt, steps, Kind::Face, grid.n_faces(), |t, out| {
            for (f, v) in out.iter_mut().enumerate() {
                *v = (exact.b)(n, t, f);
            }
        });
        l.initial_velocity = (0..grid.n_faces()).map(|f| (exact.u)(n, 0.0, f)).collect();
        l.velocity_data = TimeSeries::from_fn(dt, steps, Kind::Boundary, bnd.velocity.len(), |t, out| {
            for (v, bf) in out.iter_mut().zip(&bnd.velocity.faces) {
                *v = bf.normal_sign() * (exact.u)(n, t, bf.face);
            }
        });
        l.pressure_data = TimeSeries::from_fn(dt, steps, Kind::Boundary, bnd.pressure.len(), |t, out| {
            for (v, bf) in out.iter_mut().zip(&bnd.pressure.faces) {
                *v = (exact.p)(n, t, grid.face_center(bf.face));
            }
        });
    }

    let bfaces = grid.boundary_faces();
    let snapshots = (0..=steps)
        .map(|k| {
            let t = k as f64 * dt;
            let mut s = StateSnapshot::zero(grid, t);
            for n in 0..2 {
                s.u[n] = (0..grid.n_faces()).map(|f| (exact.u)(n, t, f)).collect();
                s.p[n] = (0..grid.n_cells()).map(|c| (exact.p)(n, t, grid.cell_center(c))).collect();
                s.trace[n] = bfaces.faces.iter().map(|bf| (exact.p)(n, t, grid.face_center(bf.face))).collect();
            }
            s
        })
        .collect();

    let problem = DppProblem { grid: grid.clone(), material: material.clone(), boundary, loads, t_final, steps };
    let reference = Trajectory { grid: grid.clone(), dt, scheme: None, snapshots };
    Ok((problem, reference))
}
