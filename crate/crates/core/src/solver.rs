//! Implicit time integration of the coupled four-field system.
//!
//! Each step eliminates the face velocities (the velocity block is diagonal)
//! and solves the symmetric positive-definite pressure system for both
//! networks at once, with unknowns interleaved per cell (`2 c + network`).
//!
//! Momentum at free faces uses the θ-weighted drag, pressure gradient and
//! body force; mass balance is imposed at the new time level. Velocity data
//! are imposed strongly on velocity faces, pressure data through the one-sided
//! gradient on pressure faces. On velocity faces the pressure trace is
//! recovered from the face momentum balance and stored with the snapshot.

use crate::convolution::{Kind, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::grid::{CellField, FaceField, StructuredGrid};
use crate::linsys::SpdSystem;
use crate::model::{validate, DppProblem};

pub const LINEAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
}

impl Scheme {
    pub fn theta(self) -> f64 {
        match self {
            Scheme::BackwardEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }

    /// Formal temporal order.
    pub fn order(self) -> f64 {
        match self {
            Scheme::BackwardEuler => 1.0,
            Scheme::CrankNicolson => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::BackwardEuler => "backward_euler",
            Scheme::CrankNicolson => "crank_nicolson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub t: f64,
    pub u: [FaceField; 2],
    pub p: [CellField; 2],
    /// Pressure at every boundary face, by boundary ordinal: the data on
    /// pressure faces, the recovered trace on velocity faces.
    pub trace: [Vec<f64>; 2],
}

impl StateSnapshot {
    pub fn zero(grid: &StructuredGrid, t: f64) -> Self {
        let (nf, nc, nb) = (grid.n_faces(), grid.n_cells(), grid.n_boundary_faces());
        Self {
            t,
            u: [vec![0.0; nf], vec![0.0; nf]],
            p: [vec![0.0; nc], vec![0.0; nc]],
            trace: [vec![0.0; nb], vec![0.0; nb]],
        }
    }

    fn combine(&self, c: f64, other: &StateSnapshot) -> StateSnapshot {
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + c * y).collect::<Vec<_>>();
        StateSnapshot {
            t: self.t,
            u: [f(&self.u[0], &other.u[0]), f(&self.u[1], &other.u[1])],
            p: [f(&self.p[0], &other.p[0]), f(&self.p[1], &other.p[1])],
            trace: [f(&self.trace[0], &other.trace[0]), f(&self.trace[1], &other.trace[1])],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: StructuredGrid,
    pub dt: f64,
    /// Scheme that produced the trajectory; `None` for sampled reference fields.
    pub scheme: Option<Scheme>,
    pub snapshots: Vec<StateSnapshot>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn velocity(&self, net: usize) -> TimeSeries {
        self.series(Kind::Face, self.grid.n_faces(), |s| &s.u[net])
    }

    pub fn pressure(&self, net: usize) -> TimeSeries {
        self.series(Kind::Cell, self.grid.n_cells(), |s| &s.p[net])
    }

    pub fn trace(&self, net: usize) -> TimeSeries {
        self.series(Kind::Boundary, self.grid.n_boundary_faces(), |s| &s.trace[net])
    }

    fn series(&self, kind: Kind, width: usize, get: impl Fn(&StateSnapshot) -> &Vec<f64>) -> TimeSeries {
        let mut out = TimeSeries::zeros(self.dt, self.steps(), kind, width);
        for (k, s) in self.snapshots.iter().enumerate() {
            out.sample_mut(k).copy_from_slice(get(s));
        }
        out
    }

    /// Rebuilds a trajectory from field series (velocities, pressures, traces).
    pub fn from_series(
        grid: &StructuredGrid,
        scheme: Option<Scheme>,
        u: [&TimeSeries; 2],
        p: [&TimeSeries; 2],
        trace: [&TimeSeries; 2],
    ) -> Trajectory {
        let snapshots = (0..u[0].len())
            .map(|k| StateSnapshot {
                t: u[0].time(k),
                u: [u[0].sample(k).to_vec(), u[1].sample(k).to_vec()],
                p: [p[0].sample(k).to_vec(), p[1].sample(k).to_vec()],
                trace: [trace[0].sample(k).to_vec(), trace[1].sample(k).to_vec()],
            })
            .collect();
        Trajectory { grid: grid.clone(), dt: u[0].dt(), scheme, snapshots }
    }

    /// `self + c · other`, snapshot by snapshot.
    pub fn combine(&self, c: f64, other: &Trajectory) -> Result<Trajectory> {
        if self.grid != other.grid || self.steps() != other.steps() || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return invalid("trajectories live on different grids or time axes");
        }
        Ok(Trajectory {
            grid: self.grid.clone(),
            dt: self.dt,
            scheme: if self.scheme == other.scheme { self.scheme } else { None },
            snapshots: self.snapshots.iter().zip(&other.snapshots).map(|(a, b)| a.combine(c, b)).collect(),
        })
    }
}

/// Snapshotwise `a − b`.
pub fn difference_trajectory(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    a.combine(-1.0, b)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearSystemStats {
    pub unknowns: usize,
    pub solves: usize,
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub scheme: Scheme,
    pub tolerance: f64,
    /// Allow zero-mean pressures when `β = 0` leaves a network without any
    /// pressure face.
    pub pin_pressure: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { scheme: Scheme::CrankNicolson, tolerance: LINEAR_TOLERANCE, pin_pressure: false }
    }
}

impl SolverOptions {
    pub fn new(scheme: Scheme) -> Self {
        Self { scheme, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FaceBc {
    Free,
    Velocity(usize),
    Pressure(usize),
}

/// Pressure nullspace handling.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Gauge {
    None,
    /// Zero mean of `p₁ + p₂`.
    Joint,
    /// Zero mean of each flagged network.
    Separate([bool; 2]),
}

struct Network {
    bc: Vec<FaceBc>,
    inertia: Vec<f64>,
    drag: Vec<f64>,
}

struct Context<'a> {
    pb: &'a DppProblem,
    nets: [Network; 2],
    gauge: Gauge,
}

fn dof(c: usize, net: usize) -> usize {
    2 * c + net
}

impl<'a> Context<'a> {
    fn new(pb: &'a DppProblem, pin_pressure: bool) -> Result<Self> {
        let v = validate(pb);
        if !v.is_empty() {
            let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            return invalid(msg.join("; "));
        }
        let g = &pb.grid;
        let net = |n: usize| {
            let mut bc = vec![FaceBc::Free; g.n_faces()];
            for (k, b) in pb.boundary.networks[n].velocity.faces.iter().enumerate() {
                bc[b.face] = FaceBc::Velocity(k);
            }
            for (k, b) in pb.boundary.networks[n].pressure.faces.iter().enumerate() {
                bc[b.face] = FaceBc::Pressure(k);
            }
            Network {
                bc,
                inertia: pb.material.inertia_face(g, n),
                drag: pb.material.drag_face(g, n),
            }
        };
        let lacks = [!pb.boundary.has_pressure_boundary(0), !pb.boundary.has_pressure_boundary(1)];
        let gauge = if pb.material.beta > 0.0 {
            if lacks[0] && lacks[1] {
                Gauge::Joint
            } else {
                Gauge::None
            }
        } else if lacks[0] || lacks[1] {
            if !pin_pressure {
                return Err(Error::Nullspace(format!(
                    "beta = 0 and network(s) {} have no pressure boundary; enable pressure pinning for zero-mean pressures",
                    (0..2).filter(|&n| lacks[n]).map(|n| (n + 1).to_string()).collect::<Vec<_>>().join(", ")
                )));
            }
            Gauge::Separate(lacks)
        } else {
            Gauge::None
        };
        Ok(Self { pb, nets: [net(0), net(1)], gauge })
    }

    fn pinned(&self) -> Vec<usize> {
        match self.gauge {
            Gauge::None => vec![],
            Gauge::Joint => vec![dof(0, 0)],
            Gauge::Separate(f) => (0..2).filter(|&n| f[n]).map(|n| dof(0, n)).collect(),
        }
    }

    /// Triplets of `−V D C⁻¹ G₀` for one network, with `coef` the diagonal of `C`
    /// at free faces and the result scaled by `theta`.
    fn laplacian(&self, net: usize, coef: &[f64], theta: f64, map: impl Fn(usize) -> usize) -> Vec<(usize, usize, f64)> {
        let g = &self.pb.grid;
        let vol = g.cell_volume();
        let mut t = Vec::new();
        for f in 0..g.n_faces() {
            let h = g.h()[g.face_axis(f)];
            match (self.nets[net].bc[f], g.face_cells(f)) {
                (FaceBc::Free, (Some(l), Some(r))) => {
                    let k = vol * theta / (coef[f] * h * h);
                    let (l, r) = (map(l), map(r));
                    t.extend([(l, l, k), (r, r, k), (l, r, -k), (r, l, -k)]);
                }
                (FaceBc::Pressure(_), (a, b)) => {
                    let c = map(a.or(b).unwrap());
                    t.push((c, c, 2.0 * vol * theta / (coef[f] * h * h)));
                }
                _ => {}
            }
        }
        t
    }

    /// Outward sign of face `f` with respect to cell `c`.
    fn outward(&self, f: usize, c: usize) -> f64 {
        match self.pb.grid.face_cells(f) {
            (Some(l), _) if l == c => 1.0,
            _ => -1.0,
        }
    }

    fn normal_sign(&self, f: usize) -> f64 {
        match self.pb.grid.face_cells(f) {
            (Some(_), None) => 1.0,
            _ => -1.0,
        }
    }

    /// Full gradient at face `f` given boundary pressure `pb_val` on boundary faces.
    fn grad(&self, p: &[f64], f: usize, pb_val: f64) -> f64 {
        let g = &self.pb.grid;
        let h = g.h()[g.face_axis(f)];
        match g.face_cells(f) {
            (Some(l), Some(r)) => (p[r] - p[l]) / h,
            (a, b) => self.normal_sign(f) * (pb_val - p[a.or(b).unwrap()]) * 2.0 / h,
        }
    }

    fn apply_gauge(&self, p: &mut [CellField; 2]) {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        match self.gauge {
            Gauge::None => {}
            Gauge::Joint => {
                let m = 0.5 * (mean(&p[0]) + mean(&p[1]));
                p.iter_mut().for_each(|q| q.iter_mut().for_each(|x| *x -= m));
            }
            Gauge::Separate(f) => {
                for n in 0..2 {
                    if f[n] {
                        let m = mean(&p[n]);
                        p[n].iter_mut().for_each(|x| *x -= m);
                    }
                }
            }
        }
    }
}

/// Consistent pressure and boundary traces at `t = 0`.
fn initial_state(ctx: &Context, tol: f64, stats: &mut LinearSystemStats) -> Result<StateSnapshot> {
    let pb = ctx.pb;
    let g = &pb.grid;
    let (nc, vol) = (g.n_cells(), g.cell_volume());
    let dt = pb.dt();
    let gamma = pb.material.gamma;
    let mut snap = StateSnapshot::zero(g, 0.0);

    // Rates of the prescribed normal velocities at t = 0.
    let un_rate = |net: usize, k: usize| {
        let d = &pb.loads.networks[net].velocity_data;
        if d.steps() >= 2 {
            (-3.0 * d.sample(0)[k] + 4.0 * d.sample(1)[k] - d.sample(2)[k]) / (2.0 * dt)
        } else {
            (d.sample(1)[k] - d.sample(0)[k]) / dt
        }
    };

    // Right-hand side of the pressure equation for each network.
    let mut rhs = [vec![0.0; nc], vec![0.0; nc]];
    for net in 0..2 {
        let n = &ctx.nets[net];
        let l = &pb.loads.networks[net];
        snap.u[net] = l.initial_velocity.clone();
        for f in 0..g.n_faces() {
            let h = g.h()[g.face_axis(f)];
            let (lo, hi) = g.face_cells(f);
            match n.bc[f] {
                FaceBc::Velocity(k) => {
                    let c = lo.or(hi).unwrap();
                    rhs[net][c] -= vol * un_rate(net, k) / h;
                }
                bc => {
                    let mut r = gamma * l.body_force.sample(0)[f] - n.drag[f] * l.initial_velocity[f];
                    if let FaceBc::Pressure(k) = bc {
                        r -= ctx.normal_sign(f) * l.pressure_data.sample(0)[k] * 2.0 / h;
                    }
                    for c in [lo, hi].into_iter().flatten() {
                        rhs[net][c] -= vol * ctx.outward(f, c) / h * r / n.inertia[f];
                    }
                }
            }
        }
    }

    let beta = pb.material.beta;
    let mut worst: f64 = 0.0;
    if beta > 0.0 {
        // p₁ − p₂ follows from the mass balance of the initial velocities.
        let d1 = g.divergence_unchecked(&snap.u[0]);
        let d2 = g.divergence_unchecked(&snap.u[1]);
        let mu = pb.material.mu;
        let d0: Vec<f64> = (0..nc).map(|c| 0.5 * mu / beta * (d2[c] - d1[c])).collect();
        let mut trip = ctx.laplacian(0, &ctx.nets[0].inertia, 1.0, |c| c);
        let l1 = trip.clone();
        trip.extend(ctx.laplacian(1, &ctx.nets[1].inertia, 1.0, |c| c));
        let mut b: Vec<f64> = (0..nc).map(|c| rhs[0][c] + rhs[1][c]).collect();
        for &(i, j, v) in &l1 {
            b[i] -= v * d0[j];
        }
        let pinned = if ctx.gauge == Gauge::Joint { vec![0] } else { vec![] };
        let sys = SpdSystem::new(nc, &trip, &pinned)?;
        let (p2, rel) = sys.solve(&b);
        worst = worst.max(rel);
        snap.p[1] = p2;
        snap.p[0] = (0..nc).map(|c| snap.p[1][c] + d0[c]).collect();
    } else {
        for net in 0..2 {
            let trip = ctx.laplacian(net, &ctx.nets[net].inertia, 1.0, |c| c);
            let pinned = match ctx.gauge {
                Gauge::Separate(f) if f[net] => vec![0],
                _ => vec![],
            };
            let sys = SpdSystem::new(nc, &trip, &pinned)?;
            let (p, rel) = sys.solve(&rhs[net]);
            worst = worst.max(rel);
            snap.p[net] = p;
        }
    }
    stats.solves += 1;
    stats.max_relative_residual = stats.max_relative_residual.max(worst);
    if worst > tol {
        return Err(Error::Numerical {
            message: format!("initial pressure system residual {worst:e} exceeds {tol:e}; boundary and initial data are inconsistent"),
            stats: stats.clone(),
        });
    }
    ctx.apply_gauge(&mut snap.p);

    for net in 0..2 {
        let n = &ctx.nets[net];
        let l = &pb.loads.networks[net];
        for (k, b) in g.boundary_faces().faces.iter().enumerate() {
            let f = b.face;
            let h = g.h()[b.normal_axis()];
            snap.trace[net][k] = match n.bc[f] {
                FaceBc::Pressure(j) => l.pressure_data.sample(0)[j],
                FaceBc::Velocity(j) => {
                    let a = b.normal_sign() * un_rate(net, j);
                    let r = gamma * l.body_force.sample(0)[f] - n.drag[f] * snap.u[net][f] - n.inertia[f] * a;
                    snap.p[net][b.cell] + b.normal_sign() * h * r / 2.0
                }
                FaceBc::Free => unreachable!(),
            };
        }
    }
    Ok(snap)
}

/// A factored step operator for one problem, scheme and step size.
pub struct Stepper<'a> {
    ctx: Context<'a>,
    theta: f64,
    coef: [Vec<f64>; 2],
    sys: SpdSystem,
    tol: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a DppProblem, opts: &SolverOptions) -> Result<Self> {
        let ctx = Context::new(problem, opts.pin_pressure)?;
        let g = &problem.grid;
        let dt = problem.dt();
        let theta = opts.scheme.theta();
        let coef = [0, 1].map(|n| {
            let net = &ctx.nets[n];
            (0..g.n_faces()).map(|f| net.inertia[f] / dt + theta * net.drag[f]).collect::<Vec<_>>()
        });
        let mut trip = Vec::new();
        for n in 0..2 {
            trip.extend(ctx.laplacian(n, &coef[n], theta, |c| dof(c, n)));
        }
        let beta = problem.material.beta;
        if beta > 0.0 {
            let k = g.cell_volume() * beta / problem.material.mu;
            for c in 0..g.n_cells() {
                let (a, b) = (dof(c, 0), dof(c, 1));
                trip.extend([(a, a, k), (b, b, k), (a, b, -k), (b, a, -k)]);
            }
        }
        let sys = SpdSystem::new(2 * g.n_cells(), &trip, &ctx.pinned())?;
        Ok(Self { ctx, theta, coef, sys, tol: opts.tolerance })
    }

    pub fn initial(&self, stats: &mut LinearSystemStats) -> Result<StateSnapshot> {
        initial_state(&self.ctx, self.tol, stats)
    }

    /// Advances `snap` (at step `k`) to step `k + 1`.
    pub fn advance(&self, k: usize, snap: &StateSnapshot, stats: &mut LinearSystemStats) -> Result<StateSnapshot> {
        let pb = self.ctx.pb;
        let g = &pb.grid;
        let (nc, vol) = (g.n_cells(), g.cell_volume());
        let dt = pb.dt();
        let th = self.theta;
        let gamma = pb.material.gamma;
        let mut rhs = vec![0.0; 2 * nc];
        let mut r_free = [vec![0.0; g.n_faces()], vec![0.0; g.n_faces()]];
        let mut un_new = [vec![0.0; g.n_faces()], vec![0.0; g.n_faces()]];

        for net in 0..2 {
            let n = &self.ctx.nets[net];
            let l = &pb.loads.networks[net];
            let (b0, b1) = (l.body_force.sample(k), l.body_force.sample(k + 1));
            let u = &snap.u[net];
            for f in 0..g.n_faces() {
                let h = g.h()[g.face_axis(f)];
                let (lo, hi) = g.face_cells(f);
                match n.bc[f] {
                    FaceBc::Velocity(j) => {
                        let c = lo.or(hi).unwrap();
                        let un = l.velocity_data.sample(k + 1)[j];
                        un_new[net][f] = self.ctx.normal_sign(f) * un;
                        rhs[dof(c, net)] -= vol * un / h;
                    }
                    bc => {
                        let pb_old = match bc {
                            FaceBc::Pressure(j) => l.pressure_data.sample(k)[j],
                            _ => 0.0,
                        };
                        let grad_old = self.ctx.grad(&snap.p[net], f, pb_old);
                        let mut r = n.inertia[f] / dt * u[f] - (1.0 - th) * (n.drag[f] * u[f] + grad_old)
                            + gamma * (th * b1[f] + (1.0 - th) * b0[f]);
                        if let FaceBc::Pressure(j) = bc {
                            r -= th * self.ctx.normal_sign(f) * l.pressure_data.sample(k + 1)[j] * 2.0 / h;
                        }
                        r_free[net][f] = r;
                        for c in [lo, hi].into_iter().flatten() {
                            rhs[dof(c, net)] -= vol * self.ctx.outward(f, c) / h * r / self.coef[net][f];
                        }
                    }
                }
            }
        }

        let (x, rel) = self.sys.solve(&rhs);
        stats.solves += 1;
        stats.max_relative_residual = stats.max_relative_residual.max(rel);
        if !(rel <= self.tol) {
            return Err(Error::Numerical {
                message: format!("step {} pressure system residual {rel:e} exceeds {:e}", k + 1, self.tol),
                stats: stats.clone(),
            });
        }
        let mut p = [(0..nc).map(|c| x[dof(c, 0)]).collect::<Vec<_>>(), (0..nc).map(|c| x[dof(c, 1)]).collect()];
        self.ctx.apply_gauge(&mut p);

        let mut out = StateSnapshot::zero(g, (k + 1) as f64 * dt);
        for net in 0..2 {
            let n = &self.ctx.nets[net];
            let l = &pb.loads.networks[net];
            for f in 0..g.n_faces() {
                out.u[net][f] = match n.bc[f] {
                    FaceBc::Velocity(_) => un_new[net][f],
                    _ => (r_free[net][f] - th * self.ctx.grad(&p[net], f, 0.0)) / self.coef[net][f],
                };
            }
            for (kb, b) in g.boundary_faces().faces.iter().enumerate() {
                let f = b.face;
                let h = g.h()[b.normal_axis()];
                out.trace[net][kb] = match n.bc[f] {
                    FaceBc::Pressure(j) => l.pressure_data.sample(k + 1)[j],
                    FaceBc::Velocity(_) => {
                        let bbar = th * l.body_force.sample(k + 1)[f] + (1.0 - th) * l.body_force.sample(k)[f];
                        let old = n.drag[f] * snap.u[net][f] + self.ctx.grad(&snap.p[net], f, snap.trace[net][kb]);
                        let r = gamma * bbar
                            - n.inertia[f] * (out.u[net][f] - snap.u[net][f]) / dt
                            - th * n.drag[f] * out.u[net][f]
                            - (1.0 - th) * old;
                        p[net][b.cell] + b.normal_sign() * h * r / (2.0 * th)
                    }
                    FaceBc::Free => unreachable!(),
                };
            }
        }
        out.p = p;
        Ok(out)
    }
}

/// One step from `snap`, which must sit on the problem's time grid.
pub fn step(problem: &DppProblem, snap: &StateSnapshot, scheme: Scheme) -> Result<StateSnapshot> {
    let stepper = Stepper::new(problem, &SolverOptions::new(scheme))?;
    let k = (snap.t / problem.dt()).round() as usize;
    if k >= problem.steps {
        return invalid(format!("snapshot at t = {} is at or past the final time", snap.t));
    }
    stepper.advance(k, snap, &mut LinearSystemStats::default())
}

pub fn solve(problem: &DppProblem, scheme: Scheme) -> Result<(Trajectory, LinearSystemStats)> {
    solve_with(problem, &SolverOptions::new(scheme))
}

pub fn solve_with(problem: &DppProblem, opts: &SolverOptions) -> Result<(Trajectory, LinearSystemStats)> {
    let stepper = Stepper::new(problem, opts)?;
    let mut stats = LinearSystemStats { unknowns: 2 * problem.grid.n_cells(), ..Default::default() };
    let mut snaps = Vec::with_capacity(problem.steps + 1);
    snaps.push(stepper.initial(&mut stats)?);
    for k in 0..problem.steps {
        let next = stepper.advance(k, &snaps[k], &mut stats)?;
        snaps.push(next);
    }
    Ok((
        Trajectory { grid: problem.grid.clone(), dt: problem.dt(), scheme: Some(opts.scheme), snapshots: snaps },
        stats,
    ))
}
