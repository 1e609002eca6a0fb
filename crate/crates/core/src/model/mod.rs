//! Problem definition: material, boundary partitions, loads, initial data.

mod manufacture;

pub use manufacture::{manufacture, ManufacturedCase};

use crate::convolution::{Kind, TimeSeries};
use crate::grid::{BoundaryFaceSet, CellField, FaceField, Side, StructuredGrid};

/// Index of the macro network; the micro network is `1`.
pub const MACRO: usize = 0;
pub const MICRO: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    /// True fluid density.
    pub gamma: f64,
    /// Dynamic viscosity.
    pub mu: f64,
    /// Mass-transfer coefficient.
    pub beta: f64,
    /// Porosity per cell, per network.
    pub phi: [CellField; 2],
    /// Diagonal permeability `(kx, ky)` per cell, per network. `ky` is unused in 1D.
    pub k: [Vec<[f64; 2]>; 2],
}

impl Material {
    pub fn uniform(grid: &StructuredGrid, gamma: f64, mu: f64, beta: f64, phi: [f64; 2], k: [[f64; 2]; 2]) -> Self {
        let n = grid.n_cells();
        Self {
            gamma,
            mu,
            beta,
            phi: [vec![phi[0]; n], vec![phi[1]; n]],
            k: [vec![k[0]; n], vec![k[1]; n]],
        }
    }

    /// Porosity at faces: mean of the adjacent cells.
    pub fn phi_face(&self, grid: &StructuredGrid, net: usize) -> FaceField {
        (0..grid.n_faces())
            .map(|f| match grid.face_cells(f) {
                (Some(a), Some(b)) => 0.5 * (self.phi[net][a] + self.phi[net][b]),
                (Some(a), None) | (None, Some(a)) => self.phi[net][a],
                (None, None) => unreachable!(),
            })
            .collect()
    }

    /// Inverse permeability normal to each face: mean of the adjacent cells' inverses.
    pub fn kinv_face(&self, grid: &StructuredGrid, net: usize) -> FaceField {
        (0..grid.n_faces())
            .map(|f| {
                let ax = grid.face_axis(f);
                let inv = |c: usize| 1.0 / self.k[net][c][ax];
                match grid.face_cells(f) {
                    (Some(a), Some(b)) => 0.5 * (inv(a) + inv(b)),
                    (Some(a), None) | (None, Some(a)) => inv(a),
                    (None, None) => unreachable!(),
                }
            })
            .collect()
    }

    /// `γ/φ` at faces.
    pub fn inertia_face(&self, grid: &StructuredGrid, net: usize) -> FaceField {
        self.phi_face(grid, net).iter().map(|p| self.gamma / p).collect()
    }

    /// `μ K⁻¹` at faces.
    pub fn drag_face(&self, grid: &StructuredGrid, net: usize) -> FaceField {
        self.kinv_face(grid, net).iter().map(|k| self.mu * k).collect()
    }

    pub fn is_uniform(&self) -> bool {
        (0..2).all(|n| {
            self.phi[n].iter().all(|&p| p == self.phi[n][0]) && self.k[n].iter().all(|&k| k == self.k[n][0])
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Velocity,
    Pressure,
}

/// Which kind of condition each side carries, per network.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLayout {
    pub networks: [Vec<(Side, BcKind)>; 2],
}

impl BoundaryLayout {
    pub fn same_for_both(sides: &[(Side, BcKind)]) -> Self {
        Self { networks: [sides.to_vec(), sides.to_vec()] }
    }

    pub fn kind(&self, net: usize, side: Side) -> Option<BcKind> {
        self.networks[net].iter().find(|(s, _)| *s == side).map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkBoundary {
    /// Faces with prescribed normal velocity.
    pub velocity: BoundaryFaceSet,
    /// Faces with prescribed pressure.
    pub pressure: BoundaryFaceSet,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySpec {
    pub networks: [NetworkBoundary; 2],
}

impl BoundarySpec {
    /// Builds the partition from a per-side layout. Sides missing from the
    /// layout are left uncovered (and reported by `validate`).
    pub fn from_layout(grid: &StructuredGrid, layout: &BoundaryLayout) -> Self {
        let mut spec = BoundarySpec::default();
        for net in 0..2 {
            for &side in grid.sides() {
                let faces = grid.side_faces(side);
                match layout.kind(net, side) {
                    Some(BcKind::Velocity) => spec.networks[net].velocity.faces.extend(faces),
                    Some(BcKind::Pressure) => spec.networks[net].pressure.faces.extend(faces),
                    None => {}
                }
            }
        }
        spec
    }

    pub fn has_pressure_boundary(&self, net: usize) -> bool {
        !self.networks[net].pressure.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLoads {
    /// Specific body force, face components.
    pub body_force: TimeSeries,
    pub initial_velocity: FaceField,
    /// Prescribed `u·n̂` on the velocity faces, in the order of the face set.
    pub velocity_data: TimeSeries,
    /// Prescribed pressure on the pressure faces, in the order of the face set.
    pub pressure_data: TimeSeries,
}

impl NetworkLoads {
    pub fn zero(grid: &StructuredGrid, bnd: &NetworkBoundary, dt: f64, steps: usize) -> Self {
        Self {
            body_force: TimeSeries::zeros(dt, steps, Kind::Face, grid.n_faces()),
            initial_velocity: vec![0.0; grid.n_faces()],
            velocity_data: TimeSeries::zeros(dt, steps, Kind::Boundary, bnd.velocity.len()),
            pressure_data: TimeSeries::zeros(dt, steps, Kind::Boundary, bnd.pressure.len()),
        }
    }

    /// `self + c · other`, component by component.
    pub fn axpy(&self, c: f64, other: &NetworkLoads) -> crate::Result<NetworkLoads> {
        Ok(NetworkLoads {
            body_force: self.body_force.axpy(c, &other.body_force)?,
            initial_velocity: self
                .initial_velocity
                .iter()
                .zip(&other.initial_velocity)
                .map(|(a, b)| a + c * b)
                .collect(),
            velocity_data: self.velocity_data.axpy(c, &other.velocity_data)?,
            pressure_data: self.pressure_data.axpy(c, &other.pressure_data)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSet {
    pub networks: [NetworkLoads; 2],
}

impl LoadSet {
    pub fn zero(grid: &StructuredGrid, bnd: &BoundarySpec, dt: f64, steps: usize) -> Self {
        Self {
            networks: [
                NetworkLoads::zero(grid, &bnd.networks[0], dt, steps),
                NetworkLoads::zero(grid, &bnd.networks[1], dt, steps),
            ],
        }
    }

    pub fn axpy(&self, c: f64, other: &LoadSet) -> crate::Result<LoadSet> {
        Ok(LoadSet {
            networks: [self.networks[0].axpy(c, &other.networks[0])?, self.networks[1].axpy(c, &other.networks[1])?],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DppProblem {
    pub grid: StructuredGrid,
    pub material: Material,
    pub boundary: BoundarySpec,
    pub loads: LoadSet,
    pub t_final: f64,
    pub steps: usize,
}

impl DppProblem {
    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn with_loads(&self, loads: LoadSet) -> DppProblem {
        DppProblem { loads, ..self.clone() }
    }
}

/// A broken invariant, named as in the documentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

pub fn validate(problem: &DppProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |invariant: &'static str, detail: String| out.push(Violation { invariant, detail });
    let g = &problem.grid;
    let m = &problem.material;

    if !(m.gamma > 0.0) {
        push("non-positive density", format!("gamma = {}", m.gamma));
    }
    if !(m.mu > 0.0) {
        push("non-positive viscosity", format!("mu = {}", m.mu));
    }
    if !(m.beta >= 0.0) {
        push("negative mass-transfer coefficient", format!("beta = {}", m.beta));
    }
    for net in 0..2 {
        if m.phi[net].len() != g.n_cells() {
            push("shape mismatch", format!("network {} porosity has {} values", net + 1, m.phi[net].len()));
        } else if let Some((c, p)) = m.phi[net].iter().enumerate().find(|(_, &p)| !(p > 0.0 && p < 1.0)) {
            push("porosity out of (0,1)", format!("network {} cell {c}: {p}", net + 1));
        }
        if m.k[net].len() != g.n_cells() {
            push("shape mismatch", format!("network {} permeability has {} values", net + 1, m.k[net].len()));
        } else if let Some((c, k)) =
            m.k[net].iter().enumerate().find(|(_, k)| k[..g.dim()].iter().any(|&v| !(v > 0.0) || !v.is_finite()))
        {
            push("non-positive permeability", format!("network {} cell {c}: {:?}", net + 1, &k[..g.dim()]));
        }
    }

    let all = g.boundary_faces();
    for net in 0..2 {
        let b = &problem.boundary.networks[net];
        for bf in &b.velocity.faces {
            if b.pressure.contains(bf.face) {
                push("partition overlap", format!("network {} face {} is in both sets", net + 1, bf.face));
            }
        }
        for bf in &all.faces {
            if !b.velocity.contains(bf.face) && !b.pressure.contains(bf.face) {
                push(
                    "partition incomplete",
                    format!("network {} face {} ({}) has no condition", net + 1, bf.face, bf.side.name()),
                );
            }
        }
        for bf in b.velocity.faces.iter().chain(&b.pressure.faces) {
            if !all.faces.contains(bf) {
                push("not a boundary face", format!("network {} face {}", net + 1, bf.face));
            }
        }
    }

    if !(problem.t_final > 0.0) || !problem.t_final.is_finite() {
        push("non-positive final time", format!("T = {}", problem.t_final));
    }
    if problem.steps == 0 {
        push("zero time steps", "N must be at least 1".into());
    }
    if problem.steps > 0 && problem.t_final > 0.0 {
        let dt = problem.dt();
        for net in 0..2 {
            let l = &problem.loads.networks[net];
            let b = &problem.boundary.networks[net];
            let series = [
                ("body force", &l.body_force, g.n_faces()),
                ("velocity data", &l.velocity_data, b.velocity.len()),
                ("pressure data", &l.pressure_data, b.pressure.len()),
            ];
            for (name, s, w) in series {
                if s.width() != w || s.steps() != problem.steps || (s.dt() - dt).abs() > 1e-12 * dt {
                    push(
                        "shape mismatch",
                        format!(
                            "network {} {name}: width {} over {} steps, expected {w} over {}",
                            net + 1,
                            s.width(),
                            s.steps(),
                            problem.steps
                        ),
                    );
                }
            }
            if l.initial_velocity.len() != g.n_faces() {
                push("shape mismatch", format!("network {} initial velocity", net + 1));
            }
        }
    }
    out
}

/// Mismatches between initial and boundary data that are admitted but worth
/// flagging: initial normal velocity against the velocity data at `t = 0`, and
/// the summed mass balance of the initial velocities.
pub fn compatibility_warnings(problem: &DppProblem) -> Vec<String> {
    let mut out = Vec::new();
    let g = &problem.grid;
    let scale = |v: &[f64]| v.iter().fold(1e-300_f64, |m, x| m.max(x.abs()));
    for net in 0..2 {
        let l = &problem.loads.networks[net];
        let b = &problem.boundary.networks[net];
        let s = scale(&l.initial_velocity).max(scale(l.velocity_data.sample(0)));
        for (k, bf) in b.velocity.faces.iter().enumerate() {
            let un = bf.normal_sign() * l.initial_velocity[bf.face];
            let d = (un - l.velocity_data.sample(0)[k]).abs();
            if d > 1e-10 * s {
                out.push(format!(
                    "network {}: initial normal velocity {un} differs from boundary data {} on face {}",
                    net + 1,
                    l.velocity_data.sample(0)[k],
                    bf.face
                ));
                break;
            }
        }
    }
    let u0 = &problem.loads.networks;
    let sum: Vec<f64> = u0[0].initial_velocity.iter().zip(&u0[1].initial_velocity).map(|(a, b)| a + b).collect();
    let div = g.divergence_unchecked(&sum);
    let hmin = g.h().iter().fold(f64::INFINITY, |m, &h| m.min(h));
    let s = scale(&u0[0].initial_velocity).max(scale(&u0[1].initial_velocity)) / hmin;
    let worst = div.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if worst > 1e-10 * s {
        out.push(format!("initial velocities violate the summed mass balance (max |div| = {worst:e})"));
    }
    if problem.material.beta == 0.0 {
        for net in 0..2 {
            let d = g.divergence_unchecked(&u0[net].initial_velocity);
            let worst = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if worst > 1e-10 * s {
                out.push(format!(
                    "network {}: initial velocity is not divergence-free with beta = 0 (max |div| = {worst:e})",
                    net + 1
                ));
            }
        }
    }
    out
}
