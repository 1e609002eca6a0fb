//! Convolution functionals pairing a solution with a load set, and the
//! reciprocity residual between two solution/load pairs.

use crate::convolution::{conv, time_derivative, Kind, TimeSeries};
use crate::error::{invalid, Result};
use crate::grid::{FaceRule, StructuredGrid};
use crate::model::{DppProblem, Material, NetworkBoundary, NetworkLoads};
use crate::solver::Trajectory;

/// Solution fields of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGroup {
    pub u: TimeSeries,
    pub p: TimeSeries,
    /// Boundary pressure by boundary ordinal.
    pub trace: TimeSeries,
}

impl SolutionGroup {
    pub fn from_trajectory(traj: &Trajectory, net: usize) -> Self {
        Self { u: traj.velocity(net), p: traj.pressure(net), trace: traj.trace(net) }
    }
}

/// Prescribed data of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadGroup<'a> {
    pub loads: &'a NetworkLoads,
    pub boundary: &'a NetworkBoundary,
}

impl<'a> LoadGroup<'a> {
    pub fn of(problem: &'a DppProblem, net: usize) -> Self {
        Self { loads: &problem.loads.networks[net], boundary: &problem.boundary.networks[net] }
    }
}

fn ordinals(grid: &StructuredGrid) -> Vec<Option<usize>> {
    let mut out = vec![None; grid.n_faces()];
    for (k, b) in grid.boundary_faces().faces.iter().enumerate() {
        out[b.face] = Some(k);
    }
    out
}

/// `∫u⋆γb + ∫(γ/φ)u(t)·u₀ − ∫_Γᵖ (u·n)⋆p_p + ∫_Γᵘ p⋆u_n` as a time series.
pub fn functional(
    grid: &StructuredGrid,
    material: &Material,
    net: usize,
    sol: &SolutionGroup,
    load: &LoadGroup,
) -> Result<TimeSeries> {
    let l = load.loads;
    sol.u.check_axis(&l.body_force)?;
    if sol.u.width() != grid.n_faces() || sol.p.width() != grid.n_cells() {
        return invalid("solution does not match the grid");
    }
    let w = grid.face_weights(FaceRule::Trapezoidal);
    let gamma = material.gamma;
    let body = conv(&sol.u, &l.body_force)?.weighted_sum(&w.iter().map(|w| gamma * w).collect::<Vec<_>>());

    let a = material.inertia_face(grid, net);
    let wu0: Vec<f64> = (0..grid.n_faces()).map(|f| w[f] * a[f] * l.initial_velocity[f]).collect();
    let initial = sol.u.weighted_sum(&wu0);

    let mut out = body.add(&initial)?;
    let pf = &load.boundary.pressure.faces;
    if !pf.is_empty() {
        let un = sol.u.map_samples(Kind::Boundary, pf.len(), |s, o| {
            for (v, bf) in o.iter_mut().zip(pf) {
                *v = bf.normal_sign() * s[bf.face];
            }
        });
        let area: Vec<f64> = pf.iter().map(|bf| grid.face_area(bf.normal_axis())).collect();
        out = out.axpy(-1.0, &conv(&un, &l.pressure_data)?.weighted_sum(&area))?;
    }
    let vf = &load.boundary.velocity.faces;
    if !vf.is_empty() {
        let ord = ordinals(grid);
        let pb = sol.trace.map_samples(Kind::Boundary, vf.len(), |s, o| {
            for (v, bf) in o.iter_mut().zip(vf) {
                *v = s[ord[bf.face].unwrap()];
            }
        });
        let area: Vec<f64> = vf.iter().map(|bf| grid.face_area(bf.normal_axis())).collect();
        out = out.add(&conv(&pb, &l.velocity_data)?.weighted_sum(&area))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityResult {
    /// `[⟨S²;P¹⟩ macro + micro] − [⟨S¹;P²⟩ macro + micro]`.
    pub residual: TimeSeries,
    /// `max |r| / max` magnitude of the four functionals; zero when all vanish.
    pub normalized: f64,
    /// `⟨S²;P¹⟩` and `⟨S¹;P²⟩` per network.
    pub functionals: [[TimeSeries; 2]; 2],
}

/// Reciprocity residual of two solutions of problems that differ only in
/// their loads.
pub fn reciprocity_residual(
    problem1: &DppProblem,
    traj1: &Trajectory,
    problem2: &DppProblem,
    traj2: &Trajectory,
) -> Result<ReciprocityResult> {
    if problem1.grid != problem2.grid || problem1.material != problem2.material {
        return invalid("reciprocity needs a shared grid and material");
    }
    if problem1.boundary != problem2.boundary {
        return invalid("reciprocity needs identical boundary partitions");
    }
    if problem1.steps != problem2.steps || problem1.t_final != problem2.t_final {
        return invalid("reciprocity needs a shared time axis");
    }
    let g = &problem1.grid;
    let m = &problem1.material;
    let f = |traj: &Trajectory, pb: &DppProblem, net: usize| {
        functional(g, m, net, &SolutionGroup::from_trajectory(traj, net), &LoadGroup::of(pb, net))
    };
    let s2p1 = [f(traj2, problem1, 0)?, f(traj2, problem1, 1)?];
    let s1p2 = [f(traj1, problem2, 0)?, f(traj1, problem2, 1)?];
    let residual = s2p1[0].add(&s2p1[1])?.sub(&s1p2[0].add(&s1p2[1])?)?;
    let scale = s2p1.iter().chain(&s1p2).map(|s| s.max_abs()).fold(0.0, f64::max);
    let normalized = if scale > 0.0 { residual.max_abs() / scale } else { 0.0 };
    Ok(ReciprocityResult { residual, normalized, functionals: [s2p1, s1p2] })
}

/// `∫(γ/φ)[u_b⋆u̇_a − u_a⋆u̇_b − (u_b(0)·u_a(t) − u_b(t)·u_a(0))]`, which
/// vanishes for exact convolutions and is `O(Δt²)` for the discrete ones.
pub fn inertial_cancellation_defect(
    grid: &StructuredGrid,
    material: &Material,
    net: usize,
    ua: &TimeSeries,
    ub: &TimeSeries,
) -> Result<TimeSeries> {
    ua.check_axis(ub)?;
    let w = grid.face_weights(FaceRule::Trapezoidal);
    let a = material.inertia_face(grid, net);
    let wa: Vec<f64> = w.iter().zip(&a).map(|(w, a)| w * a).collect();
    let lhs = conv(ub, &time_derivative(ua)?)?.sub(&conv(ua, &time_derivative(ub)?)?)?.weighted_sum(&wa);
    let (a0, b0) = (ua.sample(0).to_vec(), ub.sample(0).to_vec());
    let ea = ua.weighted_sum(&wa.iter().zip(&b0).map(|(w, b)| w * b).collect::<Vec<_>>());
    let eb = ub.weighted_sum(&wa.iter().zip(&a0).map(|(w, a)| w * a).collect::<Vec<_>>());
    lhs.sub(&ea.sub(&eb)?)
}
