//! The convolved (integrated-in-time) form of the governing equations, the
//! functional Ψ and its first variation.
//!
//! `x ⋆ 1 ⋆ y` is evaluated as `(1 ⋆ x) ⋆ y` with the trapezoidal running
//! integral. Ψ is quadratic in the fields, so its variation is assembled
//! exactly from the polarized bilinear part plus the linear part.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convolution::{conv, one_star, time_derivative, Kind, TimeSeries};
use crate::error::{invalid, Result};
use crate::grid::{FaceRule, StructuredGrid};
use crate::model::DppProblem;
use crate::solver::Trajectory;

/// Treatment of the velocity-boundary terms of Ψ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryForm {
    /// `+∫_Γᵘ (u·n − u_n) ⋆ 1 ⋆ p`, with the boundary pressure as a field.
    /// Stationary at solutions for unconstrained variations.
    Corrected,
    /// `+∫_Γᵘ u_n ⋆ 1 ⋆ p` as usually written. Not stationary for variations
    /// with `δu·n ≠ 0` or `δp ≠ 0` on Γᵘ.
    Literal,
}

/// Space-time fields of both networks; also used for variation directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub u: [TimeSeries; 2],
    pub p: [TimeSeries; 2],
    /// Boundary pressure by boundary ordinal. Only velocity-face entries
    /// enter Ψ; pressure faces use the data.
    pub trace: [TimeSeries; 2],
}

pub type VariationDirection = FieldSet;

impl FieldSet {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self {
            u: [traj.velocity(0), traj.velocity(1)],
            p: [traj.pressure(0), traj.pressure(1)],
            trace: [traj.trace(0), traj.trace(1)],
        }
    }

    pub fn axpy(&self, c: f64, other: &FieldSet) -> Result<FieldSet> {
        Ok(FieldSet {
            u: [self.u[0].axpy(c, &other.u[0])?, self.u[1].axpy(c, &other.u[1])?],
            p: [self.p[0].axpy(c, &other.p[0])?, self.p[1].axpy(c, &other.p[1])?],
            trace: [self.trace[0].axpy(c, &other.trace[0])?, self.trace[1].axpy(c, &other.trace[1])?],
        })
    }

    pub fn scale(&self, c: f64) -> FieldSet {
        FieldSet {
            u: [self.u[0].scale(c), self.u[1].scale(c)],
            p: [self.p[0].scale(c), self.p[1].scale(c)],
            trace: [self.trace[0].scale(c), self.trace[1].scale(c)],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.p).chain(&self.trace).map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    /// Space-time L² norm with face, cell and boundary quadratures; traces
    /// count on velocity faces only.
    pub fn norm(&self, problem: &DppProblem) -> f64 {
        let g = &problem.grid;
        let w = g.face_weights(FaceRule::Trapezoidal);
        let v = g.cell_volume();
        let bf = g.boundary_faces();
        let dt = self.u[0].dt();
        let mut s = 0.0;
        for n in 0..2 {
            let vel = &problem.boundary.networks[n].velocity;
            for k in 0..self.u[n].len() {
                s += dt * self.u[n].sample(k).iter().zip(&w).map(|(x, w)| w * x * x).sum::<f64>();
                s += dt * v * self.p[n].sample(k).iter().map(|x| x * x).sum::<f64>();
                for (j, b) in bf.faces.iter().enumerate() {
                    if vel.contains(b.face) {
                        s += dt * g.face_area(b.normal_axis()) * self.trace[n].sample(k)[j].powi(2);
                    }
                }
            }
        }
        s.sqrt()
    }

    fn check(&self, problem: &DppProblem) -> Result<()> {
        let g = &problem.grid;
        let ok = (0..2).all(|n| {
            self.u[n].width() == g.n_faces()
                && self.p[n].width() == g.n_cells()
                && self.trace[n].width() == g.n_boundary_faces()
                && self.u[n].steps() == problem.steps
                && self.p[n].steps() == problem.steps
                && self.trace[n].steps() == problem.steps
        });
        if !ok {
            return invalid("fields do not match the problem's grid and time axis");
        }
        Ok(())
    }
}

const LATTICE: f64 = (1u64 << 20) as f64;

/// Random direction with entries uniform in `(-1, 1)` on a `2⁻²⁰` lattice;
/// trace entries only on velocity faces.
pub fn random_direction(problem: &DppProblem, rng: &mut ChaCha8Rng) -> VariationDirection {
    let g = &problem.grid;
    let (dt, n) = (problem.dt(), problem.steps);
    let mut fill = |kind: Kind, width: usize, mask: &dyn Fn(usize) -> bool| {
        let mut s = TimeSeries::zeros(dt, n, kind, width);
        for k in 0..=n {
            for (x, v) in s.sample_mut(k).iter_mut().enumerate() {
                if mask(x) {
                    *v = (rng.gen_range(-1.0..1.0) * LATTICE).round() / LATTICE;
                }
            }
        }
        s
    };
    let bf = g.boundary_faces();
    let all = |_: usize| true;
    let u = [fill(Kind::Face, g.n_faces(), &all), fill(Kind::Face, g.n_faces(), &all)];
    let p = [fill(Kind::Cell, g.n_cells(), &all), fill(Kind::Cell, g.n_cells(), &all)];
    let trace = [0, 1].map(|net| {
        let vel = &problem.boundary.networks[net].velocity;
        fill(Kind::Boundary, bf.len(), &|j| vel.contains(bf.faces[j].face))
    });
    FieldSet { u, p, trace }
}

/// Residuals of the convolved system, one series per equation.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentFormResiduals {
    /// `(γ/φ)u + 1⋆μK⁻¹u + 1⋆∇p − 1⋆γb − (γ/φ)u₀` on faces.
    pub momentum: [TimeSeries; 2],
    /// `1⋆div u ± 1⋆(β/μ)(p₁ − p₂)` on cells.
    pub mass: [TimeSeries; 2],
    /// `1⋆(u·n − u_n)` on velocity faces.
    pub velocity_bc: [TimeSeries; 2],
    /// `1⋆(p − p_p)` on pressure faces.
    pub pressure_bc: [TimeSeries; 2],
}

impl EquivalentFormResiduals {
    /// Max-norms in the order momentum, mass, velocity, pressure (macro, micro each).
    pub fn norms(&self) -> [f64; 8] {
        let s = [
            &self.momentum[0],
            &self.momentum[1],
            &self.mass[0],
            &self.mass[1],
            &self.velocity_bc[0],
            &self.velocity_bc[1],
            &self.pressure_bc[0],
            &self.pressure_bc[1],
        ];
        s.map(|x| x.max_abs())
    }
}

fn ordinals(grid: &StructuredGrid) -> Vec<usize> {
    let mut out = vec![usize::MAX; grid.n_faces()];
    for (k, b) in grid.boundary_faces().faces.iter().enumerate() {
        out[b.face] = k;
    }
    out
}

/// Gradient series using data on pressure faces and `trace` (or zero, when
/// `trace` is `None`) on velocity faces.
fn gradient_series(problem: &DppProblem, net: usize, p: &TimeSeries, trace: Option<&TimeSeries>) -> TimeSeries {
    let g = &problem.grid;
    let bf = g.boundary_faces();
    let ord = ordinals(g);
    let pdata = &problem.loads.networks[net].pressure_data;
    let pfaces = &problem.boundary.networks[net].pressure.faces;
    let mut out = TimeSeries::zeros(p.dt(), p.steps(), Kind::Face, g.n_faces());
    let mut pb = vec![0.0; bf.len()];
    for k in 0..p.len() {
        match trace {
            Some(t) => pb.copy_from_slice(t.sample(k)),
            None => pb.iter_mut().for_each(|v| *v = 0.0),
        }
        for (j, f) in pfaces.iter().enumerate() {
            pb[ord[f.face]] = pdata.sample(k)[j];
        }
        out.sample_mut(k).copy_from_slice(&g.gradient_unchecked(p.sample(k), &pb));
    }
    out
}

fn divergence_series(grid: &StructuredGrid, u: &TimeSeries) -> TimeSeries {
    u.map_samples(Kind::Cell, grid.n_cells(), |s, o| o.copy_from_slice(&grid.divergence_unchecked(s)))
}

/// Normal velocity on the given faces.
fn normal_series(u: &TimeSeries, faces: &[crate::grid::BoundaryFace]) -> TimeSeries {
    u.map_samples(Kind::Boundary, faces.len(), |s, o| {
        for (v, bf) in o.iter_mut().zip(faces) {
            *v = bf.normal_sign() * s[bf.face];
        }
    })
}

fn select(trace: &TimeSeries, ord: &[usize], faces: &[crate::grid::BoundaryFace]) -> TimeSeries {
    trace.map_samples(Kind::Boundary, faces.len(), |s, o| {
        for (v, bf) in o.iter_mut().zip(faces) {
            *v = s[ord[bf.face]];
        }
    })
}

/// Integrands of the original (differential) momentum and mass equations,
/// without the rate term: `μK⁻¹u + ∇p − γb` and `div u ± (β/μ)(p₁ − p₂)`.
fn source_terms(x: &FieldSet, problem: &DppProblem, trace: bool) -> Result<([TimeSeries; 2], [TimeSeries; 2])> {
    let g = &problem.grid;
    let m = &problem.material;
    let d = x.p[0].sub(&x.p[1])?;
    let mut mom = Vec::new();
    let mut mass = Vec::new();
    for n in 0..2 {
        let drag = m.drag_face(g, n);
        let grad = gradient_series(problem, n, &x.p[n], trace.then_some(&x.trace[n]));
        let f = x.u[n].scale_entries(&drag).add(&grad)?.axpy(-m.gamma, &problem.loads.networks[n].body_force)?;
        mom.push(f);
        let sign = if n == 0 { 1.0 } else { -1.0 };
        mass.push(divergence_series(g, &x.u[n]).axpy(sign * m.beta / m.mu, &d)?);
    }
    let mass: [TimeSeries; 2] = [mass.remove(0), mass.remove(0)];
    let mom: [TimeSeries; 2] = [mom.remove(0), mom.remove(0)];
    Ok((mom, mass))
}

fn momentum_residual(x: &FieldSet, problem: &DppProblem, net: usize, f: &TimeSeries) -> Result<TimeSeries> {
    let g = &problem.grid;
    let a = problem.material.inertia_face(g, net);
    let u0 = &problem.loads.networks[net].initial_velocity;
    let au0 = TimeSeries::constant(x.u[net].dt(), x.u[net].steps(), Kind::Face, &u0.iter().zip(&a).map(|(u, a)| u * a).collect::<Vec<_>>());
    x.u[net].scale_entries(&a).add(&one_star(f))?.sub(&au0)
}

pub fn equivalent_residuals(x: &FieldSet, problem: &DppProblem) -> Result<EquivalentFormResiduals> {
    x.check(problem)?;
    let g = &problem.grid;
    let ord = ordinals(g);
    let (f, m) = source_terms(x, problem, true)?;
    let momentum = [momentum_residual(x, problem, 0, &f[0])?, momentum_residual(x, problem, 1, &f[1])?];
    let mass = [one_star(&m[0]), one_star(&m[1])];
    let mut vbc = Vec::new();
    let mut pbc = Vec::new();
    for n in 0..2 {
        let b = &problem.boundary.networks[n];
        let l = &problem.loads.networks[n];
        vbc.push(one_star(&normal_series(&x.u[n], &b.velocity.faces).sub(&l.velocity_data)?));
        pbc.push(one_star(&select(&x.trace[n], &ord, &b.pressure.faces).sub(&l.pressure_data)?));
    }
    Ok(EquivalentFormResiduals {
        momentum,
        mass,
        velocity_bc: [vbc.remove(0), vbc.remove(0)],
        pressure_bc: [pbc.remove(0), pbc.remove(0)],
    })
}

pub fn equivalent_residuals_of(traj: &Trajectory, problem: &DppProblem) -> Result<EquivalentFormResiduals> {
    equivalent_residuals(&FieldSet::from_trajectory(traj), problem)
}

pub const TERM_NAMES: [&str; 15] = [
    "inertia_1",
    "inertia_2",
    "drag_1",
    "drag_2",
    "divergence_1",
    "divergence_2",
    "exchange",
    "velocity_boundary_1",
    "velocity_boundary_2",
    "pressure_boundary_1",
    "pressure_boundary_2",
    "body_force_1",
    "body_force_2",
    "initial_velocity_1",
    "initial_velocity_2",
];

struct Quadrature {
    w: Vec<f64>,
    cells: Vec<f64>,
    ord: Vec<usize>,
}

impl Quadrature {
    fn new(g: &StructuredGrid) -> Self {
        Self { w: g.face_weights(FaceRule::Trapezoidal), cells: vec![g.cell_volume(); g.n_cells()], ord: ordinals(g) }
    }
}

fn weighted(a: &[f64], b: &[f64], c: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| c * a * b).collect()
}

fn areas(g: &StructuredGrid, faces: &[crate::grid::BoundaryFace]) -> Vec<f64> {
    faces.iter().map(|bf| g.face_area(bf.normal_axis())).collect()
}

/// Bilinear part of each term of Ψ at `(x, y)`, in `TERM_NAMES` order.
fn bilinear(x: &FieldSet, y: &FieldSet, pb: &DppProblem, form: BoundaryForm, q: &Quadrature) -> Result<Vec<TimeSeries>> {
    let g = &pb.grid;
    let m = &pb.material;
    let zero = TimeSeries::zeros(pb.dt(), pb.steps, Kind::Scalar, 1);
    let mut out = vec![zero.clone(); TERM_NAMES.len()];
    for n in 0..2 {
        let a = m.inertia_face(g, n);
        let drag = m.drag_face(g, n);
        out[n] = conv(&x.u[n], &y.u[n])?.weighted_sum(&weighted(&q.w, &a, 0.5));
        out[2 + n] = conv(&one_star(&x.u[n]), &y.u[n])?.weighted_sum(&weighted(&q.w, &drag, 0.5));
        out[4 + n] = conv(&one_star(&divergence_series(g, &x.u[n])), &y.p[n])?.weighted_sum(&q.cells).scale(-1.0);
        if form == BoundaryForm::Corrected {
            let vf = &pb.boundary.networks[n].velocity.faces;
            if !vf.is_empty() {
                let un = normal_series(&x.u[n], vf);
                out[7 + n] = conv(&one_star(&un), &select(&y.trace[n], &q.ord, vf))?.weighted_sum(&areas(g, vf));
            }
        }
    }
    if m.beta > 0.0 {
        let dx = x.p[0].sub(&x.p[1])?;
        let dy = y.p[0].sub(&y.p[1])?;
        out[6] = conv(&one_star(&dx), &dy)?.weighted_sum(&q.cells).scale(-0.5 * m.beta / m.mu);
    }
    Ok(out)
}

/// Linear part of each term of Ψ at `x`, in `TERM_NAMES` order.
fn linear(x: &FieldSet, pb: &DppProblem, form: BoundaryForm, q: &Quadrature) -> Result<Vec<TimeSeries>> {
    let g = &pb.grid;
    let m = &pb.material;
    let zero = TimeSeries::zeros(pb.dt(), pb.steps, Kind::Scalar, 1);
    let mut out = vec![zero; TERM_NAMES.len()];
    for n in 0..2 {
        let l = &pb.loads.networks[n];
        let b = &pb.boundary.networks[n];
        let vf = &b.velocity.faces;
        if !vf.is_empty() {
            let c = match form {
                BoundaryForm::Corrected => -1.0,
                BoundaryForm::Literal => 1.0,
            };
            out[7 + n] = conv(&one_star(&l.velocity_data), &select(&x.trace[n], &q.ord, vf))?.weighted_sum(&areas(g, vf)).scale(c);
        }
        let pf = &b.pressure.faces;
        if !pf.is_empty() {
            out[9 + n] = conv(&one_star(&normal_series(&x.u[n], pf)), &l.pressure_data)?.weighted_sum(&areas(g, pf));
        }
        out[11 + n] = conv(&one_star(&x.u[n]), &l.body_force)?.weighted_sum(&q.w).scale(-m.gamma);
        let a = m.inertia_face(g, n);
        let u0 = TimeSeries::constant(pb.dt(), pb.steps, Kind::Face, &l.initial_velocity);
        out[13 + n] = conv(&x.u[n], &u0)?.weighted_sum(&weighted(&q.w, &a, -1.0));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiTerms {
    /// One series per entry of `TERM_NAMES`.
    pub terms: Vec<TimeSeries>,
    pub total: TimeSeries,
}

impl PsiTerms {
    /// `Σ max_t |term|`, the magnitude against which Ψ and its variation are judged.
    pub fn magnitude(&self) -> f64 {
        self.terms.iter().map(|t| t.max_abs()).sum()
    }
}

fn sum(series: &[TimeSeries]) -> Result<TimeSeries> {
    let mut total = series[0].clone();
    for s in &series[1..] {
        total = total.add(s)?;
    }
    Ok(total)
}

pub fn psi(x: &FieldSet, problem: &DppProblem, form: BoundaryForm) -> Result<PsiTerms> {
    x.check(problem)?;
    let q = Quadrature::new(&problem.grid);
    let b = bilinear(x, x, problem, form, &q)?;
    let l = linear(x, problem, form, &q)?;
    let terms = b.iter().zip(&l).map(|(b, l)| b.add(l)).collect::<Result<Vec<_>>>()?;
    let total = sum(&terms)?;
    Ok(PsiTerms { terms, total })
}

/// The first variation computed three ways.
#[derive(Debug, Clone, PartialEq)]
pub struct GateauxVariation {
    /// Assembled from the polarized bilinear and linear parts of Ψ.
    pub assembled: TimeSeries,
    /// Central difference of Ψ with `ε ≈ (1 + ‖x‖∞) / ‖δ‖∞`. Ψ is quadratic,
    /// so the difference has no truncation error and this step minimizes
    /// rounding.
    pub finite_difference: TimeSeries,
    pub epsilon: f64,
    /// Central difference with `ε ≈ √eps (1 + ‖x‖∞)`.
    pub finite_difference_small: TimeSeries,
    pub epsilon_small: f64,
    /// Residuals of the convolved system paired with the direction.
    pub residual_pairing: TimeSeries,
    /// `Σ |part|` over the summands of the assembled variation, per sample.
    pub magnitude: TimeSeries,
}

pub fn gateaux_variation(x: &FieldSet, problem: &DppProblem, dir: &VariationDirection, form: BoundaryForm) -> Result<GateauxVariation> {
    x.check(problem)?;
    dir.check(problem)?;
    let q = Quadrature::new(&problem.grid);
    let b1 = bilinear(dir, x, problem, form, &q)?;
    let b2 = bilinear(x, dir, problem, form, &q)?;
    let l = linear(dir, problem, form, &q)?;
    let mut parts = b1;
    parts.extend(b2);
    parts.extend(l);
    let assembled = sum(&parts)?;
    let magnitude = sum(&parts.iter().map(|p| p.map(f64::abs)).collect::<Vec<_>>())?;

    let central = |eps: f64| -> Result<TimeSeries> {
        let plus = psi(&x.axpy(eps, dir)?, problem, form)?.total;
        let minus = psi(&x.axpy(-eps, dir)?, problem, form)?.total;
        Ok(plus.sub(&minus)?.scale(0.5 / eps))
    };
    // Powers of two, so that lattice directions perturb the fields exactly
    // for the small step.
    let pow2 = |v: f64| v.log2().round().exp2();
    let dmax = dir.max_abs();
    let epsilon = if dmax > 0.0 { pow2((1.0 + x.max_abs()) / dmax) } else { 1.0 };
    let epsilon_small = pow2(f64::EPSILON.sqrt() * (1.0 + x.max_abs()));
    let finite_difference = central(epsilon)?;
    let finite_difference_small = central(epsilon_small)?;

    let residual_pairing = residual_pairing(x, problem, dir, form, &q)?;
    Ok(GateauxVariation {
        assembled,
        finite_difference,
        epsilon,
        finite_difference_small,
        epsilon_small,
        residual_pairing,
        magnitude,
    })
}

fn residual_pairing(x: &FieldSet, pb: &DppProblem, dir: &FieldSet, form: BoundaryForm, q: &Quadrature) -> Result<TimeSeries> {
    let g = &pb.grid;
    let (f, m) = source_terms(x, pb, form == BoundaryForm::Corrected)?;
    let mut parts = Vec::new();
    for n in 0..2 {
        let r = momentum_residual(x, pb, n, &f[n])?;
        parts.push(conv(&dir.u[n], &r)?.weighted_sum(&q.w));
        parts.push(conv(&dir.p[n], &one_star(&m[n]))?.weighted_sum(&q.cells).scale(-1.0));
        let vf = &pb.boundary.networks[n].velocity.faces;
        if !vf.is_empty() {
            let l = &pb.loads.networks[n];
            let bc = match form {
                BoundaryForm::Corrected => normal_series(&x.u[n], vf).sub(&l.velocity_data)?,
                BoundaryForm::Literal => l.velocity_data.clone(),
            };
            parts.push(conv(&select(&dir.trace[n], &q.ord, vf), &one_star(&bc))?.weighted_sum(&areas(g, vf)));
        }
    }
    sum(&parts)
}

/// Defects of differentiating the convolved equations back to the original
/// ones, each relative to the magnitude of the original terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    /// `d/dt` of the convolved momentum residual minus the original residual.
    pub momentum: [f64; 2],
    /// `d/dt` of the convolved mass residual minus the original residual.
    pub mass: [f64; 2],
    /// `t → 0` of the convolved momentum residual divided by `γ/φ`, against `u(0) − u₀`.
    pub initial: [f64; 2],
}

impl RoundTrip {
    pub fn max(&self) -> f64 {
        self.momentum.iter().chain(&self.mass).fold(0.0_f64, |m, v| m.max(*v))
    }
}

pub fn convolved_round_trip(x: &FieldSet, problem: &DppProblem) -> Result<RoundTrip> {
    x.check(problem)?;
    let g = &problem.grid;
    let (f, m) = source_terms(x, problem, true)?;
    let mut out = RoundTrip { momentum: [0.0; 2], mass: [0.0; 2], initial: [0.0; 2] };
    for n in 0..2 {
        let a = problem.material.inertia_face(g, n);
        let r = momentum_residual(x, problem, n, &f[n])?;
        let rate = time_derivative(&x.u[n])?.scale_entries(&a);
        let original = rate.add(&f[n])?;
        let scale = rate.max_abs().max(f[n].max_abs()).max(f64::MIN_POSITIVE);
        out.momentum[n] = time_derivative(&r)?.sub(&original)?.max_abs() / scale;
        let mscale = m[n].max_abs().max(divergence_series(g, &x.u[n]).max_abs()).max(f64::MIN_POSITIVE);
        out.mass[n] = time_derivative(&one_star(&m[n]))?.sub(&m[n])?.max_abs() / mscale;
        let u0 = &problem.loads.networks[n].initial_velocity;
        let r0 = r.sample(0);
        let uscale = u0.iter().chain(x.u[n].sample(0)).fold(f64::MIN_POSITIVE, |s, v| s.max(v.abs()));
        out.initial[n] = (0..g.n_faces())
            .map(|k| (r0[k] / a[k] - (x.u[n].sample(0)[k] - u0[k])).abs())
            .fold(0.0, f64::max)
            / uscale;
    }
    Ok(out)
}

/// Stationarity of Ψ at `x` over random directions.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    /// `max |δΨ(t)| / ‖δ‖` over directions and evaluation times.
    pub max_ratio: f64,
    /// `Σ max |term| / ‖x‖`.
    pub scale: f64,
    /// `max_ratio / scale`.
    pub relative: f64,
    /// Worst gap between assembled and finite-difference variations,
    /// relative to the magnitude of the assembled summands.
    pub fd_agreement: f64,
    /// The same with the `√eps` step.
    pub fd_agreement_small: f64,
    /// Worst ratio using the residual-pairing form.
    pub pairing_ratio: f64,
}

/// Evaluates δΨ at `t = T/2` and `t = T` for `count` random directions.
pub fn stationarity(x: &FieldSet, problem: &DppProblem, form: BoundaryForm, count: usize, seed: u64) -> Result<StationarityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = psi(x, problem, form)?;
    let xn = x.norm(problem);
    let scale = if xn > 0.0 { terms.magnitude() / xn } else { 0.0 };
    let n = problem.steps;
    let times = [n / 2, n];
    let (mut max_ratio, mut fd, mut fd_small, mut pairing) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..count {
        let dir = random_direction(problem, &mut rng);
        let dn = dir.norm(problem);
        let v = gateaux_variation(x, problem, &dir, form)?;
        for &k in &times {
            let a = v.assembled.sample(k)[0];
            let b = v.finite_difference.sample(k)[0];
            max_ratio = max_ratio.max(a.abs() / dn);
            pairing = pairing.max(v.residual_pairing.sample(k)[0].abs() / dn);
            let m = v.magnitude.sample(k)[0];
            if m > 0.0 {
                fd = fd.max((a - b).abs() / m);
                fd_small = fd_small.max((a - v.finite_difference_small.sample(k)[0]).abs() / m);
            }
        }
    }
    let relative = if scale > 0.0 { max_ratio / scale } else { max_ratio };
    Ok(StationarityReport { max_ratio, scale, relative, fd_agreement: fd, fd_agreement_small: fd_small, pairing_ratio: pairing })
}
