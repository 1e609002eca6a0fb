//! Convergence-order fits and trajectory error norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convolution::{conv, derivative_swap_defect, leibniz_defect, product_rule_defect, Kind, TimeSeries};
use crate::error::{invalid, Result};
use crate::grid::{FaceRule, StructuredGrid};
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    /// Least-squares slope of `log e` against `log h`.
    pub order: f64,
    pub intercept: f64,
    /// Orders between consecutive levels.
    pub pairwise: Vec<f64>,
}

/// Fits `e ≈ C hᵖ` by least squares on log-log data.
pub fn fit_order(h: &[f64], e: &[f64]) -> Result<OrderFit> {
    if h.len() != e.len() {
        return invalid(format!("{} step sizes but {} errors", h.len(), e.len()));
    }
    if h.len() < 2 {
        return invalid("an order fit needs at least two levels");
    }
    if let Some(v) = h.iter().chain(e).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return invalid(format!("order fit needs positive finite data, got {v}"));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("order fit needs distinct step sizes");
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let order = sxy / sxx;
    let pairwise = x.windows(2).zip(y.windows(2)).map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0])).collect();
    Ok(OrderFit { order, intercept: my - order * mx, pairwise })
}

/// Errors of a computed trajectory against a reference, each the maximum
/// over time of a discrete L² norm summed over both networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryError {
    pub velocity: f64,
    pub pressure: f64,
}

impl TrajectoryError {
    pub fn combined(&self) -> f64 {
        self.velocity.max(self.pressure)
    }
}

pub fn trajectory_error(computed: &Trajectory, reference: &Trajectory) -> Result<TrajectoryError> {
    let diff = computed.combine(-1.0, reference)?;
    let g = &diff.grid;
    let w = g.face_weights(FaceRule::Trapezoidal);
    let v = g.cell_volume();
    let mut out = TrajectoryError { velocity: 0.0, pressure: 0.0 };
    for s in &diff.snapshots {
        let eu: f64 = (0..2).map(|n| s.u[n].iter().zip(&w).map(|(x, w)| w * x * x).sum::<f64>()).sum();
        let ep: f64 = (0..2).map(|n| s.p[n].iter().map(|x| v * x * x).sum::<f64>()).sum();
        out.velocity = out.velocity.max(eu.sqrt());
        out.pressure = out.pressure.max(ep.sqrt());
    }
    Ok(out)
}

/// Largest relative summation-by-parts defect
/// `|∫u·∇p + ∫p ∇·u|` relative to the summed magnitudes of either quadrature,
/// over `pairs` random fields with zero boundary pressure and zero boundary
/// flux.
pub fn adjointness_defect(grid: &StructuredGrid, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = vec![0.0; grid.n_boundary_faces()];
    let w = grid.face_weights(FaceRule::Trapezoidal);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let p: Vec<f64> = (0..grid.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..grid.n_faces())
            .map(|f| if grid.is_boundary_face(f) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let g = grid.gradient_unchecked(&p, &zero);
        let d = grid.divergence_unchecked(&u);
        let ta: Vec<f64> = u.iter().zip(&g).zip(&w).map(|((u, g), w)| w * u * g).collect();
        let tb: Vec<f64> = p.iter().zip(&d).map(|(p, d)| p * d * grid.cell_volume()).collect();
        let (a, b) = (ta.iter().sum::<f64>(), tb.iter().sum::<f64>());
        let mag = |t: &[f64]| t.iter().map(|v| v.abs()).sum::<f64>();
        let scale = mag(&ta).max(mag(&tb));
        if scale > 0.0 {
            worst = worst.max((a + b).abs() / scale);
        }
    }
    worst
}

/// `max |a⋆b − b⋆a| / max |a⋆b|` for random face series with `steps` steps.
pub fn commutativity_defect(steps: usize, width: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_: f64, out: &mut [f64]| out.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let a = TimeSeries::from_fn(1.0 / steps as f64, steps, Kind::Face, width, &mut draw);
    let b = TimeSeries::from_fn(1.0 / steps as f64, steps, Kind::Face, width, &mut draw);
    let ab = conv(&a, &b)?;
    Ok(ab.sub(&conv(&b, &a)?)?.max_abs() / ab.max_abs())
}

/// Defects of one convolution identity under Δt refinement on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityStudy {
    pub name: &'static str,
    pub dt: Vec<f64>,
    pub defect: Vec<f64>,
    pub fit: OrderFit,
}

fn polynomial(rng: &mut ChaCha8Rng, width: usize) -> Vec<[f64; 5]> {
    (0..width).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect()
}

fn sample(dt: f64, steps: usize, coef: &[[f64; 5]]) -> TimeSeries {
    TimeSeries::from_fn(dt, steps, Kind::Face, coef.len(), |t, out| {
        for (o, c) in out.iter_mut().zip(coef) {
            *o = c.iter().rev().fold(0.0, |acc, c| acc * t + c) + (c[0] * t).sin();
        }
    })
}

/// Derivative swap, product rule and Leibniz rule on smooth random series,
/// at `base_steps · 2ˡ` steps for `l < levels`.
pub fn convolution_identities(base_steps: usize, levels: usize, seed: u64) -> Result<Vec<IdentityStudy>> {
    if levels < 3 {
        return invalid(format!("a refinement study needs at least 3 levels, got {levels}"));
    }
    if base_steps < 2 {
        return invalid("a refinement study needs at least 2 base steps");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ca, cb) = (polynomial(&mut rng, 3), polynomial(&mut rng, 3));
    let names = ["derivative_swap", "product_rule", "leibniz"];
    let mut dts = vec![];
    let mut defects = vec![vec![]; 3];
    for l in 0..levels {
        let n = base_steps << l;
        let dt = 1.0 / n as f64;
        let (a, b) = (sample(dt, n, &ca), sample(dt, n, &cb));
        let sin = TimeSeries::scalar_fn(dt, n, f64::sin);
        dts.push(dt);
        defects[0].push(derivative_swap_defect(&a, &b)?.max_abs());
        defects[1].push(product_rule_defect(&a, &b)?.max_abs());
        defects[2].push(leibniz_defect(&sin)?.max_abs());
    }
    names
        .iter()
        .zip(defects)
        .map(|(name, defect)| Ok(IdentityStudy { name, fit: fit_order(&dts, &defect)?, dt: dts.clone(), defect }))
        .collect()
}
