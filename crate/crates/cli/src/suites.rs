//! The verification suites selectable from a scenario.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use dpp_core::energy::{random_ic_pair, uniqueness_experiment, PressureOffset};
use dpp_core::reciprocity::reciprocity_residual;
use dpp_core::solver::solve_with;
use dpp_core::study::{fit_order, trajectory_error};
use dpp_core::variational::{
    equivalent_residuals, gateaux_variation, psi, random_direction, stationarity, BoundaryForm, FieldSet, TERM_NAMES,
};
use dpp_core::{DppProblem, Trajectory};

use crate::error::CliError;
use crate::output::Series;
use crate::scenario::{FormName, Quantity, Refine, Scenario};

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffsetDoc {
    Estimated { c: f64 },
    Means { q1: f64, q2: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    pub seed: u64,
    pub pass: bool,
    pub identical: bool,
    pub min_energy: f64,
    pub max_energy: f64,
    pub min_log_margin: f64,
    pub log_tolerance: f64,
    pub min_exp_margin: f64,
    pub exp_tolerance: f64,
    pub t1: f64,
    pub pressure_offset: OffsetDoc,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessSuite {
    pub pass: bool,
    pub pairs: Vec<PairSummary>,
}

pub fn uniqueness(sc: &Scenario, problem: &DppProblem, seed: u64) -> Result<(UniquenessSuite, Vec<Series>), CliError> {
    let spec = &sc.uniqueness;
    let tol = sc.tolerances();
    let mut pairs = vec![];
    let mut series = vec![];
    for i in 0..spec.pairs {
        let s = seed.wrapping_add(i as u64);
        let pair = random_ic_pair(problem, s, spec.amplitude);
        let r = uniqueness_experiment(problem, &pair, &sc.solver_options(), &tol, spec.t1)?;
        let f = &r.rates.formula;
        let mut csv = Series::new(format!("uniqueness_pair{i}"), &["t", "E", "E_dot", "E_ddot", "log_margin", "exp_margin"]);
        for k in 0..f.e.len() {
            csv.push(vec![
                f.e.time(k),
                f.e.sample(k)[0],
                f.e_dot.sample(k)[0],
                f.e_ddot.sample(k)[0],
                r.log_margin.sample(k)[0],
                r.exp_margin.sample(k)[0],
            ]);
        }
        series.push(csv);
        pairs.push(PairSummary {
            seed: s,
            pass: r.pass,
            identical: r.identical,
            min_energy: r.min_energy,
            max_energy: f.e.max_abs(),
            min_log_margin: r.min_log_margin(),
            log_tolerance: r.log_tolerance,
            min_exp_margin: r.min_exp_margin(),
            exp_tolerance: r.exp_tolerance,
            t1: r.t1,
            pressure_offset: match r.offset {
                PressureOffset::Estimated(c) => OffsetDoc::Estimated { c },
                PressureOffset::Means { q1, q2 } => OffsetDoc::Means { q1, q2 },
            },
        });
    }
    Ok((UniquenessSuite { pass: pairs.iter().all(|p| p.pass), pairs }, series))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReciprocitySuite {
    pub pass: bool,
    pub identical_loads: bool,
    pub normalized_residual: f64,
    pub max_abs_residual: f64,
    /// `max |r₁₂ + r₂₁|`.
    pub antisymmetry: f64,
    pub tolerance: f64,
}

struct ReciprocityRun {
    normalized: f64,
    max_abs: f64,
    antisymmetry: f64,
    identical: bool,
    series: Series,
}

fn reciprocity_at(sc: &Scenario, refine_space: usize, refine_time: usize) -> Result<ReciprocityRun, CliError> {
    let second = sc.reciprocity.second.as_ref().unwrap_or(&sc.loads);
    let (p1, _) = sc.build_with(&sc.loads, refine_space, refine_time)?;
    let (p2, _) = sc.build_with(second, refine_space, refine_time)?;
    let opts = sc.solver_options();
    let (t1, _) = solve_with(&p1, &opts)?;
    let (t2, _) = if p1 == p2 { (t1.clone(), Default::default()) } else { solve_with(&p2, &opts)? };
    let r = reciprocity_residual(&p1, &t1, &p2, &t2)?;
    let swapped = reciprocity_residual(&p2, &t2, &p1, &t1)?;
    let antisymmetry = r.residual.add(&swapped.residual)?.max_abs();
    let mut series = Series::new("reciprocity", &["t", "r", "s2p1_macro", "s2p1_micro", "s1p2_macro", "s1p2_micro"]);
    let f = &r.functionals;
    for k in 0..r.residual.len() {
        series.push(vec![
            r.residual.time(k),
            r.residual.sample(k)[0],
            f[0][0].sample(k)[0],
            f[0][1].sample(k)[0],
            f[1][0].sample(k)[0],
            f[1][1].sample(k)[0],
        ]);
    }
    Ok(ReciprocityRun {
        normalized: r.normalized,
        max_abs: r.residual.max_abs(),
        antisymmetry,
        identical: p1.loads == p2.loads,
        series,
    })
}

pub fn reciprocity(sc: &Scenario) -> Result<(ReciprocitySuite, Vec<Series>), CliError> {
    let tol = sc.tolerances().reciprocity;
    let run = reciprocity_at(sc, 0, 0)?;
    let pass = run.antisymmetry == 0.0
        && if run.identical { run.max_abs == 0.0 } else { run.normalized <= tol };
    let suite = ReciprocitySuite {
        pass,
        identical_loads: run.identical,
        normalized_residual: run.normalized,
        max_abs_residual: run.max_abs,
        antisymmetry: run.antisymmetry,
        tolerance: tol,
    };
    Ok((suite, vec![run.series]))
}

fn form(f: FormName) -> BoundaryForm {
    match f {
        FormName::Corrected => BoundaryForm::Corrected,
        FormName::Literal => BoundaryForm::Literal,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalSuite {
    pub pass: bool,
    pub form: FormName,
    pub directions: usize,
    /// `max |δΨ| / ‖direction‖` at `T/2` and `T`.
    pub max_ratio: f64,
    pub psi_scale: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub fd_agreement: f64,
    pub agreement_tolerance: f64,
    /// Agreement with the `√eps` step; diagnostic only.
    pub fd_agreement_small_step: f64,
    pub pairing_ratio: f64,
    /// Max norms of the momentum, mass, velocity-boundary and
    /// pressure-boundary residuals of both networks.
    pub residual_norms: [f64; 8],
}

pub fn variational(
    sc: &Scenario,
    problem: &DppProblem,
    traj: &Trajectory,
    seed: u64,
) -> Result<(VariationalSuite, Vec<Series>), CliError> {
    let tol = sc.tolerances();
    let spec = &sc.variational;
    let x = FieldSet::from_trajectory(traj);
    let bf = form(spec.form);
    let s = stationarity(&x, problem, bf, spec.directions, seed)?;
    let res = equivalent_residuals(&x, problem)?;
    let terms = psi(&x, problem, bf)?;
    let dir = random_direction(problem, &mut ChaCha8Rng::seed_from_u64(seed));
    let var = gateaux_variation(&x, problem, &dir, bf)?;

    let mut header = vec!["t", "psi"];
    header.extend(TERM_NAMES);
    header.extend(["delta_psi", "delta_psi_fd", "delta_psi_fd_small_step", "residual_pairing"]);
    let mut csv = Series::new("psi", &header);
    for k in 0..terms.total.len() {
        let mut row = vec![terms.total.time(k), terms.total.sample(k)[0]];
        row.extend(terms.terms.iter().map(|t| t.sample(k)[0]));
        row.extend([
            var.assembled.sample(k)[0],
            var.finite_difference.sample(k)[0],
            var.finite_difference_small.sample(k)[0],
            var.residual_pairing.sample(k)[0],
        ]);
        csv.push(row);
    }
    let suite = VariationalSuite {
        pass: s.relative <= tol.stationarity && s.fd_agreement <= tol.variation_agreement,
        form: spec.form,
        directions: spec.directions,
        max_ratio: s.max_ratio,
        psi_scale: s.scale,
        relative: s.relative,
        tolerance: tol.stationarity,
        fd_agreement: s.fd_agreement,
        agreement_tolerance: tol.variation_agreement,
        fd_agreement_small_step: s.fd_agreement_small,
        pairing_ratio: s.pairing_ratio,
        residual_norms: res.norms(),
    };
    Ok((suite, vec![csv]))
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub cells: Vec<usize>,
    pub steps: usize,
    pub h: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantityReport {
    pub name: &'static str,
    pub values: Vec<f64>,
    /// Least-squares order against Δt; absent when every value is zero.
    pub order: Option<f64>,
    pub pairwise: Vec<f64>,
    pub criterion: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSuite {
    pub pass: bool,
    pub refine: Refine,
    pub levels: Vec<LevelSummary>,
    pub quantities: Vec<QuantityReport>,
}

fn fitted(
    name: &'static str,
    dts: &[f64],
    values: Vec<f64>,
    check: impl Fn(f64, f64) -> bool,
    criterion: String,
) -> Result<QuantityReport, CliError> {
    if values.iter().all(|&v| v == 0.0) {
        return Ok(QuantityReport { name, values, order: None, pairwise: vec![], criterion, pass: true });
    }
    let fit = fit_order(dts, &values)?;
    let pass = check(fit.order, *values.last().unwrap());
    Ok(QuantityReport { name, values, order: Some(fit.order), pairwise: fit.pairwise, criterion, pass })
}

/// Runs the scenario at `levels` refinements and fits orders by least squares.
pub fn convergence(sc: &Scenario, levels: usize, seed: u64) -> Result<(ConvergenceSuite, Vec<Series>), CliError> {
    if levels < 3 {
        return Err(CliError::input(format!("a convergence study needs at least 3 levels, got {levels}")));
    }
    let spec = &sc.convergence;
    let tol = sc.tolerances();
    let scheme = sc.scheme();
    let p = scheme.order();
    let mut lv = vec![];
    let mut dts = vec![];
    let mut cols: Vec<(Quantity, Vec<[f64; 2]>)> = spec.quantities.iter().map(|q| (*q, vec![])).collect();
    for l in 0..levels {
        let rs = if spec.refine == Refine::Joint { l } else { 0 };
        let (problem, reference) = sc.build_with(&sc.loads, rs, l)?;
        let g = &problem.grid;
        lv.push(LevelSummary {
            cells: g.cells_per_axis()[..g.dim()].to_vec(),
            steps: problem.steps,
            h: g.h()[..g.dim()].iter().fold(0.0, |m: f64, &h| m.max(h)),
            dt: problem.dt(),
        });
        dts.push(problem.dt());
        let needs_solution = cols.iter().any(|(q, _)| *q != Quantity::Reciprocity);
        let traj = if needs_solution { Some(solve_with(&problem, &sc.solver_options())?.0) } else { None };
        for (q, out) in cols.iter_mut() {
            let v = match q {
                Quantity::SolutionError => {
                    let r = reference.as_ref().ok_or_else(|| {
                        CliError::input("the solution_error quantity needs manufactured loads")
                    })?;
                    let e = trajectory_error(traj.as_ref().unwrap(), r)?;
                    [e.velocity, e.pressure]
                }
                Quantity::Reciprocity => {
                    let r = reciprocity_at(sc, rs, l)?;
                    [r.normalized, 0.0]
                }
                Quantity::Stationarity => {
                    let x = FieldSet::from_trajectory(traj.as_ref().unwrap());
                    let s = stationarity(&x, &problem, form(sc.variational.form), sc.variational.directions, seed)?;
                    [s.relative, s.fd_agreement]
                }
            };
            out.push(v);
        }
    }

    let mut quantities = vec![];
    let band = if spec.refine == Refine::Joint { tol.order_band_joint } else { tol.order_band_time };
    let expected = if spec.refine == Refine::Joint { p.min(2.0) } else { p };
    let min_order = p - tol.order_band_time;
    for (q, vals) in cols {
        let col = |i: usize| vals.iter().map(|v| v[i]).collect::<Vec<f64>>();
        match q {
            Quantity::SolutionError => {
                for (i, name) in ["velocity_error", "pressure_error"].into_iter().enumerate() {
                    let crit = format!("|order - {expected}| <= {band}");
                    quantities.push(fitted(name, &dts, col(i), |o, _| (o - expected).abs() <= band, crit)?);
                }
            }
            Quantity::Reciprocity => {
                let t = tol.reciprocity;
                let crit = format!("order >= {min_order} and finest <= {t:e}");
                quantities.push(fitted("reciprocity", &dts, col(0), |o, v| o >= min_order && v <= t, crit)?);
            }
            Quantity::Stationarity => {
                let t = tol.stationarity;
                let crit = format!("order >= {min_order} and finest <= {t:e}");
                quantities.push(fitted("stationarity", &dts, col(0), |o, v| o >= min_order && v <= t, crit)?);
                let a = tol.variation_agreement;
                let fd = col(1);
                let pass = fd.iter().all(|&v| v <= a);
                quantities.push(QuantityReport {
                    name: "variation_agreement",
                    values: fd,
                    order: None,
                    pairwise: vec![],
                    criterion: format!("every level <= {a:e}"),
                    pass,
                });
            }
        }
    }

    let mut header = vec!["level", "h", "dt"];
    header.extend(quantities.iter().map(|q| q.name));
    let mut csv = Series::new("convergence", &header);
    for (l, s) in lv.iter().enumerate() {
        let mut row = vec![l as f64, s.h, s.dt];
        row.extend(quantities.iter().map(|q| q.values[l]));
        csv.push(row);
    }
    let pass = quantities.iter().all(|q| q.pass);
    Ok((ConvergenceSuite { pass, refine: spec.refine, levels: lv, quantities }, vec![csv]))
}
