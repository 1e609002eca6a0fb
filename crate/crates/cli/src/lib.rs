//! Scenario-driven front end: parse a scenario, solve, run the selected
//! suites and write `report.json`, `series/*.csv` and `fields/*.vtk`.

pub mod error;
pub mod json;
pub mod output;
pub mod scenario;
pub mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use dpp_core::model::compatibility_warnings;
use dpp_core::solver::solve_with;

pub use error::CliError;
pub use scenario::{parse_scenario, Scenario, Suite};
use output::{vtk_snapshot, write_csv, write_file, Series};
use suites::{ConvergenceSuite, ReciprocitySuite, UniquenessSuite, VariationalSuite};

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Overrides the scenario's suite list when set.
    pub suites: Option<Vec<Suite>>,
    pub out: PathBuf,
    pub levels: usize,
    /// Overrides the scenario seed when set.
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self { suites: None, out: out.into(), levels: 3, seed: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub cells: usize,
    pub faces: usize,
    pub steps: usize,
    pub dt: f64,
    pub scheme: &'static str,
    pub manufactured: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub unknowns: usize,
    pub solves: usize,
    pub max_relative_residual: f64,
    /// Error against the manufactured solution, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pressure_error: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSuite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reciprocity: Option<ReciprocitySuite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variational: Option<VariationalSuite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSuite>,
}

impl SuiteReports {
    pub fn pass(&self) -> bool {
        self.uniqueness.as_ref().is_none_or(|s| s.pass)
            && self.reciprocity.as_ref().is_none_or(|s| s.pass)
            && self.variational.as_ref().is_none_or(|s| s.pass)
            && self.convergence.as_ref().is_none_or(|s| s.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub status: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub levels: usize,
    pub suites_run: Vec<Suite>,
    pub scenario: Scenario,
    pub problem: ProblemSummary,
    pub solve: SolveSummary,
    pub warnings: Vec<String>,
    pub suites: SuiteReports,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.suites.pass() {
            0
        } else {
            1
        }
    }
}

type SuiteResult = Result<(Outcome, Vec<Series>), CliError>;

enum Outcome {
    Uniqueness(UniquenessSuite),
    Reciprocity(ReciprocitySuite),
    Variational(VariationalSuite),
    Convergence(ConvergenceSuite),
}

/// Solves the scenario, runs the suites and writes every output file.
pub fn run(sc: &Scenario, opts: &RunOptions) -> Result<RunReport, CliError> {
    let seed = opts.seed.unwrap_or(sc.seed);
    let mut selected = opts.suites.clone().unwrap_or_else(|| sc.suites.clone());
    selected.sort();
    selected.dedup();
    if selected.contains(&Suite::Convergence) && opts.levels < 3 {
        return Err(CliError::input(format!("a convergence study needs at least 3 levels, got {}", opts.levels)));
    }

    let (problem, reference) = sc.build()?;
    let (traj, stats) = solve_with(&problem, &sc.solver_options())?;
    let err = match &reference {
        Some(r) => Some(dpp_core::study::trajectory_error(&traj, r)?),
        None => None,
    };

    let mut timing = vec![];
    let results: Vec<(Suite, f64, SuiteResult)> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&suite| {
                let (problem, traj) = (&problem, &traj);
                s.spawn(move || {
                    let start = Instant::now();
                    let r = match suite {
                        Suite::Uniqueness => suites::uniqueness(sc, problem, seed).map(|(a, b)| (Outcome::Uniqueness(a), b)),
                        Suite::Reciprocity => suites::reciprocity(sc).map(|(a, b)| (Outcome::Reciprocity(a), b)),
                        Suite::Variational => {
                            suites::variational(sc, problem, traj, seed).map(|(a, b)| (Outcome::Variational(a), b))
                        }
                        Suite::Convergence => {
                            suites::convergence(sc, opts.levels, seed).map(|(a, b)| (Outcome::Convergence(a), b))
                        }
                    };
                    (suite, start.elapsed().as_secs_f64(), r)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });

    let mut reports = SuiteReports::default();
    let mut series = vec![];
    for (suite, secs, r) in results {
        let (outcome, s) = r?;
        timing.push((suite, secs));
        series.extend(s);
        match outcome {
            Outcome::Uniqueness(x) => reports.uniqueness = Some(x),
            Outcome::Reciprocity(x) => reports.reciprocity = Some(x),
            Outcome::Variational(x) => reports.variational = Some(x),
            Outcome::Convergence(x) => reports.convergence = Some(x),
        }
    }

    let mut solution = Series::new("solution", &["t", "max_abs_u1", "max_abs_u2", "mean_p1", "mean_p2"]);
    for snap in &traj.snapshots {
        let m = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        solution.push(vec![snap.t, m(&snap.u[0]), m(&snap.u[1]), mean(&snap.p[0]), mean(&snap.p[1])]);
    }
    series.push(solution);

    let report = RunReport {
        status: if reports.pass() { "pass" } else { "fail" },
        version: env!("CARGO_PKG_VERSION"),
        seed,
        levels: opts.levels,
        suites_run: selected,
        scenario: sc.clone(),
        problem: ProblemSummary {
            cells: problem.grid.n_cells(),
            faces: problem.grid.n_faces(),
            steps: problem.steps,
            dt: problem.dt(),
            scheme: sc.scheme().name(),
            manufactured: reference.is_some(),
        },
        solve: SolveSummary {
            unknowns: stats.unknowns,
            solves: stats.solves,
            max_relative_residual: stats.max_relative_residual,
            velocity_error: err.map(|e| e.velocity),
            pressure_error: err.map(|e| e.pressure),
        },
        warnings: compatibility_warnings(&problem),
        suites: reports,
    };

    let out = &opts.out;
    std::fs::create_dir_all(out.join("series"))?;
    for s in &series {
        write_csv(&out.join("series"), s)?;
    }
    for &k in &sc.output.vtk_steps {
        let snap = traj
            .snapshots
            .get(k)
            .ok_or_else(|| CliError::input(format!("output.vtk_steps: step {k} is past the final step")))?;
        write_file(&out.join("fields").join(format!("step{k:05}.vtk")), &vtk_snapshot(&problem.grid, snap))?;
    }
    write_file(&out.join("report.json"), &json::to_string(&report).map_err(|e| CliError::Io(e.into()))?)?;
    let timing: Vec<_> = timing.iter().map(|(s, t)| (s.name(), *t)).collect();
    write_file(&out.join("timing.json"), &json::to_string(&timing).map_err(|e| CliError::Io(e.into()))?)?;
    Ok(report)
}

/// Reads, runs and reports; returns the process exit code. Errors are written
/// as a JSON error report to `out/report.json` (when possible) and stderr.
pub fn run_file(path: &Path, opts: &RunOptions) -> i32 {
    let result = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
        .and_then(|text| parse_scenario(&text))
        .and_then(|sc| run(&sc, opts));
    match result {
        Ok(r) => {
            eprintln!("{}: {}", r.status, opts.out.join("report.json").display());
            r.exit_code()
        }
        Err(e) => {
            let text = json::to_string(&e.report()).unwrap_or_else(|_| "{\"status\": \"error\"}\n".to_string());
            let _ = write_file(&opts.out.join("report.json"), &text);
            eprint!("{text}");
            e.exit_code()
        }
    }
}
