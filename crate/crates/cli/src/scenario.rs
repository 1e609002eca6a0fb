//! Scenario files: strict JSON, resolved into core problems.

use serde::{Deserialize, Serialize};

use dpp_core::model::{manufacture, validate};
use dpp_core::{
    BcKind, BoundaryLayout, BoundarySpec, DppProblem, Kind, LoadSet, ManufacturedCase, Material, Scheme, Side,
    SolverOptions, StructuredGrid, TimeSeries, Tolerances, Trajectory,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    pub material: MaterialSpec,
    pub boundary: BoundaryDoc,
    pub loads: LoadSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub uniqueness: UniquenessSpec,
    #[serde(default)]
    pub reciprocity: ReciprocitySpec,
    #[serde(default)]
    pub variational: VariationalSpec,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Uniqueness,
    Reciprocity,
    Variational,
    Convergence,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Uniqueness => "uniqueness",
            Suite::Reciprocity => "reciprocity",
            Suite::Variational => "variational",
            Suite::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        [Suite::Uniqueness, Suite::Reciprocity, Suite::Variational, Suite::Convergence]
            .into_iter()
            .find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dimension: usize,
    pub extent: Vec<f64>,
    pub cells: Vec<usize>,
}

/// A value given once for the whole grid or once per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerCell<T> {
    Uniform(T),
    Cells(Vec<T>),
}

impl<T: Clone> PerCell<T> {
    /// Values on `grid`, whose cells are the scenario cells split `refine`
    /// times per axis.
    fn on_grid(&self, grid: &StructuredGrid, refine: usize, what: &str) -> Result<Vec<T>, CliError> {
        match self {
            PerCell::Uniform(v) => Ok(vec![v.clone(); grid.n_cells()]),
            PerCell::Cells(v) => {
                let coarse = grid.n_cells() >> (refine * grid.dim());
                if v.len() != coarse {
                    return Err(CliError::input_at(
                        what.into(),
                        format!("expected {coarse} cell values, got {}", v.len()),
                    ));
                }
                Ok(refine_cells(v, grid, refine))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkMaterial {
    pub porosity: PerCell<f64>,
    /// Diagonal permeability, one entry per axis.
    pub permeability: PerCell<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub density: f64,
    pub viscosity: f64,
    pub transfer: f64,
    #[serde(rename = "macro")]
    pub macro_: NetworkMaterial,
    pub micro: NetworkMaterial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcDoc {
    Velocity,
    Pressure,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<BcDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<BcDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<BcDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<BcDoc>,
}

impl SideMap {
    fn entries(&self) -> [(Side, Option<BcDoc>); 4] {
        [(Side::Left, self.left), (Side::Right, self.right), (Side::Bottom, self.bottom), (Side::Top, self.top)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDoc {
    #[serde(rename = "macro")]
    pub macro_: SideMap,
    pub micro: SideMap,
}

/// Constant-in-time data of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitLoads {
    /// Specific body force, one component per axis.
    pub body_force: Vec<f64>,
    /// Initial velocity, one component per axis; boundary faces of the
    /// velocity set take the prescribed normal velocity instead.
    pub initial_velocity: Vec<f64>,
    /// Outward normal velocity on velocity faces.
    pub boundary_velocity: f64,
    /// Pressure on pressure faces.
    pub boundary_pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadSpec {
    Rest {
        pressure: f64,
    },
    UniformDecay {
        a1: f64,
        a2: f64,
    },
    Smooth {
        amplitude: f64,
        wavenumber: u32,
    },
    Explicit {
        #[serde(rename = "macro")]
        macro_: ExplicitLoads,
        micro: ExplicitLoads,
    },
}

impl LoadSpec {
    pub fn manufactured(&self) -> Option<ManufacturedCase> {
        match *self {
            LoadSpec::Rest { pressure } => Some(ManufacturedCase::Rest { pressure }),
            LoadSpec::UniformDecay { a1, a2 } => Some(ManufacturedCase::UniformDecay { a1, a2 }),
            LoadSpec::Smooth { amplitude, wavenumber } => Some(ManufacturedCase::Smooth { amplitude, wavenumber }),
            LoadSpec::Explicit { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    BackwardEuler,
    #[default]
    CrankNicolson,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Scheme {
        match s {
            SchemeName::BackwardEuler => Scheme::BackwardEuler,
            SchemeName::CrankNicolson => Scheme::CrankNicolson,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub final_time: f64,
    pub steps: usize,
    #[serde(default)]
    pub scheme: SchemeName,
}

fn default_linear_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_linear_tolerance")]
    pub tolerance: f64,
    /// Pin one pressure per network when the pressure level is otherwise free.
    #[serde(default)]
    pub pin_pressure: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { tolerance: default_linear_tolerance(), pin_pressure: false }
    }
}

macro_rules! overrides {
    ($($field:ident),* $(,)?) => {
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct ToleranceOverrides {
            $(
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<f64>,
            )*
        }

        impl ToleranceOverrides {
            pub fn resolve(&self) -> Tolerances {
                let mut t = Tolerances::default();
                $(if let Some(v) = self.$field { t.$field = v; })*
                t
            }
        }
    };
}

overrides!(
    linear_residual,
    margin_constant,
    single_mode,
    pressure_offset,
    commutativity,
    adjointness,
    reciprocity,
    stationarity,
    variation_agreement,
    order_band_time,
    order_band_joint,
    min_order,
);

fn default_pairs() -> usize {
    5
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSpec {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Start of the exponential lower bound.
    #[serde(default)]
    pub t1: f64,
}

impl Default for UniquenessSpec {
    fn default() -> Self {
        Self { pairs: default_pairs(), amplitude: one(), t1: 0.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReciprocitySpec {
    /// Loads of the second problem; the scenario loads when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<LoadSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    #[default]
    Corrected,
    Literal,
}

fn default_directions() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalSpec {
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub form: FormName,
}

impl Default for VariationalSpec {
    fn default() -> Self {
        Self { directions: default_directions(), form: FormName::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refine {
    /// Halve Δt only.
    Time,
    /// Halve `h` and Δt together.
    #[default]
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    SolutionError,
    Reciprocity,
    Stationarity,
}

fn default_quantities() -> Vec<Quantity> {
    vec![Quantity::SolutionError]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    #[serde(default)]
    pub refine: Refine,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self { refine: Refine::default(), quantities: default_quantities() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Time steps at which to write VTK snapshots.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vtk_steps: Vec<usize>,
}

/// Parses scenario text, reporting the path of the offending key on failure.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::input_at(path, e.into_inner().to_string())
    })?;
    sc.check()?;
    Ok(sc)
}

impl Scenario {
    fn check(&self) -> Result<(), CliError> {
        let mut issues = Vec::new();
        let d = self.grid.dimension;
        if d == 1 {
            for (name, m) in [("macro", &self.boundary.macro_), ("micro", &self.boundary.micro)] {
                if m.bottom.is_some() || m.top.is_some() {
                    issues.push(format!("boundary.{name}: a 1D grid has only left and right sides"));
                }
            }
        }
        if self.uniqueness.pairs == 0 {
            issues.push("uniqueness.pairs: must be at least 1".into());
        }
        if self.variational.directions == 0 {
            issues.push("variational.directions: must be at least 1".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(CliError::Input { message: "invalid scenario".into(), details: issues })
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.time.scheme.into()
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { scheme: self.scheme(), tolerance: self.solver.tolerance, pin_pressure: self.solver.pin_pressure }
    }

    pub fn tolerances(&self) -> Tolerances {
        let mut t = self.tolerances.resolve();
        if self.tolerances.linear_residual.is_none() {
            t.linear_residual = self.solver.tolerance;
        }
        t
    }

    pub fn build_grid(&self, refine: usize) -> Result<StructuredGrid, CliError> {
        let g = &self.grid;
        let cells: Vec<usize> = g.cells.iter().map(|c| c << refine).collect();
        StructuredGrid::new(g.dimension, &g.extent, &cells).map_err(|e| CliError::input_at("grid".into(), e.to_string()))
    }

    fn build_material(&self, grid: &StructuredGrid, refine: usize) -> Result<Material, CliError> {
        let m = &self.material;
        let d = grid.dim();
        let nets = [("macro", &m.macro_), ("micro", &m.micro)];
        let mut phi = [vec![], vec![]];
        let mut k = [vec![], vec![]];
        for (i, (name, nm)) in nets.into_iter().enumerate() {
            phi[i] = nm.porosity.on_grid(grid, refine, &format!("material.{name}.porosity"))?;
            let perm = nm.permeability.on_grid(grid, refine, &format!("material.{name}.permeability"))?;
            k[i] = perm
                .iter()
                .map(|v| {
                    if v.len() != d {
                        return Err(CliError::input_at(
                            format!("material.{name}.permeability"),
                            format!("expected {d} components per cell, got {}", v.len()),
                        ));
                    }
                    Ok([v[0], if d == 2 { v[1] } else { 1.0 }])
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(Material { gamma: m.density, mu: m.viscosity, beta: m.transfer, phi, k })
    }

    fn layout(&self) -> BoundaryLayout {
        let conv = |m: &SideMap| {
            m.entries()
                .into_iter()
                .filter_map(|(s, k)| {
                    k.map(|k| {
                        (s, match k {
                            BcDoc::Velocity => BcKind::Velocity,
                            BcDoc::Pressure => BcKind::Pressure,
                        })
                    })
                })
                .collect()
        };
        BoundaryLayout { networks: [conv(&self.boundary.macro_), conv(&self.boundary.micro)] }
    }

    /// The problem at refinement `refine` with the given loads, and the exact
    /// solution when the loads are manufactured.
    pub fn build_with(
        &self,
        loads: &LoadSpec,
        refine_space: usize,
        refine_time: usize,
    ) -> Result<(DppProblem, Option<Trajectory>), CliError> {
        let grid = self.build_grid(refine_space)?;
        let material = self.build_material(&grid, refine_space)?;
        let steps = self.time.steps << refine_time;
        let t_final = self.time.final_time;
        let layout = self.layout();
        let (problem, reference) = match loads.manufactured() {
            Some(case) if steps > 0 && t_final > 0.0 => {
                let (p, r) = manufacture(&grid, &material, &case, &layout, t_final, steps)?;
                (p, Some(r))
            }
            _ => {
                let boundary = BoundarySpec::from_layout(&grid, &layout);
                let dt = if steps > 0 { t_final / steps as f64 } else { t_final };
                let mut set = LoadSet::zero(&grid, &boundary, dt, steps);
                if let LoadSpec::Explicit { macro_, micro } = loads {
                    for (n, l) in [macro_, micro].into_iter().enumerate() {
                        fill_explicit(&grid, &boundary, n, l, &mut set)?;
                    }
                }
                (DppProblem { grid, material, boundary, loads: set, t_final, steps }, None)
            }
        };
        let violations = validate(&problem);
        if !violations.is_empty() {
            return Err(CliError::Input {
                message: "scenario does not describe a valid problem".into(),
                details: violations.iter().map(|v| v.to_string()).collect(),
            });
        }
        Ok((problem, reference))
    }

    pub fn build(&self) -> Result<(DppProblem, Option<Trajectory>), CliError> {
        self.build_with(&self.loads, 0, 0)
    }
}

/// Copies coarse per-cell values onto a grid refined `refine` times.
fn refine_cells<T: Clone>(coarse: &[T], grid: &StructuredGrid, refine: usize) -> Vec<T> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let cnx = nx >> refine;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let cj = if grid.dim() == 2 { j >> refine } else { 0 };
            out.push(coarse[cj * cnx + (i >> refine)].clone());
        }
    }
    out
}

fn fill_explicit(
    grid: &StructuredGrid,
    boundary: &BoundarySpec,
    n: usize,
    l: &ExplicitLoads,
    set: &mut LoadSet,
) -> Result<(), CliError> {
    let d = grid.dim();
    let name = ["macro", "micro"][n];
    for (field, v) in [("body_force", &l.body_force), ("initial_velocity", &l.initial_velocity)] {
        if v.len() != d {
            return Err(CliError::input_at(
                format!("loads.{name}.{field}"),
                format!("expected {d} components, got {}", v.len()),
            ));
        }
    }
    let nl = &mut set.networks[n];
    let bnd = &boundary.networks[n];
    let per_face = |v: &[f64]| -> Vec<f64> { (0..grid.n_faces()).map(|f| v[grid.face_axis(f)]).collect() };
    let bf = per_face(&l.body_force);
    nl.body_force = TimeSeries::constant(nl.body_force.dt(), nl.body_force.steps(), Kind::Face, &bf);
    let mut u0 = per_face(&l.initial_velocity);
    for f in &bnd.velocity.faces {
        u0[f.face] = f.normal_sign() * l.boundary_velocity;
    }
    nl.initial_velocity = u0;
    let vd = vec![l.boundary_velocity; bnd.velocity.len()];
    nl.velocity_data = TimeSeries::constant(nl.velocity_data.dt(), nl.velocity_data.steps(), Kind::Boundary, &vd);
    let pd = vec![l.boundary_pressure; bnd.pressure.len()];
    nl.pressure_data = TimeSeries::constant(nl.pressure_data.dt(), nl.pressure_data.steps(), Kind::Boundary, &pd);
    Ok(())
}
