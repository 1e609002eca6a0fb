//! Transient flow in double-porosity/permeability media on structured grids,
//! with checks of uniqueness, reciprocity and variational structure.

pub mod convolution;
pub mod energy;
pub mod error;
pub mod grid;
mod linsys;
pub mod model;
pub mod reciprocity;
pub mod solver;
pub mod study;
pub mod tolerances;
pub mod variational;

pub use convolution::{Kind, Pairing, TimeSeries};
pub use error::{Error, Result};
pub use grid::{BoundaryFace, BoundaryFaceSet, CellField, FaceField, FaceRule, Side, StructuredGrid};
pub use model::{
    BcKind, BoundaryLayout, BoundarySpec, DppProblem, LoadSet, ManufacturedCase, Material, NetworkLoads, MACRO, MICRO,
};
pub use solver::{LinearSystemStats, Scheme, SolverOptions, StateSnapshot, Trajectory};
pub use tolerances::Tolerances;
