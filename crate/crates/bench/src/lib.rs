//! Problem builders shared by the benchmarks.

use dpp_core::*;

/// Unloaded problem with velocity data on the left (and bottom/top in 2D)
/// and pressure data on the right.
pub fn problem(dim: usize, n: usize, steps: usize) -> DppProblem {
    let g = if dim == 1 {
        StructuredGrid::new(1, &[1.0], &[n]).unwrap()
    } else {
        StructuredGrid::new(2, &[1.0, 1.0], &[n, n]).unwrap()
    };
    let m = Material::uniform(&g, 1.0, 1.0, 1.0, [0.4, 0.2], [[1.0, 1.0], [0.1, 0.1]]);
    let mut sides = vec![(Side::Left, BcKind::Velocity), (Side::Right, BcKind::Pressure)];
    if dim == 2 {
        sides.extend([(Side::Bottom, BcKind::Velocity), (Side::Top, BcKind::Velocity)]);
    }
    let b = BoundarySpec::from_layout(&g, &BoundaryLayout::same_for_both(&sides));
    let loads = LoadSet::zero(&g, &b, 1.0 / steps as f64, steps);
    DppProblem { grid: g, material: m, boundary: b, loads, t_final: 1.0, steps }
}
