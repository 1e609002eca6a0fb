//! CSV series and legacy VTK snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dpp_core::{StateSnapshot, StructuredGrid};

use crate::error::CliError;
use crate::json::float;

/// A named table of float columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn write_csv(dir: &Path, s: &Series) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(dir.join(format!("{}.csv", s.name)))
        .map_err(|e| CliError::Io(e.into()))?;
    let io = |e: csv::Error| CliError::Io(e.into());
    w.write_record(&s.header).map_err(io)?;
    for r in &s.rows {
        w.write_record(r.iter().map(|v| float(*v))).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Legacy ASCII STRUCTURED_POINTS file with both pressures and both
/// cell-averaged velocities as cell data.
pub fn vtk_snapshot(grid: &StructuredGrid, snap: &StateSnapshot) -> String {
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let (hy, dims_y) = if grid.dim() == 2 { (h[1], ny + 1) } else { (1.0, 1) };
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "double porosity flow t={}", float(snap.t));
    let _ = writeln!(s, "ASCII\nDATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", nx + 1, dims_y);
    let _ = writeln!(s, "ORIGIN 0 0 0");
    let _ = writeln!(s, "SPACING {} {} 1", float(h[0]), float(hy));
    let _ = writeln!(s, "CELL_DATA {}", grid.n_cells());
    for (n, name) in ["p1", "p2"].iter().enumerate() {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in &snap.p[n] {
            let _ = writeln!(s, "{}", float(*v));
        }
    }
    for (n, name) in ["u1", "u2"].iter().enumerate() {
        let _ = writeln!(s, "VECTORS {name} double");
        let u = &snap.u[n];
        for j in 0..ny {
            for i in 0..nx {
                let ux = 0.5 * (u[grid.x_face_index(i, j)] + u[grid.x_face_index(i + 1, j)]);
                let uy = if grid.dim() == 2 {
                    0.5 * (u[grid.y_face_index(i, j)] + u[grid.y_face_index(i, j + 1)])
                } else {
                    0.0
                };
                let _ = writeln!(s, "{} {} 0", float(ux), float(uy));
            }
        }
    }
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vtk_layout() {
        let g = StructuredGrid::new(2, &[1.0, 1.0], &[2, 3]).unwrap();
        let mut s = StateSnapshot::zero(&g, 0.5);
        s.p[0] = (0..6).map(|c| c as f64).collect();
        let text = vtk_snapshot(&g, &s);
        assert!(text.contains("DIMENSIONS 3 4 1"));
        assert!(text.contains("CELL_DATA 6"));
        assert_eq!(text.lines().filter(|l| l.ends_with(" 0") && l.split(' ').count() == 3).count(), 12);
    }

    #[test]
    fn csv_header_and_lf() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Series::new("x", &["t", "v"]);
        s.push(vec![0.0, 1.5]);
        write_csv(dir.path(), &s).unwrap();
        let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "t,v\n0.0000000000000000e0,1.5000000000000000e0\n");
    }
}
