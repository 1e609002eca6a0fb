//! Uniform staggered (MAC) grid in one or two dimensions.
//!
//! Pressures live at cell centres, velocity components at the faces normal
//! to them. Indexing is x-fastest throughout:
//!
//! * cell `(i, j)` has index `i + nx * j`;
//! * x-face `(i, j)` (the face at `x = i * hx` in row `j`) has index
//!   `i + (nx + 1) * j`;
//! * y-face `(i, j)` (the face at `y = j * hy` in column `i`) has index
//!   `nx_faces + i + nx * j`, where `nx_faces = (nx + 1) * ny`.
//!
//! In 1D the grid is a single row (`ny = 1`) of unit depth, so cell volumes
//! are `hx` and every x-face has unit area.
//!
//! Boundary faces are enumerated left, right, bottom, top; within a side in
//! increasing order of the tangential index. The position of a face in that
//! list is its *boundary ordinal*.

use crate::error::{invalid, Result};

pub type CellField = Vec<f64>;
pub type FaceField = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn axis(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    /// Sign of the outward normal along `axis()`.
    pub fn normal_sign(self) -> f64 {
        match self {
            Side::Left | Side::Bottom => -1.0,
            Side::Right | Side::Top => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub face: usize,
    pub side: Side,
    /// Cell adjacent to the face.
    pub cell: usize,
}

impl BoundaryFace {
    pub fn normal_axis(&self) -> usize {
        self.side.axis()
    }

    pub fn normal_sign(&self) -> f64 {
        self.side.normal_sign()
    }
}

/// Ordered collection of boundary faces, e.g. one part of a partition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryFaceSet {
    pub faces: Vec<BoundaryFace>,
}

impl BoundaryFaceSet {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, face: usize) -> bool {
        self.faces.iter().any(|b| b.face == face)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceRule {
    /// Boundary faces carry half the cell volume.
    Trapezoidal,
    /// Every face carries a full cell volume.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredGrid {
    dim: usize,
    extent: [f64; 2],
    cells: [usize; 2],
    h: [f64; 2],
}

impl StructuredGrid {
    pub fn new(dim: usize, extent: &[f64], cells: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return invalid(format!("dimension must be 1 or 2, got {dim}"));
        }
        if extent.len() != dim || cells.len() != dim {
            return invalid(format!(
                "expected {dim} extents and cell counts, got {} and {}",
                extent.len(),
                cells.len()
            ));
        }
        for a in 0..dim {
            if !(extent[a] > 0.0) || !extent[a].is_finite() {
                return invalid(format!("extent on axis {a} must be positive, got {}", extent[a]));
            }
            if cells[a] == 0 {
                return invalid(format!("cell count on axis {a} must be positive"));
            }
        }
        let (ey, ny) = if dim == 2 { (extent[1], cells[1]) } else { (1.0, 1) };
        Ok(Self {
            dim,
            extent: [extent[0], ey],
            cells: [cells[0], ny],
            h: [extent[0] / cells[0] as f64, ey / ny as f64],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn h(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    pub fn n_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn n_x_faces(&self) -> usize {
        (self.cells[0] + 1) * self.cells[1]
    }

    pub fn n_y_faces(&self) -> usize {
        if self.dim == 2 {
            self.cells[0] * (self.cells[1] + 1)
        } else {
            0
        }
    }

    pub fn n_faces(&self) -> usize {
        self.n_x_faces() + self.n_y_faces()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1]
    }

    /// Area of a face normal to `axis` (unit depth in 1D).
    pub fn face_area(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.h[1]
        } else {
            self.h[0]
        }
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    pub fn x_face_index(&self, i: usize, j: usize) -> usize {
        i + (self.cells[0] + 1) * j
    }

    pub fn y_face_index(&self, i: usize, j: usize) -> usize {
        self.n_x_faces() + i + self.cells[0] * j
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let nx = self.cells[0];
        let (i, j) = (c % nx, c / nx);
        [(i as f64 + 0.5) * self.h[0], (j as f64 + 0.5) * self.h[1]]
    }

    pub fn face_axis(&self, f: usize) -> usize {
        if f < self.n_x_faces() {
            0
        } else {
            1
        }
    }

    pub fn face_center(&self, f: usize) -> [f64; 2] {
        let nx = self.cells[0];
        if f < self.n_x_faces() {
            let (i, j) = (f % (nx + 1), f / (nx + 1));
            [i as f64 * self.h[0], (j as f64 + 0.5) * self.h[1]]
        } else {
            let g = f - self.n_x_faces();
            let (i, j) = (g % nx, g / nx);
            [(i as f64 + 0.5) * self.h[0], j as f64 * self.h[1]]
        }
    }

    /// Cells on the negative and positive side of a face along its axis.
    pub fn face_cells(&self, f: usize) -> (Option<usize>, Option<usize>) {
        let (nx, ny) = (self.cells[0], self.cells[1]);
        if f < self.n_x_faces() {
            let (i, j) = (f % (nx + 1), f / (nx + 1));
            let lo = (i > 0).then(|| self.cell_index(i - 1, j));
            let hi = (i < nx).then(|| self.cell_index(i, j));
            (lo, hi)
        } else {
            let g = f - self.n_x_faces();
            let (i, j) = (g % nx, g / nx);
            let lo = (j > 0).then(|| self.cell_index(i, j - 1));
            let hi = (j < ny).then(|| self.cell_index(i, j));
            (lo, hi)
        }
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        let (lo, hi) = self.face_cells(f);
        lo.is_none() || hi.is_none()
    }

    /// Quadrature weight of a face under the given rule.
    pub fn face_weight(&self, f: usize, rule: FaceRule) -> f64 {
        let v = self.cell_volume();
        match rule {
            FaceRule::Trapezoidal if self.is_boundary_face(f) => 0.5 * v,
            _ => v,
        }
    }

    pub fn face_weights(&self, rule: FaceRule) -> Vec<f64> {
        (0..self.n_faces()).map(|f| self.face_weight(f, rule)).collect()
    }

    /// Faces bounding a cell as `(face, outward sign)` pairs.
    pub fn cell_faces(&self, c: usize) -> Vec<(usize, f64)> {
        let nx = self.cells[0];
        let (i, j) = (c % nx, c / nx);
        let mut out = vec![(self.x_face_index(i, j), -1.0), (self.x_face_index(i + 1, j), 1.0)];
        if self.dim == 2 {
            out.push((self.y_face_index(i, j), -1.0));
            out.push((self.y_face_index(i, j + 1), 1.0));
        }
        out
    }

    pub fn side_faces(&self, side: Side) -> Vec<BoundaryFace> {
        let (nx, ny) = (self.cells[0], self.cells[1]);
        match side {
            Side::Left => (0..ny)
                .map(|j| BoundaryFace { face: self.x_face_index(0, j), side, cell: self.cell_index(0, j) })
                .collect(),
            Side::Right => (0..ny)
                .map(|j| BoundaryFace { face: self.x_face_index(nx, j), side, cell: self.cell_index(nx - 1, j) })
                .collect(),
            Side::Bottom if self.dim == 2 => (0..nx)
                .map(|i| BoundaryFace { face: self.y_face_index(i, 0), side, cell: self.cell_index(i, 0) })
                .collect(),
            Side::Top if self.dim == 2 => (0..nx)
                .map(|i| BoundaryFace { face: self.y_face_index(i, ny), side, cell: self.cell_index(i, ny - 1) })
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn sides(&self) -> &'static [Side] {
        if self.dim == 2 {
            &Side::ALL
        } else {
            &Side::ALL[..2]
        }
    }

    pub fn boundary_faces(&self) -> BoundaryFaceSet {
        BoundaryFaceSet {
            faces: self.sides().iter().flat_map(|&s| self.side_faces(s)).collect(),
        }
    }

    pub fn n_boundary_faces(&self) -> usize {
        if self.dim == 2 {
            2 * (self.cells[0] + self.cells[1])
        } else {
            2
        }
    }

    fn check_cells(&self, f: &[f64], what: &str) -> Result<()> {
        if f.len() != self.n_cells() {
            return invalid(format!("{what}: expected {} cell values, got {}", self.n_cells(), f.len()));
        }
        Ok(())
    }

    fn check_faces(&self, f: &[f64], what: &str) -> Result<()> {
        if f.len() != self.n_faces() {
            return invalid(format!("{what}: expected {} face values, got {}", self.n_faces(), f.len()));
        }
        Ok(())
    }

    pub fn divergence(&self, u: &[f64]) -> Result<CellField> {
        self.check_faces(u, "divergence")?;
        Ok(self.divergence_unchecked(u))
    }

    pub(crate) fn divergence_unchecked(&self, u: &[f64]) -> CellField {
        let (nx, ny) = (self.cells[0], self.cells[1]);
        let mut out = vec![0.0; self.n_cells()];
        for j in 0..ny {
            for i in 0..nx {
                let c = self.cell_index(i, j);
                let mut d = (u[self.x_face_index(i + 1, j)] - u[self.x_face_index(i, j)]) / self.h[0];
                if self.dim == 2 {
                    d += (u[self.y_face_index(i, j + 1)] - u[self.y_face_index(i, j)]) / self.h[1];
                }
                out[c] = d;
            }
        }
        out
    }

    /// Discrete gradient. `boundary[k]` is the pressure at the boundary face
    /// with ordinal `k`; it is required on every boundary face.
    pub fn gradient(&self, p: &[f64], boundary: &[Option<f64>]) -> Result<FaceField> {
        self.check_cells(p, "gradient")?;
        let bfaces = self.boundary_faces();
        if boundary.len() != bfaces.len() {
            return invalid(format!(
                "gradient: expected {} boundary values, got {}",
                bfaces.len(),
                boundary.len()
            ));
        }
        let mut pb = vec![0.0; bfaces.len()];
        for (k, v) in boundary.iter().enumerate() {
            match v {
                Some(x) => pb[k] = *x,
                None => {
                    return invalid(format!(
                        "gradient: missing boundary pressure on face {} ({})",
                        bfaces.faces[k].face,
                        bfaces.faces[k].side.name()
                    ))
                }
            }
        }
        Ok(self.gradient_unchecked(p, &pb))
    }

    /// Gradient with boundary values given per boundary ordinal.
    pub(crate) fn gradient_unchecked(&self, p: &[f64], pb: &[f64]) -> FaceField {
        let mut g = vec![0.0; self.n_faces()];
        for f in 0..self.n_faces() {
            let axis = self.face_axis(f);
            if let (Some(lo), Some(hi)) = self.face_cells(f) {
                g[f] = (p[hi] - p[lo]) / self.h[axis];
            }
        }
        for (k, b) in self.boundary_faces().faces.iter().enumerate() {
            let h = self.h[b.normal_axis()];
            g[b.face] = b.normal_sign() * (pb[k] - p[b.cell]) * 2.0 / h;
        }
        g
    }

    pub fn integrate_cells(&self, f: &[f64]) -> Result<f64> {
        self.check_cells(f, "integrate_cells")?;
        Ok(f.iter().sum::<f64>() * self.cell_volume())
    }

    pub fn integrate_faces(&self, f: &[f64], g: &[f64], rule: FaceRule) -> Result<f64> {
        self.check_faces(f, "integrate_faces")?;
        self.check_faces(g, "integrate_faces")?;
        Ok((0..self.n_faces()).map(|k| self.face_weight(k, rule) * f[k] * g[k]).sum())
    }
}
