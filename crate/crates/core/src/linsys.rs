//! Sparse symmetric positive-definite solves for the pressure systems.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};
use crate::solver::LinearSystemStats;

pub(crate) struct SpdSystem {
    n: usize,
    full: CscMatrix<f64>,
    chol: CscCholesky<f64>,
    pinned: Vec<usize>,
}

impl SpdSystem {
    /// Factors the matrix given by `triplets` (duplicates are summed) after
    /// replacing the rows and columns of `pinned` by the identity.
    pub fn new(n: usize, triplets: &[(usize, usize, f64)], pinned: &[usize]) -> Result<Self> {
        let mut full = CooMatrix::new(n, n);
        let mut reduced = CooMatrix::new(n, n);
        for &(i, j, v) in triplets {
            full.push(i, j, v);
            if !pinned.contains(&i) && !pinned.contains(&j) {
                reduced.push(i, j, v);
            }
        }
        for &p in pinned {
            reduced.push(p, p, 1.0);
        }
        let reduced = CscMatrix::from(&reduced);
        let chol = CscCholesky::factor(&reduced).map_err(|e| Error::Numerical {
            message: format!("pressure system factorization failed: {e}"),
            stats: LinearSystemStats { unknowns: n, ..Default::default() },
        })?;
        Ok(Self { n, full: CscMatrix::from(&full), chol, pinned: pinned.to_vec() })
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, j, v) in self.full.triplet_iter() {
            y[i] += v * x[j];
        }
        y
    }

    fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (i, _, v) in self.full.triplet_iter() {
            rows[i] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = b.to_vec();
        for &p in &self.pinned {
            rhs[p] = 0.0;
        }
        let x = self.chol.solve(&DMatrix::from_column_slice(self.n, 1, &rhs));
        x.as_slice().to_vec()
    }

    /// Solves with one round of iterative refinement. Returns the solution and
    /// its relative residual against the unpinned matrix.
    pub fn solve(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let mut x = self.raw_solve(b);
        let r: Vec<f64> = self.apply(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        let dx = self.raw_solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        let res = self.apply(&x).iter().zip(b).fold(0.0_f64, |m, (ax, bi)| m.max((bi - ax).abs()));
        let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let denom = self.norm_inf() * xn + bn;
        let rel = if denom > 0.0 { res / denom } else { 0.0 };
        (x, rel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let s = SpdSystem::new(n, &t, &[]).unwrap();
        let (x, rel) = s.solve(&[1.0; 5]);
        assert!(rel < 1e-14);
        assert!((x[2] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn pinned_singular_laplacian() {
        let n = 4;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.extend([(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)]);
        }
        let s = SpdSystem::new(n, &t, &[0]).unwrap();
        let (x, rel) = s.solve(&[1.0, 0.0, 0.0, -1.0]);
        assert!(rel < 1e-14);
        assert_eq!(x[0], 0.0);
        // Inconsistent data leaves a residual on the pinned row.
        let (_, rel) = s.solve(&[1.0, 0.0, 0.0, 0.0]);
        assert!(rel > 1e-3);
    }
}
