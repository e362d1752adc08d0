//! Small dense linear algebra shared by the LP solvers.

// Index loops here address several arrays at once; iterator forms read worse.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("ragged matrix rows".into()));
        }
        Ok(DenseMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col_copy(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Largest absolute entry; 0 for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Find a nontrivial combination `z` with `sum_j z_j * cols[j] = 0`, or
/// `None` if the given columns are linearly independent at `tol`.
///
/// Gauss-Jordan over a working copy: columns are processed left to right;
/// the first column that reduces to (numerical) zero outside the pivot
/// rows is expressed through the earlier pivot columns.
pub fn column_dependency(m: usize, cols: &[&[f64]], tol: f64) -> Option<Vec<f64>> {
    let w = cols.len();
    let mut work = DenseMatrix::zeros(m, w);
    for (j, col) in cols.iter().enumerate() {
        debug_assert_eq!(col.len(), m);
        for r in 0..m {
            work.set(r, j, col[r]);
        }
    }

    // (pivot row, pivot column) pairs in processing order.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row_used = vec![false; m];

    for j in 0..w {
        // Pick the largest remaining entry of column j as pivot.
        let mut best_r = None;
        let mut best_v = tol;
        for r in 0..m {
            if !row_used[r] && work.get(r, j).abs() > best_v {
                best_v = work.get(r, j).abs();
                best_r = Some(r);
            }
        }
        match best_r {
            Some(p) => {
                // Clear column j from every other row.
                let pv = work.get(p, j);
                for r in 0..m {
                    if r == p {
                        continue;
                    }
                    let f = work.get(r, j) / pv;
                    if f != 0.0 {
                        for c in j..w {
                            let v = work.get(r, c) - f * work.get(p, c);
                            work.set(r, c, v);
                        }
                    }
                }
                row_used[p] = true;
                pivots.push((p, j));
            }
            None => {
                // Column j is dependent: coefficients come straight from
                // the reduced pivot rows.
                let mut z = vec![0.0; w];
                z[j] = -1.0;
                for &(pr, pc) in &pivots {
                    z[pc] = work.get(pr, j) / work.get(pr, pc);
                }
                return Some(z);
            }
        }
    }
    None
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(a: &DenseMatrix, tol: f64) -> usize {
    let m = a.nrows();
    let n = a.ncols();
    let mut work = a.clone();
    let mut row_used = vec![false; m];
    let mut rank = 0;
    for j in 0..n {
        let mut best_r = None;
        let mut best_v = tol;
        for r in 0..m {
            if !row_used[r] && work.get(r, j).abs() > best_v {
                best_v = work.get(r, j).abs();
                best_r = Some(r);
            }
        }
        if let Some(p) = best_r {
            let pv = work.get(p, j);
            for r in 0..m {
                if r == p {
                    continue;
                }
                let f = work.get(r, j) / pv;
                if f != 0.0 {
                    for c in j..n {
                        let v = work.get(r, c) - f * work.get(p, c);
                        work.set(r, c, v);
                    }
                }
            }
            row_used[p] = true;
            rank += 1;
        }
    }
    rank
}

/// Invert a square matrix by Gauss-Jordan with partial pivoting.
pub fn invert(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidParameter("invert requires a square matrix".into()));
    }
    let mut work = a.clone();
    let mut inv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        inv.set(i, i, 1.0);
    }
    for col in 0..n {
        let mut p = col;
        let mut best = work.get(col, col).abs();
        for r in col + 1..n {
            if work.get(r, col).abs() > best {
                best = work.get(r, col).abs();
                p = r;
            }
        }
        if best <= tol {
            return Err(Error::SolverBreakdown("singular basis matrix".into()));
        }
        if p != col {
            for c in 0..n {
                let (x, y) = (work.get(col, c), work.get(p, c));
                work.set(col, c, y);
                work.set(p, c, x);
                let (x, y) = (inv.get(col, c), inv.get(p, c));
                inv.set(col, c, y);
                inv.set(p, c, x);
            }
        }
        let pv = work.get(col, col);
        for c in 0..n {
            work.set(col, c, work.get(col, c) / pv);
            inv.set(col, c, inv.get(col, c) / pv);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work.get(r, col);
            if f != 0.0 {
                for c in 0..n {
                    work.set(r, c, work.get(r, c) - f * work.get(col, c));
                    inv.set(r, c, inv.get(r, c) - f * inv.get(col, c));
                }
            }
        }
    }
    Ok(inv)
}
