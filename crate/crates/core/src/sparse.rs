//! Compressed sparse column matrices and a coordinate accumulator.

use crate::error::{Error, Result};

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct CooMatrix {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooMatrix {
            nrows,
            ncols,
            ..Default::default()
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Appends the entries of `o` (same shape).
    pub fn append(&mut self, o: &mut CooMatrix) {
        self.rows.append(&mut o.rows);
        self.cols.append(&mut o.cols);
        self.vals.append(&mut o.vals);
    }

    /// Compressed form with duplicates summed in insertion order.
    pub fn to_csc(&self) -> CscMatrix {
        let n = self.ncols;
        let mut count = vec![0usize; n + 1];
        for &j in &self.cols {
            count[j + 1] += 1;
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let nnz = self.vals.len();
        let mut ri = vec![0usize; nnz];
        let mut rv = vec![0.0; nnz];
        for k in 0..nnz {
            let j = self.cols[k];
            let p = next[j];
            ri[p] = self.rows[k];
            rv[p] = self.vals[k];
            next[j] += 1;
        }
        // sort each column by row (stable keeps insertion order) and merge
        let mut colptr = vec![0usize; n + 1];
        let mut rowind = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut perm: Vec<usize> = Vec::new();
        for j in 0..n {
            let (a, b) = (count[j], count[j + 1]);
            perm.clear();
            perm.extend(a..b);
            perm.sort_by_key(|&p| ri[p]);
            let mut last = usize::MAX;
            for &p in &perm {
                if ri[p] == last {
                    *values.last_mut().unwrap() += rv[p];
                } else {
                    rowind.push(ri[p]);
                    values.push(rv[p]);
                    last = ri[p];
                }
            }
            colptr[j + 1] = rowind.len();
        }
        CscMatrix {
            nrows: self.nrows,
            ncols: n,
            colptr,
            rowind,
            values,
        }
    }
}

/// Compressed sparse column matrix with sorted, unique row indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowind: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &[f64], nrows: usize, ncols: usize) -> Self {
        let mut coo = CooMatrix::new(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                let v = a[i * ncols + j];
                if v != 0.0 {
                    coo.push(i, j, v);
                }
            }
        }
        coo.to_csc()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                d[self.rowind[p] * self.ncols + j] = self.values[p];
            }
        }
        d
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.colptr[j]..self.colptr[j + 1];
        (&self.rowind[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        rows.binary_search(&i).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for (j, xj) in x.iter().enumerate().take(self.ncols) {
            if *xj == 0.0 {
                continue;
            }
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowind[p]] += self.values[p] * xj;
            }
        }
        y
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut coo = CooMatrix::new(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                coo.push(j, self.rowind[p], self.values[p]);
            }
        }
        coo.to_csc()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                worst = worst.max((self.values[p] - t.get(self.rowind[p], j)).abs());
            }
            for p in t.colptr[j]..t.colptr[j + 1] {
                worst = worst.max((t.values[p] - self.get(t.rowind[p], j)).abs());
            }
        }
        worst / scale
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    /// Symmetric adjacency (pattern of `A + A^T` without the diagonal).
    pub(crate) fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.ncols;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 0..n {
            for &i in &self.rowind[self.colptr[j]..self.colptr[j + 1]] {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    pub(crate) fn check_square(&self, b: usize) -> Result<()> {
        if self.nrows != self.ncols || b != self.nrows {
            return Err(Error::InvalidArgument(format!(
                "system is {}x{} with a right-hand side of length {b}",
                self.nrows, self.ncols
            )));
        }
        Ok(())
    }
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
