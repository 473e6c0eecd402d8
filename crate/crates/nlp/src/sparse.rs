//! Coordinate-format sparse matrices used for Jacobians and Hessians.

/// A sparse matrix in coordinate (triplet) form. Duplicate entries are summed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            ..Default::default()
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols, "({row},{col}) out of range");
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(val);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.vals)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for (r, c, v) in self.iter() {
            y[r] += v * x[c];
        }
        y
    }

    /// `y = Aᵀ x`
    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (r, c, v) in self.iter() {
            y[c] += v * x[r];
        }
        y
    }

    /// Row-major dense copy with duplicates summed.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            d[r][c] += v;
        }
        d
    }

    /// Dense copy of a symmetric matrix given by one triangle: each off-diagonal
    /// entry is mirrored.
    pub fn symmetric_to_dense(&self) -> Vec<Vec<f64>> {
        assert_eq!(self.nrows, self.ncols);
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            d[r][c] += v;
            if r != c {
                d[c][r] += v;
            }
        }
        d
    }

    /// Row-wise grouping of entries: `rows[i]` lists `(col, val)` pairs.
    pub fn by_row(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.nrows];
        for (r, c, v) in self.iter() {
            out[r].push((c, v));
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.vals {
            *v *= factor;
        }
    }

    /// Appends all entries of `other`, shifted by the given offsets.
    pub fn extend_shifted(&mut self, other: &Triplets, row_off: usize, col_off: usize) {
        for (r, c, v) in other.iter() {
            self.push(r + row_off, c + col_off, v);
        }
    }
}
