//! Column-major dense matrices and the two point-set types built on them.
//!
//! Every point set in this crate is a `d x k` matrix whose columns are points
//! in `R^d`. Storage is column-major so a column is a contiguous slice.

use crate::error::{Error, Result};

/// Dense column-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Wraps a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or(Error::DimensionOverflow { offset: 0 })?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "matrix buffer length",
                expected,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of rows (convenient for literals in tests).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(nrows, ncols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    what: "row length",
                    expected: ncols,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for col in columns {
            if col.len() != nrows {
                return Err(Error::DimensionMismatch {
                    what: "column length",
                    expected: nrows,
                    found: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Self::from_col_major(nrows, ncols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    #[inline]
    pub fn col(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact(0) panics, and a zero-row matrix has no usable columns anyway.
        let step = self.rows.max(1);
        self.data
            .chunks_exact(step)
            .take(if self.rows == 0 { 0 } else { self.cols })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// New matrix holding the listed columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            rows: self.rows,
            cols: indices.len(),
            data,
        }
    }

    /// Reports the first non-finite entry, scanning column by column.
    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                row: k % self.rows,
                col: k / self.rows,
            }),
        }
    }

    /// Root-mean-square column norm, `||M||_F / sqrt(cols)`.
    pub fn rms_column_norm(&self) -> f64 {
        if self.cols == 0 {
            return 0.0;
        }
        let sq: f64 = self.data.iter().map(|v| v * v).sum();
        (sq / self.cols as f64).sqrt()
    }

    /// Per-row `(min, max)` over all columns.
    pub fn row_ranges(&self) -> Vec<(f64, f64)> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.rows];
        for col in self.columns() {
            for (r, &v) in ranges.iter_mut().zip(col) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        ranges
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn squared_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Euclidean distance between two equal-length vectors, computed directly.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The reference data `P` (columns are atoms) plus their cached squared norms.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    data: Matrix,
    static_norms: Vec<f64>,
}

impl ReferenceSet {
    pub fn new(data: Matrix) -> Result<Self> {
        let static_norms = crate::geometry::static_norms(&data)?;
        Ok(Self { data, static_norms })
    }

    #[inline]
    pub fn data(&self) -> &Matrix {
        &self.data
    }

    #[inline]
    pub fn static_norms(&self) -> &[f64] {
        &self.static_norms
    }

    /// Feature dimension `d`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    /// Number of atoms `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.cols()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.cols() == 0
    }

    #[inline]
    pub fn atom(&self, m: usize) -> &[f64] {
        self.data.col(m)
    }

    /// Restricts to the given atoms, reusing the cached norms.
    pub fn subset(&self, indices: &[usize]) -> Result<ReferenceSet> {
        if indices.is_empty() {
            return Err(Error::EmptySelection);
        }
        if let Some(&bad) = indices.iter().find(|&&m| m >= self.len()) {
            return Err(Error::InvalidParameter(format!(
                "atom index {bad} out of range for {} atoms",
                self.len()
            )));
        }
        Ok(ReferenceSet {
            data: self.data.select_columns(indices),
            static_norms: indices.iter().map(|&m| self.static_norms[m]).collect(),
        })
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }
}

/// Candidate support points `A`, one column per point.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    points: Matrix,
}

impl CandidateSet {
    pub fn new(points: Matrix) -> Result<Self> {
        if points.rows() == 0 || points.cols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: points.rows(),
                cols: points.cols(),
            });
        }
        points.check_finite()?;
        Ok(Self { points })
    }

    pub(crate) fn new_unchecked(points: Matrix) -> Self {
        Self { points }
    }

    #[inline]
    pub fn points(&self) -> &Matrix {
        &self.points
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points.rows()
    }

    /// Number of points `n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.cols()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.cols() == 0
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        self.points.col(i)
    }

    pub fn into_matrix(self) -> Matrix {
        self.points
    }
}
