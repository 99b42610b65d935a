//! Cached pairwise geometry between candidates and atoms.
//!
//! Distances come from the Gram expansion `|x - y|^2 = |x|^2 + |y|^2 - 2 x.y`
//! (recomputed from differences where that expansion cancels badly) and are
//! passed through [`regularized_sqrt`], so no cached distance is ever below
//! `epsilon`. Matrices indexed by candidate are stored row-major
//! (`row i` is contiguous) so each candidate's row can be built on its own
//! thread. Every reduction runs in ascending index order, which makes the
//! cache bitwise identical for any thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, squared_norm, CandidateSet, Matrix, ReferenceSet};

/// Tolerance on `sum(w) == 1` accepted by weighted routines.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Smallest characteristic scale used when deriving `epsilon`.
const MIN_SCALE: f64 = 1e-30;

/// Squared norm of every column.
pub fn static_norms(data: &Matrix) -> Result<Vec<f64>> {
    if data.rows() == 0 || data.cols() == 0 {
        return Err(Error::EmptyMatrix {
            rows: data.rows(),
            cols: data.cols(),
        });
    }
    data.check_finite()?;
    Ok(data.columns().map(squared_norm).collect())
}

/// `sqrt(max(d2, 0) + epsilon^2)`.
#[inline]
pub fn regularized_sqrt(d2: f64, epsilon: f64) -> f64 {
    (d2.max(0.0) + epsilon * epsilon).sqrt()
}

/// Regularization for a configuration: `sqrt(machine eps) * s`, where `s` is
/// the RMS column norm of the candidates, falling back to the reference set
/// and then to 1 when everything sits at the origin.
pub fn epsilon_for(candidates: &Matrix, reference: &Matrix) -> f64 {
    let mut s = candidates.rms_column_norm();
    if s == 0.0 {
        s = reference.rms_column_norm();
    }
    if s == 0.0 {
        s = 1.0;
    }
    f64::EPSILON.sqrt() * s.max(MIN_SCALE)
}

/// Checks `w` is a probability vector over `expected_len` atoms.
pub fn validate_weights(w: &[f64], expected_len: usize) -> Result<()> {
    if w.len() != expected_len {
        return Err(Error::DimensionMismatch {
            what: "weight vector length",
            expected: expected_len,
            found: w.len(),
        });
    }
    if let Some((index, &value)) = w
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(Error::InvalidWeight { index, value });
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::WeightSum { sum });
    }
    Ok(())
}

/// Uniform probability vector of length `n`.
pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Per-iteration cache of Gram products, regularized distances and partial sums.
#[derive(Debug, Clone)]
pub struct DistanceCache {
    n: usize,
    big_n: usize,
    /// `A^T P`, row-major `n x N`.
    pub gram_xp: Vec<f64>,
    /// `A^T A`, row-major `n x n`.
    pub gram_xx: Vec<f64>,
    /// Regularized candidate-to-atom distances, row-major `n x N`.
    pub dist_xp: Vec<f64>,
    /// Regularized candidate-to-candidate distances, row-major `n x n`.
    /// The diagonal holds `epsilon` and is never read by updates.
    pub dist_xx: Vec<f64>,
    /// Squared candidate norms.
    pub r_x: Vec<f64>,
    /// `sum_i sum_m w_m D_xp[i, m]`.
    pub s_xp_weighted: f64,
    /// `sum_{i > j} D_xx[i, j]`.
    pub s_xx: f64,
    pub epsilon: f64,
}

impl DistanceCache {
    /// Number of candidates `n`.
    pub fn n_candidates(&self) -> usize {
        self.n
    }

    /// Number of atoms `N`.
    pub fn n_atoms(&self) -> usize {
        self.big_n
    }

    #[inline]
    pub fn dist_xp(&self, i: usize, m: usize) -> f64 {
        self.dist_xp[i * self.big_n + m]
    }

    #[inline]
    pub fn dist_xp_row(&self, i: usize) -> &[f64] {
        &self.dist_xp[i * self.big_n..(i + 1) * self.big_n]
    }

    #[inline]
    pub fn dist_xx(&self, i: usize, j: usize) -> f64 {
        self.dist_xx[i * self.n + j]
    }

    /// Unweighted `sum_i sum_m D_xp[i, m]`.
    pub fn s_xp_unweighted(&self) -> f64 {
        self.dist_xp
            .chunks_exact(self.big_n)
            .map(|row| row.iter().sum::<f64>())
            .sum()
    }
}

/// Builds the cache for candidates `a` against `reference` under weights `w`.
pub fn build_cache(a: &CandidateSet, reference: &ReferenceSet, w: &[f64]) -> Result<DistanceCache> {
    if a.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            what: "candidate dimension",
            expected: reference.dim(),
            found: a.dim(),
        });
    }
    validate_weights(w, reference.len())?;
    let epsilon = epsilon_for(a.points(), reference.data());
    Ok(build_cache_with_epsilon(a, reference, w, epsilon))
}

/// Below this fraction of `|x|^2 + |y|^2` the Gram form `|x|^2 + |y|^2 - 2<x, y>`
/// has lost most significant bits; such pairs are recomputed from differences.
const CANCELLATION_GUARD: f64 = 1e-4;

fn squared_distance(x: &[f64], y: &[f64], rx: f64, ry: f64, g: f64) -> f64 {
    let d2 = rx + ry - 2.0 * g;
    if d2 < CANCELLATION_GUARD * (rx + ry) {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    } else {
        d2
    }
}

pub(crate) fn build_cache_with_epsilon(
    a: &CandidateSet,
    reference: &ReferenceSet,
    w: &[f64],
    epsilon: f64,
) -> DistanceCache {
    let n = a.len();
    let big_n = reference.len();
    let points = a.points();
    let atoms = reference.data();
    let r_p = reference.static_norms();

    let r_x: Vec<f64> = points.columns().map(squared_norm).collect();

    let mut gram_xp = vec![0.0; n * big_n];
    let mut dist_xp = vec![0.0; n * big_n];
    let mut row_sums = vec![0.0; n];
    gram_xp
        .par_chunks_mut(big_n)
        .zip(dist_xp.par_chunks_mut(big_n))
        .zip(row_sums.par_iter_mut())
        .enumerate()
        .for_each(|(i, ((g_row, d_row), row_sum))| {
            let x = points.col(i);
            let rxi = r_x[i];
            let mut acc = 0.0;
            for m in 0..big_n {
                let y = atoms.col(m);
                let g = dot(x, y);
                let dist = regularized_sqrt(squared_distance(x, y, rxi, r_p[m], g), epsilon);
                g_row[m] = g;
                d_row[m] = dist;
                acc += w[m] * dist;
            }
            *row_sum = acc;
        });
    let s_xp_weighted = row_sums.iter().sum();

    let mut gram_xx = vec![0.0; n * n];
    let mut dist_xx = vec![0.0; n * n];
    let mut s_xx = 0.0;
    for i in 0..n {
        gram_xx[i * n + i] = r_x[i];
        dist_xx[i * n + i] = epsilon;
        for j in 0..i {
            let (xi, xj) = (points.col(i), points.col(j));
            let g = dot(xi, xj);
            let dist = regularized_sqrt(squared_distance(xi, xj, r_x[i], r_x[j], g), epsilon);
            gram_xx[i * n + j] = g;
            gram_xx[j * n + i] = g;
            dist_xx[i * n + j] = dist;
            dist_xx[j * n + i] = dist;
            s_xx += dist;
        }
    }

    DistanceCache {
        n,
        big_n,
        gram_xp,
        gram_xx,
        dist_xp,
        dist_xx,
        r_x,
        s_xp_weighted,
        s_xx,
        epsilon,
    }
}
