//! Energy distance between weighted discrete measures, and the MC objectives
//! minimized by the optimizer.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{regularized_sqrt, validate_weights, DistanceCache};
use crate::matrix::Matrix;

/// Atoms (columns) with nonnegative weights summing to one.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Matrix,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Matrix, weights: Vec<f64>) -> Result<Self> {
        if atoms.rows() == 0 || atoms.cols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: atoms.rows(),
                cols: atoms.cols(),
            });
        }
        atoms.check_finite()?;
        validate_weights(&weights, atoms.cols())?;
        Ok(Self { atoms, weights })
    }

    /// Equal mass on every column.
    pub fn uniform(atoms: Matrix) -> Result<Self> {
        let k = atoms.cols().max(1);
        Self::new(atoms, vec![1.0 / k as f64; k])
    }

    pub fn atoms(&self) -> &Matrix {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.atoms.rows()
    }
}

/// The three expectations making up an energy distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    /// `E|X - Y|` with `X ~ G`, `Y ~ F` independent.
    pub cross: f64,
    /// `E|Y - Y'|` under the first measure.
    pub within_first: f64,
    /// `E|X - X'|` under the second measure.
    pub within_second: f64,
    /// `2 cross - within_first - within_second`, unclamped.
    pub total: f64,
    pub epsilon: f64,
}

impl EnergyTerms {
    /// Total with tiny negative values from regularization clamped to zero.
    pub fn reported(&self) -> f64 {
        self.total.max(0.0)
    }
}

/// Regularization used for energy evaluation: `sqrt(machine eps)` times the
/// RMS atom norm over both measures (1 if all atoms are zero).
pub fn energy_epsilon(f: &DiscreteMeasure, g: &DiscreteMeasure) -> f64 {
    let sq: f64 = f
        .atoms
        .as_slice()
        .iter()
        .chain(g.atoms.as_slice())
        .map(|v| v * v)
        .sum();
    let count = (f.atoms.cols() + g.atoms.cols()) as f64;
    let s = (sq / count).sqrt();
    f64::EPSILON.sqrt() * if s > 0.0 { s.max(1e-30) } else { 1.0 }
}

fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `sum_a sum_b wa wb |a - b|`; when `skip_diagonal` the identical-index pairs
/// are dropped (an atom's distance to itself is exactly zero).
fn weighted_pair_sum(
    left: &DiscreteMeasure,
    right: &DiscreteMeasure,
    skip_diagonal: bool,
    epsilon: f64,
) -> f64 {
    let rows: Vec<f64> = (0..left.atoms.cols())
        .into_par_iter()
        .map(|a| {
            let u = left.atoms.col(a);
            let mut acc = 0.0;
            for b in 0..right.atoms.cols() {
                if skip_diagonal && a == b {
                    continue;
                }
                let d = regularized_sqrt(squared_distance(u, right.atoms.col(b)), epsilon);
                acc += right.weights[b] * d;
            }
            left.weights[a] * acc
        })
        .collect();
    rows.iter().sum()
}

/// Full energy distance broken into its terms.
pub fn energy_terms(f: &DiscreteMeasure, g: &DiscreteMeasure) -> Result<EnergyTerms> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            what: "measure dimension",
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let epsilon = energy_epsilon(f, g);
    Ok(energy_terms_with_epsilon(f, g, epsilon))
}

pub fn energy_terms_with_epsilon(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
    epsilon: f64,
) -> EnergyTerms {
    let cross = weighted_pair_sum(f, g, false, epsilon);
    let within_first = weighted_pair_sum(f, f, true, epsilon);
    let within_second = weighted_pair_sum(g, g, true, epsilon);
    EnergyTerms {
        cross,
        within_first,
        within_second,
        total: 2.0 * cross - within_first - within_second,
        epsilon,
    }
}

/// Energy distance `E(F, G)`, clamped at zero.
pub fn energy_distance(f: &DiscreteMeasure, g: &DiscreteMeasure) -> Result<f64> {
    energy_terms(f, g).map(|t| t.reported())
}

/// Uniform-weight objective
/// `(2 / nN) sum_i sum_m D_xp[i, m] - (2 / n^2) sum_{i > j} D_xx[i, j]`.
pub fn mc_unweighted(cache: &DistanceCache) -> f64 {
    let n = cache.n_candidates() as f64;
    let big_n = cache.n_atoms() as f64;
    2.0 / (n * big_n) * cache.s_xp_unweighted() - 2.0 / (n * n) * cache.s_xx
}

/// Weighted objective `(2 / n) S_xp(w) - (2 / n^2) S_xx` read off the cache.
pub fn mc_weighted(cache: &DistanceCache) -> f64 {
    let n = cache.n_candidates() as f64;
    2.0 / n * cache.s_xp_weighted - 2.0 / (n * n) * cache.s_xx
}
