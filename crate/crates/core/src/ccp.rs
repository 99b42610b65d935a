//! Convex-concave procedure for (weighted) support points.
//!
//! Each sweep linearizes the repulsion term at the frozen iterate `A^(l)` and
//! minimizes the resulting majorizer in closed form, one column at a time.
//! All columns of a sweep read only `A^(l)` and its cache (Jacobi), so the
//! sweep is order-independent and runs column-parallel.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::energy::mc_weighted;
use crate::error::{Error, Result};
use crate::geometry::{build_cache, uniform_weights, validate_weights, DistanceCache};
use crate::matrix::{CandidateSet, Matrix, ReferenceSet};
use crate::WspRng;

/// Largest per-step objective increase tolerated before a run is aborted.
pub const DESCENT_SLACK: f64 = 1e-9;

/// Dilation of the atoms' bounding box used by the output check, as a
/// fraction of the box diameter.
pub const BOX_DILATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Independent uniform draws inside the per-row range of the atoms.
    UniformBoundingBox,
    /// Columns of the reference set chosen uniformly without replacement.
    SampleColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    /// Use the ambient rayon pool.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Stop once `|s^l - s^(l-1)| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub init_scheme: InitScheme,
    pub seed: u64,
    pub threads: Threads,
    /// Divide the change by `max(1, |s^l|)` before comparing with `tol`.
    pub relative_tol: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 1000,
            init_scheme: InitScheme::UniformBoundingBox,
            seed: 0,
            threads: Threads::Auto,
            relative_tol: false,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if self.threads == Threads::Fixed(0) {
            return Err(Error::InvalidParameter(
                "thread count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max-iter",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    /// Objective before the first sweep followed by one value per sweep.
    pub costs: Vec<f64>,
    /// Milliseconds since the start of the run at which each cost was recorded.
    pub elapsed_ms: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub wall_ms: f64,
    /// Largest distance by which an output coordinate leaves the atoms' bounding box.
    pub box_excess: f64,
    /// Whether `box_excess` is within `BOX_DILATION` times the box diameter.
    pub within_bounding_box: bool,
    pub warnings: Vec<String>,
}

impl RunTrace {
    pub fn final_cost(&self) -> f64 {
        *self
            .costs
            .last()
            .expect("trace always holds the initial cost")
    }
}

/// Draws the starting configuration `A^(0)`.
///
/// Sampling more columns than there are atoms falls back to sampling with
/// replacement and returns a warning describing it.
pub fn init_candidates(
    reference: &ReferenceSet,
    n: usize,
    scheme: InitScheme,
    seed: u64,
) -> Result<(CandidateSet, Option<String>)> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "number of points must be at least 1".into(),
        ));
    }
    let mut rng = WspRng::seed_from_u64(seed);
    let d = reference.dim();
    let big_n = reference.len();
    match scheme {
        InitScheme::UniformBoundingBox => {
            let ranges = reference.data().row_ranges();
            let mut points = Matrix::zeros(d, n);
            for i in 0..n {
                for (x, &(lo, hi)) in points.col_mut(i).iter_mut().zip(&ranges) {
                    let u: f64 = rng.random();
                    *x = lo + (hi - lo) * u;
                }
            }
            Ok((CandidateSet::new_unchecked(points), None))
        }
        InitScheme::SampleColumns => {
            if n <= big_n {
                let chosen = index::sample(&mut rng, big_n, n).into_vec();
                let points = reference.data().select_columns(&chosen);
                Ok((CandidateSet::new_unchecked(points), None))
            } else {
                let chosen: Vec<usize> = (0..n).map(|_| rng.random_range(0..big_n)).collect();
                let points = reference.data().select_columns(&chosen);
                let warning = format!(
                    "requested {n} points from {big_n} atoms; sampled columns with replacement"
                );
                Ok((CandidateSet::new_unchecked(points), Some(warning)))
            }
        }
    }
}

fn repulsion_sum(i: usize, a: &CandidateSet, cache: &DistanceCache, out: &mut [f64]) {
    let xi = a.point(i);
    for j in 0..a.len() {
        if j == i {
            continue;
        }
        let inv = 1.0 / cache.dist_xx(i, j);
        for ((o, &u), &v) in out.iter_mut().zip(xi).zip(a.point(j)) {
            *o += (u - v) * inv;
        }
    }
}

/// Uniform-weight update of column `i`:
/// `x_i = (sum_m y_m / D[i,m] + (N/n) sum_{j != i} (x_i - x_j) / D[i,j]) / sum_m 1 / D[i,m]`.
pub fn update_point_unweighted(
    i: usize,
    a: &CandidateSet,
    reference: &ReferenceSet,
    cache: &DistanceCache,
) -> Vec<f64> {
    let d = a.dim();
    let mut attract = vec![0.0; d];
    let mut q = 0.0;
    for (m, &dist) in cache.dist_xp_row(i).iter().enumerate() {
        let inv = 1.0 / dist;
        q += inv;
        for (o, &y) in attract.iter_mut().zip(reference.atom(m)) {
            *o += y * inv;
        }
    }
    let mut repel = vec![0.0; d];
    repulsion_sum(i, a, cache, &mut repel);
    let ratio = reference.len() as f64 / a.len() as f64;
    attract
        .iter()
        .zip(&repel)
        .map(|(&at, &re)| (at + ratio * re) / q)
        .collect()
}

/// Weighted update of column `i`:
/// `x_i = (sum_m w_m y_m / D[i,m] + (1/n) sum_{j != i} (x_i - x_j) / D[i,j]) / q_i`
/// with `q_i = sum_m w_m / D[i,m]`.
pub fn update_point_weighted(
    i: usize,
    a: &CandidateSet,
    reference: &ReferenceSet,
    cache: &DistanceCache,
    w: &[f64],
) -> Vec<f64> {
    let d = a.dim();
    let mut attract = vec![0.0; d];
    let mut q = 0.0;
    for (m, (&dist, &wm)) in cache.dist_xp_row(i).iter().zip(w).enumerate() {
        let coef = wm / dist;
        q += coef;
        for (o, &y) in attract.iter_mut().zip(reference.atom(m)) {
            *o += y * coef;
        }
    }
    let mut repel = vec![0.0; d];
    repulsion_sum(i, a, cache, &mut repel);
    let inv_n = 1.0 / a.len() as f64;
    attract
        .iter()
        .zip(&repel)
        .map(|(&at, &re)| (at + inv_n * re) / q)
        .collect()
}

/// One Jacobi sweep: every column updated from the frozen `a` and `cache`.
pub fn weighted_sweep(
    a: &CandidateSet,
    reference: &ReferenceSet,
    cache: &DistanceCache,
    w: &[f64],
) -> CandidateSet {
    let columns: Vec<Vec<f64>> = (0..a.len())
        .into_par_iter()
        .map(|i| update_point_weighted(i, a, reference, cache, w))
        .collect();
    let mut data = Vec::with_capacity(a.dim() * a.len());
    for c in columns {
        data.extend_from_slice(&c);
    }
    CandidateSet::new_unchecked(
        Matrix::from_col_major(a.dim(), a.len(), data).expect("sweep preserves shape"),
    )
}

fn with_threads<T: Send>(threads: Threads, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Threads::Auto => Ok(f()),
        Threads::Fixed(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Support points against the uniform empirical measure of `reference`.
///
/// Runs the weighted loop with `w_m = 1/N`, so it is bitwise identical to
/// [`run_ccp_weighted`] with uniform weights.
pub fn run_ccp(
    reference: &ReferenceSet,
    n: usize,
    options: &OptimizerOptions,
) -> Result<(CandidateSet, RunTrace)> {
    run_ccp_weighted(reference, n, &uniform_weights(reference.len()), options)
}

/// Weighted support points, starting from `options.init_scheme`.
pub fn run_ccp_weighted(
    reference: &ReferenceSet,
    n: usize,
    w: &[f64],
    options: &OptimizerOptions,
) -> Result<(CandidateSet, RunTrace)> {
    options.validate()?;
    validate_weights(w, reference.len())?;
    let (init, warning) = init_candidates(reference, n, options.init_scheme, options.seed)?;
    let (out, mut trace) = run_ccp_weighted_from(reference, init, w, options)?;
    if let Some(warning) = warning {
        trace.warnings.insert(0, warning);
    }
    Ok((out, trace))
}

/// Weighted support points from an explicit starting configuration.
pub fn run_ccp_weighted_from(
    reference: &ReferenceSet,
    init: CandidateSet,
    w: &[f64],
    options: &OptimizerOptions,
) -> Result<(CandidateSet, RunTrace)> {
    options.validate()?;
    validate_weights(w, reference.len())?;
    if init.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            what: "candidate dimension",
            expected: reference.dim(),
            found: init.dim(),
        });
    }
    with_threads(options.threads, || optimize(reference, init, w, options))?
}

fn optimize(
    reference: &ReferenceSet,
    init: CandidateSet,
    w: &[f64],
    options: &OptimizerOptions,
) -> Result<(CandidateSet, RunTrace)> {
    let start = Instant::now();
    let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;

    let mut a = init;
    let mut cache = build_cache(&a, reference, w)?;
    let mut costs = vec![mc_weighted(&cache)];
    let mut elapsed_ms = vec![ms(start)];
    let mut stop_reason = StopReason::MaxIter;

    for iteration in 1..=options.max_iter {
        let next = weighted_sweep(&a, reference, &cache, w);
        let next_cache = build_cache(&next, reference, w)?;
        let previous = *costs.last().unwrap();
        let current = mc_weighted(&next_cache);
        if !current.is_finite() || current > previous + DESCENT_SLACK {
            return Err(Error::DescentViolation {
                iteration,
                previous,
                current,
            });
        }
        a = next;
        cache = next_cache;
        costs.push(current);
        elapsed_ms.push(ms(start));

        let mut change = (current - previous).abs();
        if options.relative_tol {
            change /= current.abs().max(1.0);
        }
        if change < options.tol {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let box_excess = bounding_box_excess(&a, reference);
    let diameter = bounding_box_diameter(reference);
    let within_bounding_box = box_excess <= BOX_DILATION * diameter;
    let mut warnings = Vec::new();
    if !within_bounding_box {
        warnings.push(format!(
            "output leaves the atoms' bounding box by {box_excess:e} (diameter {diameter:e})"
        ));
    }
    let trace = RunTrace {
        iterations: costs.len() - 1,
        costs,
        elapsed_ms,
        stop_reason,
        wall_ms: ms(start),
        box_excess,
        within_bounding_box,
        warnings,
    };
    Ok((a, trace))
}

/// Largest coordinate-wise distance from `a` to the atoms' bounding box.
pub fn bounding_box_excess(a: &CandidateSet, reference: &ReferenceSet) -> f64 {
    let ranges = reference.data().row_ranges();
    let mut excess: f64 = 0.0;
    for col in a.points().columns() {
        for (&x, &(lo, hi)) in col.iter().zip(&ranges) {
            excess = excess.max(lo - x).max(x - hi);
        }
    }
    excess
}

pub fn bounding_box_diameter(reference: &ReferenceSet) -> f64 {
    reference
        .data()
        .row_ranges()
        .iter()
        .map(|(lo, hi)| (hi - lo) * (hi - lo))
        .sum::<f64>()
        .sqrt()
}
