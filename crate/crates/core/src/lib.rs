//! Support points and weighted support points by energy-distance minimization.
//!
//! The optimizer is a convex-concave procedure whose per-point step is a
//! closed-form Weiszfeld-style update. Weighted runs draw their target from a
//! random measure built by uniform subsetting plus symmetric Dirichlet weights
//! whose concentration is calibrated to a requested coefficient of variation.
//!
//! Module map:
//! - [`matrix`]: column-major matrices, [`ReferenceSet`], [`CandidateSet`]
//! - [`geometry`]: regularized distances and the per-iteration [`DistanceCache`]
//! - [`energy`]: energy distance and the MC objectives
//! - [`ccp`]: fixed-point updates and the outer optimization loop
//! - [`rmeasure`]: random subsetting, Dirichlet / stick-breaking weights, centering checks
//! - [`io`]: IDX, matrix files, image preprocessing and PNG grids

// NaN must fail validation; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ccp;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod matrix;
pub mod rmeasure;

pub use ccp::{
    init_candidates, run_ccp, run_ccp_weighted, run_ccp_weighted_from, update_point_unweighted,
    update_point_weighted, InitScheme, OptimizerOptions, RunTrace, StopReason, Threads,
};
pub use energy::{
    energy_distance, energy_terms, mc_unweighted, mc_weighted, DiscreteMeasure, EnergyTerms,
};
pub use error::{Error, Result};
pub use geometry::{build_cache, regularized_sqrt, static_norms, DistanceCache};
pub use matrix::{CandidateSet, Matrix, ReferenceSet};
pub use rmeasure::{
    calibrate_concentration, draw_subset_size, draw_symmetric_dirichlet, estimate_centering_gap,
    gen_rmeasure, sample_stick_breaking, sample_subset, HalfSpace, RandomMeasure,
    RandomMeasureParams,
};

/// Seeded generator used for every random draw in the crate.
pub type WspRng = rand_chacha::ChaCha8Rng;
