//! Synthetic workloads shared by the criterion benches.

use wsp_core::{Matrix, ReferenceSet};

/// Deterministic pseudo-random `d x n` matrix with entries in `[0, 255)`.
pub fn synthetic_matrix(d: usize, n: usize, seed: u64) -> Matrix {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let data = (0..d * n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 255.0
        })
        .collect();
    Matrix::from_col_major(d, n, data).expect("shape matches buffer")
}

pub fn synthetic_reference(d: usize, n: usize, seed: u64) -> ReferenceSet {
    ReferenceSet::new(synthetic_matrix(d, n, seed)).expect("finite synthetic data")
}
