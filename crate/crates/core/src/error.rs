use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty matrix: {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("weights must sum to 1 (got {sum})")]
    WeightSum { sum: f64 },

    #[error("invalid weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "target CV {cv} is infeasible for a subset of {n0} atoms: CV must be below sqrt(N0 - 1) = {bound}"
    )]
    InfeasibleCv { cv: f64, n0: usize, bound: f64 },

    #[error("objective increased at iteration {iteration}: {previous} -> {current}")]
    DescentViolation {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("no columns selected")]
    EmptySelection,

    #[error("bad magic number 0x{found:08x} at byte offset {offset}")]
    BadMagic { offset: u64, found: u32 },

    #[error(
        "truncated payload at byte offset {offset}: expected {expected} bytes, found {actual}"
    )]
    Truncated {
        offset: u64,
        expected: u64,
        actual: u64,
    },

    #[error("truncated matrix: header declares {expected} columns, found {found}")]
    MissingColumns { expected: usize, found: usize },

    #[error("dimension overflow at byte offset {offset}")]
    DimensionOverflow { offset: u64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("image layout {height}x{width}x{channels} does not match dimension {d}")]
    Layout {
        height: usize,
        width: usize,
        channels: usize,
        d: usize,
    },

    #[error("pixel value {value} out of range [0, 255] at row {row}, column {col}")]
    PixelRange { row: usize, col: usize, value: f64 },

    #[error("png error in {path}: {message}")]
    Png { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
