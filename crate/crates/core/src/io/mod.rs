//! Dataset ingestion and output rendering.

pub mod idx;
pub mod image;
pub mod matrix_file;

pub use self::idx::{load_idx, load_idx_labels, parse_idx_header, IdxHeader};
pub use self::image::{
    clip_and_round_pixels, filter_by_label, load_png_folder, render_grid, resize_bilinear,
    ImageLayout,
};
pub use self::matrix_file::{load_matrix, save_matrix, MatrixFormat};
