//! Image layout, preprocessing and PNG grid rendering.
//!
//! An image is flattened row-major by pixel with channels interleaved, so
//! pixel `(r, c)` channel `k` lives at index `(r * width + c) * channels + k`.
//! Pixel values are kept as reals in `[0, 255]`.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::{CandidateSet, Matrix, ReferenceSet};

/// Black separator width between grid tiles, in pixels.
pub const GUTTER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageLayout {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl ImageLayout {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
        }
    }

    pub fn dim(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn check(&self, d: usize) -> Result<()> {
        if self.dim() != d || !(self.channels == 1 || self.channels == 3) {
            return Err(Error::Layout {
                height: self.height,
                width: self.width,
                channels: self.channels,
                d,
            });
        }
        Ok(())
    }

    #[inline]
    fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }
}

/// Keeps the columns whose label is in `keep`, preserving order.
pub fn filter_by_label(images: &ReferenceSet, labels: &[u8], keep: &[u8]) -> Result<ReferenceSet> {
    if labels.len() != images.len() {
        return Err(Error::DimensionMismatch {
            what: "label count",
            expected: images.len(),
            found: labels.len(),
        });
    }
    let chosen: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| keep.contains(l))
        .map(|(m, _)| m)
        .collect();
    if chosen.is_empty() {
        return Err(Error::EmptySelection);
    }
    images.subset(&chosen)
}

/// Source coordinate and interpolation weight for each output position,
/// using pixel-center alignment with edge clamping.
fn sample_positions(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|k| {
            let x = ((k as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = x.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, x - lo as f64)
        })
        .collect()
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = a + (b - a) * t;
    v.clamp(a.min(b), a.max(b))
}

/// Bilinear resampling of every image (column) to `new_h x new_w`.
pub fn resize_bilinear(
    images: &ReferenceSet,
    layout: ImageLayout,
    new_h: usize,
    new_w: usize,
) -> Result<(ReferenceSet, ImageLayout)> {
    layout.check(images.dim())?;
    if new_h == 0 || new_w == 0 {
        return Err(Error::InvalidParameter(format!(
            "target size {new_h}x{new_w} has a zero dimension"
        )));
    }
    let out_layout = ImageLayout::new(new_h, new_w, layout.channels);
    let rows = sample_positions(layout.height, new_h);
    let cols = sample_positions(layout.width, new_w);
    let mut out = Matrix::zeros(out_layout.dim(), images.len());
    for m in 0..images.len() {
        let src = images.atom(m);
        let dst = out.col_mut(m);
        for (r, &(r0, r1, tr)) in rows.iter().enumerate() {
            for (c, &(c0, c1, tc)) in cols.iter().enumerate() {
                for k in 0..layout.channels {
                    let top = lerp(
                        src[layout.index(r0, c0, k)],
                        src[layout.index(r0, c1, k)],
                        tc,
                    );
                    let bottom = lerp(
                        src[layout.index(r1, c0, k)],
                        src[layout.index(r1, c1, k)],
                        tc,
                    );
                    dst[out_layout.index(r, c, k)] = lerp(top, bottom, tr);
                }
            }
        }
    }
    Ok((ReferenceSet::new(out)?, out_layout))
}

/// Clamps to `[0, 255]` and rounds half away from zero.
pub fn clip_and_round_matrix(m: &Matrix) -> Matrix {
    let data = m
        .as_slice()
        .iter()
        .map(|v| v.clamp(0.0, 255.0).round())
        .collect();
    Matrix::from_col_major(m.rows(), m.cols(), data).expect("same shape")
}

pub fn clip_and_round_pixels(a: &CandidateSet) -> CandidateSet {
    CandidateSet::new_unchecked(clip_and_round_matrix(a.points()))
}

/// An 8-bit raster, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<u8>,
}

/// Tiles the columns of `points` left-to-right, top-to-bottom, `columns` per
/// row, separated by black gutters.
pub fn grid_raster(points: &Matrix, layout: ImageLayout, columns: usize) -> Result<Raster> {
    layout.check(points.rows())?;
    if columns == 0 || points.cols() == 0 {
        return Err(Error::InvalidParameter(
            "grid needs at least one column and one image".into(),
        ));
    }
    for (col, data) in points.columns().enumerate() {
        if let Some((row, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=255.0).contains(*v))
        {
            return Err(Error::PixelRange { row, col, value });
        }
    }
    let n = points.cols();
    let grid_cols = columns.min(n);
    let grid_rows = n.div_ceil(grid_cols);
    let width = grid_cols * layout.width + (grid_cols - 1) * GUTTER;
    let height = grid_rows * layout.height + (grid_rows - 1) * GUTTER;
    let ch = layout.channels;
    let mut pixels = vec![0u8; width * height * ch];
    for (i, img) in points.columns().enumerate() {
        let y0 = (i / grid_cols) * (layout.height + GUTTER);
        let x0 = (i % grid_cols) * (layout.width + GUTTER);
        for r in 0..layout.height {
            for c in 0..layout.width {
                for k in 0..ch {
                    let v = img[layout.index(r, c, k)].round() as u8;
                    pixels[((y0 + r) * width + x0 + c) * ch + k] = v;
                }
            }
        }
    }
    Ok(Raster {
        width,
        height,
        channels: ch,
        pixels,
    })
}

fn png_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_png(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, raster.width as u32, raster.height as u32);
    encoder.set_color(if raster.channels == 3 {
        png::ColorType::Rgb
    } else {
        png::ColorType::Grayscale
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| png_error(path, e))?;
    writer
        .write_image_data(&raster.pixels)
        .map_err(|e| png_error(path, e))?;
    writer.finish().map_err(|e| png_error(path, e))?;
    Ok(())
}

/// Decodes an 8-bit gray or RGB PNG (alpha is dropped, 16-bit is stripped).
pub fn read_png(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let mut decoder = png::Decoder::new(BufReader::new(File::open(path)?));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| png_error(path, e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_error(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| png_error(path, e))?;
    buf.truncate(info.buffer_size());
    let (width, height) = (info.width as usize, info.height as usize);
    let (src_ch, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => return Err(png_error(path, "unexpanded palette")),
    };
    let pixels = if src_ch == keep {
        buf
    } else {
        buf.chunks_exact(src_ch)
            .flat_map(|px| px[..keep].to_vec())
            .collect()
    };
    Ok(Raster {
        width,
        height,
        channels: keep,
        pixels,
    })
}

/// Renders a grid of images to a PNG file.
pub fn render_grid(
    points: &Matrix,
    layout: ImageLayout,
    columns: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_png(&grid_raster(points, layout, columns)?, path)
}

/// Loads every `.png` in a directory (sorted by file name) as one column each.
/// All images must share size and channel count.
pub fn load_png_folder(dir: impl AsRef<Path>) -> Result<(ReferenceSet, ImageLayout)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut layout: Option<ImageLayout> = None;
    let mut data = Vec::new();
    for path in &paths {
        let raster = read_png(path)?;
        let this = ImageLayout::new(raster.height, raster.width, raster.channels);
        match layout {
            None => layout = Some(this),
            Some(l) if l != this => {
                return Err(Error::Layout {
                    height: this.height,
                    width: this.width,
                    channels: this.channels,
                    d: l.dim(),
                })
            }
            _ => {}
        }
        data.extend(raster.pixels.iter().map(|&b| f64::from(b)));
    }
    let layout = layout.expect("at least one image");
    let matrix = Matrix::from_col_major(layout.dim(), paths.len(), data)?;
    Ok((ReferenceSet::new(matrix)?, layout))
}
