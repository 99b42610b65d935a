//! IDX files (the MNIST container): big-endian magic `00 00 08 nd`, then `nd`
//! big-endian `u32` dimensions, then unsigned bytes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::image::ImageLayout;
use crate::matrix::{Matrix, ReferenceSet};

/// Magic of a 3-d unsigned-byte IDX file (images).
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
/// Magic of a 1-d unsigned-byte IDX file (labels).
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const UNSIGNED_BYTE: u8 = 0x08;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub dims: Vec<u32>,
}

impl IdxHeader {
    /// Header size in bytes.
    pub fn len(&self) -> usize {
        4 + 4 * self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Payload size in bytes implied by the dimensions.
    pub fn payload_len(&self) -> Result<u64> {
        let mut total: u64 = 1;
        for (k, &d) in self.dims.iter().enumerate() {
            total = total
                .checked_mul(u64::from(d))
                .ok_or(Error::DimensionOverflow {
                    offset: 4 + 4 * k as u64,
                })?;
        }
        if usize::try_from(total).is_err() {
            return Err(Error::DimensionOverflow { offset: 4 });
        }
        Ok(total)
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Truncated {
            offset: offset as u64,
            expected: 4,
            actual: bytes.len().saturating_sub(offset) as u64,
        })
}

/// Parses the magic and dimension block. Only unsigned-byte payloads are accepted.
pub fn parse_idx_header(bytes: &[u8]) -> Result<IdxHeader> {
    let magic = read_u32(bytes, 0)?;
    let [z0, z1, dtype, ndims] = magic.to_be_bytes();
    if z0 != 0 || z1 != 0 || dtype != UNSIGNED_BYTE || ndims == 0 {
        return Err(Error::BadMagic {
            offset: 0,
            found: magic,
        });
    }
    let dims = (0..usize::from(ndims))
        .map(|k| read_u32(bytes, 4 + 4 * k))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdxHeader { magic, dims })
}

fn payload<'a>(bytes: &'a [u8], header: &IdxHeader) -> Result<&'a [u8]> {
    let start = header.len();
    let expected = header.payload_len()?;
    let actual = (bytes.len() - start) as u64;
    if actual < expected {
        return Err(Error::Truncated {
            offset: start as u64,
            expected,
            actual,
        });
    }
    if actual > expected {
        return Err(Error::DimensionMismatch {
            what: "IDX payload bytes",
            expected: expected as usize,
            found: actual as usize,
        });
    }
    Ok(&bytes[start..])
}

/// Decodes an image IDX buffer into a `d x N` matrix (one image per column,
/// values in `[0, 255]`). Accepts `N x H x W` and `N x H x W x C` with `C` in {1, 3}.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(ReferenceSet, ImageLayout)> {
    let header = parse_idx_header(bytes)?;
    let (n, layout) = match header.dims.as_slice() {
        [n, h, w] => (*n, ImageLayout::new(*h as usize, *w as usize, 1)),
        [n, h, w, c] if *c == 1 || *c == 3 => {
            (*n, ImageLayout::new(*h as usize, *w as usize, *c as usize))
        }
        _ => {
            return Err(Error::BadMagic {
                offset: 0,
                found: header.magic,
            })
        }
    };
    let data = payload(bytes, &header)?;
    let d = layout.dim();
    let n = n as usize;
    if d == 0 || n == 0 {
        return Err(Error::EmptyMatrix { rows: d, cols: n });
    }
    let values: Vec<f64> = data.iter().map(|&b| f64::from(b)).collect();
    let matrix = Matrix::from_col_major(d, n, values)?;
    Ok((ReferenceSet::new(matrix)?, layout))
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<(ReferenceSet, ImageLayout)> {
    parse_idx_images(&std::fs::read(path)?)
}

/// Decodes a 1-d label IDX buffer.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let header = parse_idx_header(bytes)?;
    if header.dims.len() != 1 {
        return Err(Error::BadMagic {
            offset: 0,
            found: header.magic,
        });
    }
    Ok(payload(bytes, &header)?.to_vec())
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}

/// Encodes images (values rounded and clamped to bytes) as an `N x H x W` or
/// `N x H x W x C` IDX buffer.
pub fn encode_idx_images(images: &Matrix, layout: ImageLayout) -> Result<Vec<u8>> {
    layout.check(images.rows())?;
    let mut out = Vec::with_capacity(20 + images.as_slice().len());
    let mut dims = vec![
        images.cols() as u32,
        layout.height as u32,
        layout.width as u32,
    ];
    if layout.channels != 1 {
        dims.push(layout.channels as u32);
    }
    out.extend_from_slice(&[0, 0, UNSIGNED_BYTE, dims.len() as u8]);
    for d in dims {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend(
        images
            .as_slice()
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8),
    );
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
