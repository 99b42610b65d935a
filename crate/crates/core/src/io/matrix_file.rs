//! Matrix files.
//!
//! Text: a `d,N` header line, then one line per column with `d`
//! comma-separated values. Binary (`WSPM`): 16-byte header (magic `WSPM`,
//! little-endian `u32` d, `u32` N, `u32` reserved = 0) followed by the
//! column-major payload as little-endian `f64`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ReferenceSet};

pub const WSPM_MAGIC: &[u8; 4] = b"WSPM";
const WSPM_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Text,
    Binary,
}

impl MatrixFormat {
    /// `.wspm` and `.bin` are binary, everything else text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("wspm") | Some("bin") => MatrixFormat::Binary,
            _ => MatrixFormat::Text,
        }
    }
}

pub fn encode_binary(m: &Matrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::DimensionOverflow { offset: 4 })?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::DimensionOverflow { offset: 8 })?;
    let mut out = Vec::with_capacity(WSPM_HEADER_LEN + 8 * m.as_slice().len());
    out.extend_from_slice(WSPM_MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < WSPM_HEADER_LEN {
        return Err(Error::Truncated {
            offset: 0,
            expected: WSPM_HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    if &bytes[..4] != WSPM_MAGIC {
        return Err(Error::BadMagic {
            offset: 0,
            found: u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]),
        });
    }
    let le = |k: usize| u32::from_le_bytes([bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]]);
    let rows = le(4) as usize;
    let cols = le(8) as usize;
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or(Error::DimensionOverflow { offset: 4 })?;
    let body = &bytes[WSPM_HEADER_LEN..];
    if body.len() < count {
        return Err(Error::Truncated {
            offset: WSPM_HEADER_LEN as u64,
            expected: count as u64,
            actual: body.len() as u64,
        });
    }
    if body.len() > count {
        return Err(Error::DimensionMismatch {
            what: "WSPM payload bytes",
            expected: count,
            found: body.len(),
        });
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::from_col_major(rows, cols, data)
}

pub fn encode_text(m: &Matrix) -> String {
    let mut s = String::new();
    writeln!(s, "{},{}", m.rows(), m.cols()).unwrap();
    for col in m.columns() {
        for (k, v) in col.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "{v:?}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn parse_field<T: std::str::FromStr>(token: &str, line: usize, column: usize) -> Result<T> {
    token.trim().parse().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("not a number: `{}`", token.trim()),
    })
}

pub fn decode_text(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing `d,N` header".into(),
    })?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            column: 1,
            message: "header must be `d,N`".into(),
        });
    }
    let rows: usize = parse_field(fields[0], hline, 1)?;
    let cols: usize = parse_field(fields[1], hline, 2)?;
    let mut data = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 24));
    let mut found = 0;
    for (line, content) in lines {
        if found == cols {
            return Err(Error::Parse {
                line,
                column: 1,
                message: format!("more than the declared {cols} columns"),
            });
        }
        let mut count = 0;
        for (k, token) in content.split(',').enumerate() {
            data.push(parse_field::<f64>(token, line, k + 1)?);
            count += 1;
        }
        if count != rows {
            return Err(Error::Parse {
                line,
                column: count.min(rows) + 1,
                message: format!("expected {rows} values, found {count}"),
            });
        }
        found += 1;
    }
    if found < cols {
        return Err(Error::MissingColumns {
            expected: cols,
            found,
        });
    }
    Matrix::from_col_major(rows, cols, data)
}

/// Loads either format, detected from the leading bytes.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(WSPM_MAGIC) {
        decode_binary(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
            line: 1,
            column: 1,
            message: format!("not UTF-8 text: {e}"),
        })?;
        decode_text(text)
    }
}

/// Loads a matrix and validates it as reference data.
pub fn load_reference(path: impl AsRef<Path>) -> Result<ReferenceSet> {
    ReferenceSet::new(load_matrix(path)?)
}

pub fn save_matrix(path: impl AsRef<Path>, m: &Matrix, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Binary => encode_binary(m)?,
        MatrixFormat::Text => encode_text(m).into_bytes(),
    };
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}
