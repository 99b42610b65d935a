//! Dataset loading for the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use wsp_core::io::idx::{parse_idx_images, parse_idx_labels};
use wsp_core::io::matrix_file::{decode_binary, decode_text, WSPM_MAGIC};
use wsp_core::io::{filter_by_label, load_png_folder, resize_bilinear, ImageLayout};
use wsp_core::ReferenceSet;

use crate::args::DataArgs;
use crate::manifest::{Fnv1a, Manifest};
use crate::UsageError;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub reference: ReferenceSet,
    /// Present when columns are images.
    pub layout: Option<ImageLayout>,
    /// FNV-1a over the input bytes (and label bytes when given).
    pub fingerprint: u64,
}

impl Dataset {
    pub fn record(&self, m: &mut Manifest) {
        m.set("data.fingerprint", format!("{:016x}", self.fingerprint));
        m.set("data.dim", self.reference.dim());
        m.set("data.atoms", self.reference.len());
        if let Some(l) = self.layout {
            m.set(
                "data.layout",
                format!("{}x{}x{}", l.height, l.width, l.channels),
            );
        }
    }
}

fn is_idx(bytes: &[u8]) -> bool {
    bytes.len() >= 4 && bytes[0] == 0 && bytes[1] == 0 && bytes[2] == 0x08
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Reads a point set from a matrix file, an IDX image file or a PNG folder.
pub fn load_points(path: &Path) -> Result<(ReferenceSet, Option<ImageLayout>, Fnv1a)> {
    let mut hash = Fnv1a::default();
    if path.is_dir() {
        for file in png_files(path)? {
            hash.write(file.file_name().unwrap_or_default().as_encoded_bytes());
            hash.write(&std::fs::read(&file)?);
        }
        let (reference, layout) = load_png_folder(path)
            .with_context(|| format!("loading PNG folder {}", path.display()))?;
        return Ok((reference, Some(layout), hash));
    }
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    hash.write(&bytes);
    let context = || format!("decoding {}", path.display());
    if bytes.starts_with(WSPM_MAGIC) {
        let m = decode_binary(&bytes).with_context(context)?;
        Ok((ReferenceSet::new(m).with_context(context)?, None, hash))
    } else if is_idx(&bytes) {
        let (reference, layout) = parse_idx_images(&bytes).with_context(context)?;
        Ok((reference, Some(layout), hash))
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| wsp_core::Error::Parse {
                line: 1,
                column: 1,
                message: format!("not a matrix, IDX or WSPM file ({e})"),
            })
            .with_context(context)?;
        let m = decode_text(text).with_context(context)?;
        Ok((ReferenceSet::new(m).with_context(context)?, None, hash))
    }
}

pub fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    let (mut reference, mut layout, mut hash) = load_points(&args.input)?;
    if let Some(given) = args.layout {
        given.check(reference.dim())?;
        layout = Some(given);
    }
    if let Some(labels_path) = &args.labels {
        let bytes = std::fs::read(labels_path)
            .with_context(|| format!("reading {}", labels_path.display()))?;
        hash.write(&bytes);
        let labels = parse_idx_labels(&bytes)
            .with_context(|| format!("decoding {}", labels_path.display()))?;
        reference = filter_by_label(&reference, &labels, &args.keep)?;
    }
    if let Some((h, w)) = args.resize {
        let Some(l) = layout else {
            anyhow::bail!(UsageError(
                "--resize needs image data (IDX, PNG folder or --layout)".into()
            ));
        };
        let (resized, new_layout) = resize_bilinear(&reference, l, h, w)?;
        reference = resized;
        layout = Some(new_layout);
    }
    Ok(Dataset {
        reference,
        layout,
        fingerprint: hash.finish(),
    })
}
