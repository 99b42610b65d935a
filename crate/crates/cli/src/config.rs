//! `key = value` defaults files.
//!
//! Each key names a long flag of the subcommand (`max-iter = 500`). Boolean
//! flags take `true` or `false`. Keys containing a dot are metadata (as written
//! into run manifests) and are skipped, so a manifest can be replayed as a
//! config file.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::UsageError;

/// Parses a config file body into `--key value` arguments.
pub fn config_to_args(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(UsageError(format!(
                "config line {}: expected `key = value`",
                k + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            bail!(UsageError(format!("config line {}: empty key", k + 1)));
        }
        if key.contains('.') || key == "config" {
            continue;
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Splices the config file named by `--config` (if any) right after the
/// subcommand, so flags given on the command line override it.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let injected = config_to_args(&text)?;
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
    else {
        return Ok(args);
    };
    let split = sub + 2;
    let mut out = args[..split].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}
