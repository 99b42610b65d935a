//! Flat `key = value` run manifests.
//!
//! Plain keys are resolved command-line options under their flag names, so a
//! manifest replays as `--config`. Dotted keys (`run.*`, `data.*`, `result.*`)
//! carry provenance and results.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

/// 64-bit FNV-1a.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        let mut m = Self::default();
        m.set("run.subcommand", subcommand);
        m.set("run.version", env!("CARGO_PKG_VERSION"));
        m.set("run.start_unix", format!("{:.3}", unix_now()));
        m
    }

    /// Sets `key`, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn set_path(&mut self, key: &str, value: Option<&Path>) {
        self.set_opt(key, value.map(|p| p.display()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Stamps `run.end_unix` and writes the file.
    pub fn finish(&mut self, path: &Path) -> Result<()> {
        self.set("run.end_unix", format!("{:.3}", unix_now()));
        std::fs::write(path, self.render())
            .with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Self { entries }
    }
}

/// `dir/stem.ext` with `suffix` appended to the file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// `dir/stem_runK.ext`.
pub fn run_path(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_run{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}_run{k}"),
    };
    path.with_file_name(name)
}
