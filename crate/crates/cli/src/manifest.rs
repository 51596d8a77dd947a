//! Run manifest: a flat `key = value` file written after every other
//! artifact, so its absence marks an incomplete run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.txt";
pub const FAILURE: &str = "failure.txt";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub preset: String,
    pub config_file: String,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    /// `(variant label, seed, path)` of every per-seed artifact.
    pub seed_artifacts: Vec<(String, u64, String)>,
    /// `(path, sha256)` of every CSV and SVG, relative to the run directory.
    pub checksums: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Relative paths of the CSV and SVG files under `dir`, sorted.
pub fn artifact_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).with_context(|| format!("listing {}", d.display()))? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "svg")) {
                out.push(p.strip_prefix(dir).expect("under dir").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

impl RunManifest {
    pub fn collect_checksums(&mut self, dir: &Path) -> Result<()> {
        self.checksums.clear();
        for rel in artifact_files(dir)? {
            let bytes = fs::read(dir.join(&rel)).with_context(|| format!("reading {}", rel.display()))?;
            self.checksums.push((slash(&rel), sha256_hex(&bytes)));
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "toolkit = freqbias {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "preset = {}", self.preset);
        let _ = writeln!(s, "config = {}", self.config_file);
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "wall_clock_seconds = {:.3}", self.wall_clock_seconds);
        for (label, seed, path) in &self.seed_artifacts {
            let _ = writeln!(s, "seed.{label}.{seed} = {path}");
        }
        for (path, sum) in &self.checksums {
            let _ = writeln!(s, "sha256.{path} = {sum}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let p = dir.join(MANIFEST);
        fs::write(&p, self.render()).with_context(|| format!("writing {}", p.display()))
    }
}

/// Parse a manifest back into `(key, value)` pairs.
pub fn parse(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

pub fn slash(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}
