use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pseudoflat_core::xplab::ExperimentConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::pipeline::RunError;

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

/// Everything needed to reproduce and audit a run. Timings live in a
/// separate file so the manifest itself is reproducible.
#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    config: &'a ExperimentConfig,
    config_hash: String,
    versions: BTreeMap<&'static str, &'static str>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    timings_file: &'static str,
}

fn digest(path: &Path) -> Result<String, RunError> {
    let bytes = std::fs::read(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn file_digest(path: &Path) -> Result<FileDigest, RunError> {
    Ok(FileDigest {
        path: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: digest(path)?,
    })
}

pub fn write_manifest(
    out: &Path,
    config_path: &Path,
    cfg: &ExperimentConfig,
    outputs: &[PathBuf],
) -> Result<(), RunError> {
    let mut resolved = cfg.clone();
    resolved.threads = None;
    if let Some(p) = &resolved.points_file {
        resolved.points_file = p.file_name().map(PathBuf::from);
    }
    let mut inputs = vec![file_digest(config_path)?];
    if let Some(p) = &cfg.points_file {
        inputs.push(file_digest(p)?);
    }
    let manifest = RunManifest {
        config: &resolved,
        config_hash: cfg.hash(),
        versions: BTreeMap::from([
            ("pseudoflat-core", pseudoflat_core::xplab::VERSION),
            ("pseudoflat-cli", env!("CARGO_PKG_VERSION")),
        ]),
        inputs,
        outputs: outputs.iter().map(|p| file_digest(p)).collect::<Result<_, _>>()?,
        timings_file: "timings.json",
    };
    let path = out.join("manifest.json");
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    std::fs::write(&path, json).map_err(|source| RunError::Write { path, source })
}

#[derive(Debug, Default)]
pub struct Timings {
    phases: Vec<(String, f64)>,
}

impl Timings {
    pub fn record(&mut self, phase: &str, start: Instant) {
        self.phases.push((phase.to_string(), start.elapsed().as_secs_f64()));
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (p, s) in &self.phases {
            let _ = writeln!(out, "{p}: {s:.3}s");
        }
        out
    }

    pub fn write(&self, out: &Path) -> Result<(), RunError> {
        let path = out.join("timings.json");
        let map: BTreeMap<&str, f64> = self.phases.iter().map(|(p, s)| (p.as_str(), *s)).collect();
        let json = serde_json::to_vec_pretty(&map).expect("timings serialize");
        std::fs::write(&path, json).map_err(|source| RunError::Write { path, source })
    }
}
