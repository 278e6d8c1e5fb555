//! The bundled scenario corpus and its checksum manifest.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::scenario::{load_scenario, Scenario};

pub const CORPUS_ENV: &str = "LVRM_CORPUS_DIR";
pub const MANIFEST: &str = "SHA256SUMS";

pub fn bundled_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

/// `$LVRM_CORPUS_DIR` if set, else the bundled corpus.
pub fn corpus_dir() -> PathBuf {
    match std::env::var_os(CORPUS_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => bundled_dir(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub digest: String,
    pub file: String,
}

impl ManifestEntry {
    /// Scenario name, i.e. the file stem.
    pub fn name(&self) -> &str {
        self.file.strip_suffix(".toml").unwrap_or(&self.file)
    }
}

/// Entries of `SHA256SUMS` (`<hex>  <file>` per line), in file order.
pub fn read_manifest(dir: &Path) -> CliResult<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(d), Some(f), None) if d.len() == 64 => {
                out.push(ManifestEntry { digest: d.to_ascii_lowercase(), file: f.to_string() })
            }
            _ => {
                return Err(CliError::Input {
                    path,
                    field: format!("line {}", n + 1),
                    message: "expected `<sha256>  <file>`".into(),
                })
            }
        }
    }
    Ok(out)
}

/// Whether the file on disk still has the manifest digest.
pub fn verify(dir: &Path, entry: &ManifestEntry) -> CliResult<bool> {
    let path = dir.join(&entry.file);
    let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(sha256_hex(&bytes) == entry.digest)
}

/// An existing path is loaded as is; otherwise `arg` is looked up as a scenario name in the corpus.
pub fn resolve(arg: &str) -> CliResult<(PathBuf, Scenario)> {
    let direct = PathBuf::from(arg);
    if direct.is_file() {
        return Ok((direct.clone(), load_scenario(&direct)?));
    }
    let dir = corpus_dir();
    let file = if arg.ends_with(".toml") { arg.to_string() } else { format!("{arg}.toml") };
    let path = dir.join(file);
    if !path.is_file() {
        return Err(CliError::Usage(format!("scenario {arg:?} is neither a file nor a scenario in {}", dir.display())));
    }
    Ok((path.clone(), load_scenario(&path)?))
}
