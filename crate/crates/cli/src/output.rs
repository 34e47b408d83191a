use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything needed to repeat a run.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub command: &'a str,
    pub argv: Vec<String>,
    pub parameters: &'a P,
    pub seed: Option<u64>,
    pub version: &'static str,
    /// SHA-256 of every input file, in the order read.
    pub input_digest: Option<String>,
    pub output: &'a Path,
}

/// Running SHA-256 over the bytes of all inputs.
#[derive(Default)]
pub struct InputDigest(Option<Sha256>);

impl InputDigest {
    pub fn update(&mut self, bytes: &[u8]) {
        self.0.get_or_insert_with(Sha256::new).update(bytes);
    }

    pub fn finish(self) -> Option<String> {
        self.0.map(|h| hex::encode(h.finalize()))
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_err(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the result to `output` and its manifest beside it, or the result
/// alone to stdout.
pub fn emit<P: Serialize>(
    output: Option<&Path>,
    bytes: &[u8],
    command: &str,
    parameters: &P,
    seed: Option<u64>,
    digest: InputDigest,
) -> Result<(), CliError> {
    let Some(path) = output else {
        std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(());
    };
    write_atomic(path, bytes)?;
    let manifest = RunManifest {
        command,
        argv: std::env::args().collect(),
        parameters,
        seed,
        version: folded_simplex_version(),
        input_digest: digest.finish(),
        output: path,
    };
    write_atomic(&manifest_path(path), &to_json(&manifest)?)
}

fn folded_simplex_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
