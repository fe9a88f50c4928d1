use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::commands::Artifact;
use crate::error::{CliError, Result};

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let mag = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&mag) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn csv_bytes(rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io { context: "buffering csv".into(), source: e.into_error() })
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_artifact(artifact: &Artifact) -> Result<()> {
    match &artifact.path {
        Some(path) => write_file(path, &artifact.bytes),
        None => std::io::stdout()
            .lock()
            .write_all(&artifact.bytes)
            .map_err(|source| CliError::Io { context: "writing stdout".into(), source }),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { context: format!("creating {}", dir.display()), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source })
}
