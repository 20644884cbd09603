//! Number formatting, CSV writing and run manifests.

use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::CliError;

/// Seven significant digits; scientific notation outside `[1e−4, 1e7)`.
pub fn sig7(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..7).contains(&mag) {
        return format!("{x:.6e}");
    }
    format!("{x:.*}", (6 - mag) as usize)
}

pub fn opt7(x: Option<f64>) -> String {
    x.map_or_else(String::new, sig7)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub command: &'a str,
    pub args: Vec<String>,
    pub params: P,
    pub seeds: Vec<u64>,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
    pub wall_seconds: f64,
}

impl<P: Serialize> RunManifest<'_, P> {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}_manifest.json", self.command));
        write_json(&path, self)?;
        Ok(path)
    }
}

pub fn seconds(d: Duration) -> f64 {
    d.as_secs_f64()
}
