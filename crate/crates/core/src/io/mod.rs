//! Configuration files and data artifacts.
//!
//! All CSV output uses fixed column orders, LF line endings and the shortest
//! decimal representation that round-trips each `f64`, so identical inputs
//! produce byte-identical files. Files are written to a temporary sibling and
//! renamed into place.

mod config;
mod tables;

use std::io::Write;
use std::path::Path;

pub use config::{
    config_schema, parse_config, read_config, InitialConfig, Metric, ProblemConfig, SlopeAxis, SlopeExpectation,
    StudySection, OVERRIDE_KEYS,
};
pub use tables::{
    converge_csv, measure_csv, parse_measure_csv, read_measure_csv, residual_csv, trajectory_csv, trajectory_metadata,
    validation_json, ConvergeSummary, ExpectationOutcome, TrajectoryMetadata,
};

use crate::error::{Error, Result};

/// Shortest round-trip decimal form of `x`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types serialize");
    s.push('\n');
    s
}
