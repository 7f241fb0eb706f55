//! Artifact writing: CSV files with round-trip-exact floats and the
//! per-run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Environment variable overriding the output directory of any command.
pub const OUTPUT_DIR_ENV: &str = "MEREOLOGY_OUTPUT_DIR";

/// Serialize a float with 17 significant digits so parsing it back is exact.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_infinite() && x > 0.0 {
        "inf".into()
    } else if x.is_infinite() {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// A CSV table with a single header row.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: header.join(",") + "\n",
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, &self.buf)
    }

    #[cfg(test)]
    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

/// Resolve the output directory: flag/config value unless the environment
/// override is set; the directory is created.
pub fn resolve_output_dir(configured: &str) -> std::io::Result<PathBuf> {
    let dir = std::env::var(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from(configured));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Write `manifest.toml`: command, artifact version, wall-clock runtime, and
/// the resolved configuration or parameters block.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    runtime: Duration,
    resolved: &str,
    extra: &[(&str, String)],
) -> std::io::Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "[artifact]");
    let _ = writeln!(text, "name = \"mereology\"");
    let _ = writeln!(text, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "command = \"{command}\"");
    let _ = writeln!(text, "runtime_seconds = {}", fmt_f64(runtime.as_secs_f64()));
    for (k, v) in extra {
        let _ = writeln!(text, "{k} = {v}");
    }
    let _ = writeln!(text);
    let _ = writeln!(text, "[resolved]");
    for line in resolved.lines() {
        let _ = writeln!(text, "{line}");
    }
    fs::write(dir.join("manifest.toml"), text)
}
