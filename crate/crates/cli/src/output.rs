//! CSV and manifest writing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

/// 17 significant digits; parses back to the same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Csv::default();
        csv.line(header.iter().map(|s| s.as_ref().to_string()));
        csv
    }

    fn line(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn row(&mut self, values: impl IntoIterator<Item = f64>) {
        self.line(values.into_iter().map(fmt_f64));
    }

    pub fn marker(&mut self, label: &str, detail: &str) {
        let _ = writeln!(self.text, "{label},{detail}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Write via a sibling temp file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub vertices: usize,
    pub max_drift: f64,
    pub max_corrector_iters: usize,
    pub total_corrector_iters: usize,
    pub truncated: Option<String>,
}

impl Diagnostics {
    pub fn of(trace: &nullfiber::CurveTrace) -> Self {
        Diagnostics {
            vertices: trace.len(),
            max_drift: trace.max_drift(),
            max_corrector_iters: trace.corrector_iters.iter().copied().max().unwrap_or(0),
            total_corrector_iters: trace.corrector_iters.iter().sum(),
            truncated: trace.truncated.as_ref().map(|t| t.to_string()),
        }
    }
}

/// Sidecar describing how an output file was produced. Data files carry no
/// timestamps; this file does.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub tool_version: &'a str,
    pub inputs: Vec<String>,
    pub arguments: Vec<String>,
    pub config: &'a C,
    pub started_unix_s: f64,
    pub wall_time_s: f64,
    pub diagnostics: Vec<Diagnostics>,
}

pub fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_secs_f64()
}
