use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct Warning {
    pub kind: &'static str,
    pub message: String,
}

impl Warning {
    pub fn from_error(e: &plsdof::PlsError, note: &str) -> Self {
        let message = if note.is_empty() { e.to_string() } else { format!("{e}; {note}") };
        Warning { kind: e.kind(), message }
    }
}

pub fn emit_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning[{}]: {}", w.kind, w.message);
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to `path`, or stdout when `path` is `None`.
pub fn write_text(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| CliError::io(format!("writing {}", p.display()), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes()).map_err(|e| CliError::io("writing stdout", e))
        }
    }
}

/// Serializes records as CSV with a header row.
pub fn csv_string<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(e.to_string()))
}

/// CSV from an explicit header and pre-formatted cells.
pub fn csv_table(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Usage(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cell(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))
}

pub fn join(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
