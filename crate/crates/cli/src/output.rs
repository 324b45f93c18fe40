use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::args::Format;
use crate::CliError;

/// Writes `bytes` to `out` through a temporary file in the same directory
/// and a rename, or to stdout when `out` is absent.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Numeric(format!("writing output: {e}"));
    match out {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes).map_err(io_err)?;
            stdout.flush().map_err(io_err)
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
            tmp.write_all(bytes).map_err(io_err)?;
            tmp.as_file().sync_all().map_err(io_err)?;
            tmp.persist(path).map_err(|e| io_err(e.error))?;
            Ok(())
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serializing report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV with the given header; every row must have the header's length.
pub fn csv(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let err = |e: csv::Error| CliError::Numeric(format!("writing csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Numeric(format!("writing csv: {e}")))
}

pub fn render<T: Serialize>(
    format: Format,
    value: &T,
    table: impl FnOnce() -> (Vec<String>, Vec<Vec<String>>),
) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => json(value),
        Format::Csv => {
            let (h, rows) = table();
            csv(&h, &rows)
        }
    }
}

/// Shortest round-trip representation, matching the JSON output.
pub fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}
