//! Report rendering (CSV with `#` parameter header, or JSON) and atomic output.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// A rendered-format-agnostic report: a table for CSV and a JSON body.
#[derive(Debug, Clone)]
pub struct Report {
    /// Extra `key = value` lines for the CSV header (fixed defaults not in the config).
    pub notes: Vec<(String, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// JSON object; a `parameters` key is added when rendering.
    pub body: Map<String, Value>,
}

/// 17 significant digits, locale independent.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parameter_map(
    config: &RunConfig,
    notes: &[(String, Value)],
) -> Result<Map<String, Value>, CliError> {
    let mut map = match serde_json::to_value(config) {
        Ok(Value::Object(m)) => m,
        _ => return Err(CliError::Io("cannot serialize run parameters".into())),
    };
    for (k, v) in notes {
        map.insert(k.clone(), v.clone());
    }
    Ok(map)
}

fn header_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if !n.is_u64() && !n.is_i64() => float(f),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

pub fn render(report: &Report, config: &RunConfig) -> Result<Vec<u8>, CliError> {
    let params = parameter_map(config, &report.notes)?;
    match config.format {
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# reldft {}", config.command.name()).map_err(io)?;
            for (k, v) in &params {
                writeln!(buf, "# {k} = {}", header_value(v)).map_err(io)?;
            }
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(&report.columns).map_err(csv_err)?;
            for row in &report.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Json => {
            let mut body = Map::new();
            body.insert("parameters".into(), Value::Object(params));
            for (k, v) in &report.body {
                body.insert(k.clone(), v.clone());
            }
            let mut out = serde_json::to_vec_pretty(&Value::Object(body))
                .map_err(|e| CliError::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never see a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn emit(report: &Report, config: &RunConfig) -> Result<(), CliError> {
    let bytes = render(report, config)?;
    match &config.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).map_err(io)?;
            stdout.flush().map_err(io)
        }
    }
}
