//! JSON-lines files. The first line is a header object carrying `schema`,
//! `version` and any file-level metadata; each further line is one record.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u64 = 1;

pub const EMG_TRACE: &str = "exo.emg_trace";
pub const LOAD_TRACE: &str = "exo.load_trace";
pub const SESSION_LOG: &str = "exo.session_log";
pub const TRAJECTORY: &str = "exo.trajectory";
pub const COHORT_REPORT: &str = "exo.cohort_report";

fn header(schema: &str, meta: Value) -> Result<Value> {
    let mut obj = Map::new();
    obj.insert("schema".into(), schema.into());
    obj.insert("version".into(), SCHEMA_VERSION.into());
    match meta {
        Value::Null => {}
        Value::Object(m) => obj.extend(m),
        _ => return Err(CliError::Data("header metadata must be an object".into())),
    }
    Ok(Value::Object(obj))
}

pub fn write_records<T: Serialize>(
    path: &Path,
    schema: &str,
    meta: Value,
    records: &[T],
) -> Result<()> {
    let file =
        File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let io = |e: std::io::Error| CliError::Data(format!("{}: {e}", path.display()));
    serde_json::to_writer(&mut w, &header(schema, meta)?).map_err(CliError::data)?;
    w.write_all(b"\n").map_err(io)?;
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(CliError::data)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a file written by [`write_records`], checking schema and version.
/// Returns the header metadata and the records.
pub fn read_records<T: DeserializeOwned>(
    path: &Path,
    schema: &str,
) -> Result<(Map<String, Value>, Vec<T>)> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let bad = |line: usize, msg: String| {
        CliError::Data(format!("{}:{}: {msg}", path.display(), line + 1))
    };
    let (_, first) = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty file", path.display())))?;
    let first = first.map_err(|e| bad(0, e.to_string()))?;
    let mut head: Map<String, Value> =
        serde_json::from_str(&first).map_err(|e| bad(0, e.to_string()))?;
    match (head.remove("schema"), head.remove("version")) {
        (Some(Value::String(s)), Some(v)) if s == schema && v.as_u64() == Some(SCHEMA_VERSION) => {}
        (s, v) => {
            return Err(bad(
                0,
                format!(
                    "expected schema {schema} version {SCHEMA_VERSION}, found {s:?} version {v:?}"
                ),
            ))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| bad(i, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| bad(i, e.to_string()))?);
    }
    Ok((head, out))
}

pub fn meta_field<T: DeserializeOwned>(
    meta: &Map<String, Value>,
    key: &str,
    path: &Path,
) -> Result<T> {
    let v = meta
        .get(key)
        .ok_or_else(|| CliError::Data(format!("{}: header lacks `{key}`", path.display())))?;
    serde_json::from_value(v.clone())
        .map_err(|e| CliError::Data(format!("{}: header `{key}`: {e}", path.display())))
}
