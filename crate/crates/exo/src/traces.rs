use std::path::Path;

use exo_core::signals::{EmgTrace, LoadTrace, SignalTrace};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::jsonl::{meta_field, read_records, write_records, EMG_TRACE, LOAD_TRACE};

pub fn write_emg(path: &Path, trace: &EmgTrace) -> Result<()> {
    let meta = json!({"rate_hz": trace.rate_hz, "annotations": trace.annotations});
    write_records(path, EMG_TRACE, meta, &trace.samples)
}

pub fn write_load(path: &Path, trace: &LoadTrace) -> Result<()> {
    let meta = json!({"rate_hz": trace.rate_hz, "annotations": trace.annotations});
    write_records(path, LOAD_TRACE, meta, &trace.samples)
}

pub fn read_emg(path: &Path) -> Result<EmgTrace> {
    let (meta, samples) = read_records(path, EMG_TRACE)?;
    let trace = SignalTrace {
        rate_hz: meta_field(&meta, "rate_hz", path)?,
        annotations: meta_field(&meta, "annotations", path)?,
        samples,
    };
    trace
        .validate_emg()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(trace)
}

pub fn read_load(path: &Path) -> Result<LoadTrace> {
    let (meta, samples) = read_records(path, LOAD_TRACE)?;
    let trace = SignalTrace {
        rate_hz: meta_field(&meta, "rate_hz", path)?,
        annotations: meta_field(&meta, "annotations", path)?,
        samples,
    };
    trace
        .validate()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(trace)
}
