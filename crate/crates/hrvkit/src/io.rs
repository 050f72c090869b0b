//! RR interval CSV files and dataset manifests.

use std::fs;
use std::path::{Path, PathBuf};

use hrvkit_core::dataset::{DatasetManifest, EventRecord, Label, RecordSource, RriSeries};
use serde::Deserialize;

use crate::error::{missing, CliError, Result};

/// Environment variable that overrides the base directory for relative
/// record paths in a manifest.
pub const DATA_DIR_VAR: &str = "HRVKIT_DATA_DIR";

/// Parses one interval (ms) per line. A first line that is not a number is
/// taken as a header; blank lines are ignored.
pub fn parse_rri_str(text: &str, resolution_ms: f64) -> std::result::Result<RriSeries, String> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let field = line.trim().trim_end_matches(',').trim();
        if field.is_empty() {
            continue;
        }
        let value: f64 = match field.parse() {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(format!(
                    "line {line_no}: cannot parse `{field}` as a number"
                ))
            }
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("line {line_no}: non-positive interval {value}"));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err("no intervals found".to_string());
    }
    RriSeries::new(values, resolution_ms).map_err(|e| e.to_string())
}

pub fn parse_rri_csv(path: &Path, resolution_ms: f64) -> Result<RriSeries> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    parse_rri_str(&text, resolution_ms).map_err(|e| CliError::read(path, e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    records: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    patient_id: String,
    record_id: String,
    label: String,
    path: String,
    #[serde(default = "default_resolution")]
    resolution_ms: f64,
}

fn default_resolution() -> f64 {
    1.0
}

fn base_dir(manifest_path: &Path) -> PathBuf {
    match std::env::var_os(DATA_DIR_VAR) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => manifest_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
    }
}

/// Loads a manifest, resolving relative record paths against
/// `HRVKIT_DATA_DIR` or else the manifest's directory. With `check_files`
/// every record file must exist.
pub fn load_manifest(path: &Path, check_files: bool) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let file: ManifestFile = serde_json::from_str(&text).map_err(|e| CliError::read(path, e))?;
    let base = base_dir(path);
    let mut records = Vec::with_capacity(file.records.len());
    for entry in file.records {
        let label: Label = entry.label.parse()?;
        let resolved = base.join(&entry.path);
        if check_files && !resolved.is_file() {
            return Err(missing(&resolved));
        }
        records.push(EventRecord {
            patient_id: entry.patient_id,
            record_id: entry.record_id,
            label,
            source: RecordSource::Path {
                path: resolved.to_string_lossy().into_owned(),
                resolution_ms: entry.resolution_ms,
            },
        });
    }
    Ok(DatasetManifest::new(records)?)
}

pub fn load_series(record: &EventRecord) -> Result<RriSeries> {
    match &record.source {
        RecordSource::Inline(s) => Ok(s.clone()),
        RecordSource::Path {
            path,
            resolution_ms,
        } => parse_rri_csv(Path::new(path), *resolution_ms),
    }
}
