//! CSV artifacts. Every file starts with a `# {json}` line echoing the
//! configuration that produced it, followed by a header record.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use hrvkit_core::classify::RocPoint;
use hrvkit_core::dataset::Label;
use hrvkit_core::selection::{FeatureMatrix, RankedFeatures};
use serde_json::Value;

use crate::error::{CliError, Result};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv(path: &Path, config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "# {config}").map_err(|e| CliError::write(path, e))?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)
            .map_err(|e| CliError::write(path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::write(path, e))?;
        }
        w.flush().map_err(|e| CliError::write(path, e))?;
    }
    fs::write(path, out).map_err(|e| CliError::write(path, e))
}

pub struct CsvTable {
    pub config: Option<Value>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let file = fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| CliError::read(path, e))?;
    let (config, rest): (Option<Value>, String) = match first.strip_prefix("# ") {
        Some(json) => (
            Some(serde_json::from_str(json.trim_end()).map_err(|e| CliError::read(path, e))?),
            String::new(),
        ),
        None => (None, first),
    };
    let mut body = rest;
    std::io::Read::read_to_string(&mut reader, &mut body).map_err(|e| CliError::read(path, e))?;
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::read(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(String::from).collect())
                .map_err(|e| CliError::read(path, e))
        })
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(CsvTable {
        config,
        header,
        rows,
    })
}

const ID_COLUMNS: [&str; 3] = ["record_id", "patient_id", "label"];

/// Feature rows with their identifiers and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub config: Value,
    pub names: Vec<String>,
    pub record_ids: Vec<String>,
    pub patient_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut header: Vec<&str> = ID_COLUMNS.to_vec();
        header.extend(self.names.iter().map(String::as_str));
        let rows: Vec<Vec<String>> = (0..self.rows.len())
            .map(|i| {
                let mut r = vec![
                    self.record_ids[i].clone(),
                    self.patient_ids[i].clone(),
                    self.labels[i].as_str().to_string(),
                ];
                r.extend(self.rows[i].iter().map(|&v| fmt_f64(v)));
                r
            })
            .collect();
        write_csv(path, &self.config, &header, &rows)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let t = read_csv(path)?;
        if t.header.len() < ID_COLUMNS.len() || t.header[..3] != ID_COLUMNS {
            return Err(CliError::read(
                path,
                "expected record_id,patient_id,label as the first columns",
            ));
        }
        let names = t.header[3..].to_vec();
        let mut table = FeatureTable {
            config: t.config.unwrap_or(Value::Null),
            names,
            record_ids: Vec::new(),
            patient_ids: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
        };
        for (i, row) in t.rows.into_iter().enumerate() {
            let line = i + 3;
            let label: Label = row[2]
                .parse()
                .map_err(|e| CliError::read(path, format!("line {line}: {e}")))?;
            let values = row[3..]
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| CliError::read(path, format!("line {line}: {e}")))?;
            table.record_ids.push(row[0].clone());
            table.patient_ids.push(row[1].clone());
            table.labels.push(label);
            table.rows.push(values);
        }
        Ok(table)
    }

    /// Binary matrix with VT, VF and PAF_PRE as the positive class.
    pub fn to_matrix(&self) -> Result<FeatureMatrix> {
        let mut m = FeatureMatrix::new(
            self.names.clone(),
            self.rows.clone(),
            self.labels.iter().map(|l| l.is_positive()).collect(),
            self.patient_ids.clone(),
            self.record_ids.clone(),
        )?;
        m.sanitize();
        Ok(m)
    }
}

pub fn write_ranking(path: &Path, config: &Value, ranked: &RankedFeatures) -> Result<()> {
    let rows: Vec<Vec<String>> = ranked
        .names
        .iter()
        .zip(&ranked.scores)
        .enumerate()
        .map(|(i, (n, s))| vec![(i + 1).to_string(), n.clone(), fmt_f64(*s)])
        .collect();
    write_csv(path, config, &["rank", "feature", "score"], &rows)
}

pub fn read_ranking(path: &Path) -> Result<RankedFeatures> {
    let t = read_csv(path)?;
    if t.header != ["rank", "feature", "score"] {
        return Err(CliError::read(path, "expected rank,feature,score columns"));
    }
    let mut names = Vec::new();
    let mut scores = Vec::new();
    for row in t.rows {
        names.push(row[1].clone());
        scores.push(row[2].parse().map_err(|e| CliError::read(path, e))?);
    }
    let method = t
        .config
        .as_ref()
        .and_then(|c| c.get("ranking"))
        .and_then(Value::as_str)
        .unwrap_or("mrmr-mid")
        .to_string();
    Ok(RankedFeatures {
        names,
        scores,
        method,
    })
}

pub fn write_curve(path: &Path, config: &Value, accuracies: &[f64]) -> Result<()> {
    let rows: Vec<Vec<String>> = accuracies
        .iter()
        .enumerate()
        .map(|(i, a)| vec![(i + 1).to_string(), fmt_f64(*a)])
        .collect();
    write_csv(path, config, &["k", "accuracy"], &rows)
}

pub fn write_roc(path: &Path, config: &Value, points: &[RocPoint]) -> Result<()> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.fpr),
                fmt_f64(p.tpr),
                p.threshold.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(path, config, &["fpr", "tpr", "threshold"], &rows)
}
