//! R-R interval records, labelled event manifests and the patient-exclusive
//! learning/evaluation split.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sequence of R-R intervals in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RriSeries {
    values: Vec<f64>,
    resolution_ms: f64,
}

impl RriSeries {
    pub fn new(values: Vec<f64>, resolution_ms: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidInterval { index, value });
        }
        if !(resolution_ms.is_finite() && resolution_ms > 0.0) {
            return Err(Error::InvalidParameter {
                name: "resolution_ms",
                reason: "must be positive".to_string(),
            });
        }
        Ok(Self {
            values,
            resolution_ms,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn resolution_ms(&self) -> f64 {
        self.resolution_ms
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// End time of every interval in ms (running prefix sum).
    pub fn timestamps_ms(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    pub fn duration_s(&self) -> f64 {
        self.values.iter().sum::<f64>() / 1000.0
    }
}

/// Sub-series ending `guard_s` seconds before the end of the record and
/// spanning `window_s` seconds.
///
/// An interval belongs to the window when its end timestamp lies in
/// `[T_end - guard - window, T_end - guard)`.
pub fn extract_event_window(series: &RriSeries, window_s: f64, guard_s: f64) -> Result<RriSeries> {
    if !(window_s > 0.0) || !(guard_s >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "window_s",
            reason: "window must be positive and guard non-negative".to_string(),
        });
    }
    let available_s = series.duration_s();
    let required_s = window_s + guard_s;
    if available_s < required_s {
        return Err(Error::InsufficientDuration {
            available_s,
            required_s,
        });
    }
    let stamps = series.timestamps_ms();
    let end = *stamps.last().expect("series is non-empty");
    let hi = end - guard_s * 1000.0;
    let lo = hi - window_s * 1000.0;
    let values: Vec<f64> = series
        .values
        .iter()
        .zip(&stamps)
        .filter(|(_, &t)| t >= lo && t < hi)
        .map(|(&v, _)| v)
        .collect();
    RriSeries::new(values, series.resolution_ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "VT")]
    Vt,
    #[serde(rename = "VF")]
    Vf,
    #[serde(rename = "CON")]
    Con,
    #[serde(rename = "PAF_PRE")]
    PafPre,
    #[serde(rename = "NORMAL")]
    Normal,
}

impl Label {
    pub const ALL: [Label; 5] = [
        Label::Vt,
        Label::Vf,
        Label::Con,
        Label::PafPre,
        Label::Normal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Vt => "VT",
            Label::Vf => "VF",
            Label::Con => "CON",
            Label::PafPre => "PAF_PRE",
            Label::Normal => "NORMAL",
        }
    }

    /// Pre-arrhythmia classes are the positive class.
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Vt | Label::Vf | Label::PafPre)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// Where the intervals of a record come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RecordSource {
    Inline(RriSeries),
    Path { path: String, resolution_ms: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub patient_id: String,
    pub record_id: String,
    pub label: Label,
    pub source: RecordSource,
}

/// Validated collection of event records.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    records: Vec<EventRecord>,
    counts: BTreeMap<Label, usize>,
}

impl DatasetManifest {
    pub fn new(records: Vec<EventRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut counts = BTreeMap::new();
        for r in &records {
            if r.patient_id.is_empty() {
                return Err(Error::EmptyPatientId(r.record_id.clone()));
            }
            if !seen.insert(r.record_id.as_str()) {
                return Err(Error::DuplicateRecord(r.record_id.clone()));
            }
            *counts.entry(r.label).or_insert(0) += 1;
        }
        Ok(Self { records, counts })
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn count(&self, label: Label) -> usize {
        self.counts.get(&label).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<Label, usize> {
        &self.counts
    }

    /// Distinct patient ids in sorted order.
    pub fn patients(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.patient_id.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(String::from)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub learning_patients: BTreeSet<String>,
    pub evaluation_patients: BTreeSet<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub learning_fraction: f64,
    /// Required VT count in the learning set; `None` derives it from the fraction.
    pub target_vt: Option<usize>,
    pub target_vf: Option<usize>,
    pub max_attempts: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            learning_fraction: 0.67,
            target_vt: None,
            target_vf: None,
            max_attempts: 1_000_000,
        }
    }
}

/// Rejection-sampled patient split: draw a fixed share of patients until
/// their records hold exactly the target number of VT and VF events.
pub fn split_learning_evaluation(
    manifest: &DatasetManifest,
    seed: u64,
    cfg: &SplitConfig,
) -> Result<Split> {
    if !(cfg.learning_fraction > 0.0 && cfg.learning_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "learning_fraction",
            reason: "must lie strictly between 0 and 1".to_string(),
        });
    }
    let patients = manifest.patients();
    let fraction = cfg.learning_fraction;
    let n_learn = (fraction * patients.len() as f64).round() as usize;
    let target_vt = cfg
        .target_vt
        .unwrap_or_else(|| (fraction * manifest.count(Label::Vt) as f64).round() as usize);
    let target_vf = cfg
        .target_vf
        .unwrap_or_else(|| (fraction * manifest.count(Label::Vf) as f64).round() as usize);

    let mut per_patient: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in manifest.records() {
        let e = per_patient.entry(r.patient_id.as_str()).or_insert((0, 0));
        match r.label {
            Label::Vt => e.0 += 1,
            Label::Vf => e.1 += 1,
            _ => {}
        }
    }
    let events: Vec<(usize, usize)> = patients.iter().map(|p| per_patient[p.as_str()]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..patients.len()).collect();
    let mut best = (usize::MAX, 0, 0);
    for _ in 0..cfg.max_attempts {
        order.shuffle(&mut rng);
        let (vt, vf) = order[..n_learn]
            .iter()
            .fold((0, 0), |(a, b), &i| (a + events[i].0, b + events[i].1));
        if vt == target_vt && vf == target_vf {
            let learning: BTreeSet<String> = order[..n_learn]
                .iter()
                .map(|&i| patients[i].clone())
                .collect();
            let evaluation = order[n_learn..]
                .iter()
                .map(|&i| patients[i].clone())
                .collect();
            return Ok(Split {
                learning_patients: learning,
                evaluation_patients: evaluation,
                seed,
            });
        }
        let miss = vt.abs_diff(target_vt) + vf.abs_diff(target_vf);
        if miss < best.0 {
            best = (miss, vt, vf);
        }
    }
    Err(Error::NoFeasibleSplit {
        attempts: cfg.max_attempts,
        target_vt,
        target_vf,
        best_vt: best.1,
        best_vf: best.2,
    })
}
