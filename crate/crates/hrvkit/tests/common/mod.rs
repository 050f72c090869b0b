//! Synthetic records and manifests shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use hrvkit_core::dataset::{DatasetManifest, EventRecord, Label, RecordSource, RriSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const TOY_PATIENTS: usize = 78;

/// `(patient_id, record_id, label)` for 78 patients holding 106 VT, 29 VF
/// and 126 CON records.
pub fn toy_layout() -> Vec<(String, String, Label)> {
    let mut out = Vec::new();
    for p in 0..TOY_PATIENTS {
        let n_vt = if p < 28 { 2 } else { 1 };
        let n_vf = usize::from((p * 7) % TOY_PATIENTS < 29);
        let n_con = if p < 48 { 2 } else { 1 };
        let pid = format!("P{p:02}");
        let mut push = |label: Label, n: usize| {
            for j in 0..n {
                let rid = format!("{pid}_{}{j}", label.as_str());
                out.push((pid.clone(), rid, label));
            }
        };
        push(Label::Vt, n_vt);
        push(Label::Vf, n_vf);
        push(Label::Con, n_con);
    }
    out
}

/// RR intervals (ms) lasting at least `duration_s`. Positive classes have a
/// shorter mean interval and a stronger 0.1 Hz oscillation than controls.
pub fn synth_rri(label: Label, seed: u64, duration_s: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mean, amp, noise) = if label.is_positive() {
        (650.0, 45.0, 18.0)
    } else {
        (850.0, 15.0, 30.0)
    };
    let mean = mean + rng.random_range(-40.0..40.0);
    let phase = rng.random_range(0.0..2.0 * PI);
    let jitter = Normal::new(0.0, noise).unwrap();
    let mut t = 0.0;
    let mut out = Vec::new();
    while t < duration_s * 1000.0 {
        let v = mean + amp * (2.0 * PI * 0.1 * t / 1000.0 + phase).sin() + jitter.sample(&mut rng);
        let v = v.max(300.0).round();
        out.push(v);
        t += v;
    }
    out
}

pub fn toy_manifest_inline(duration_s: f64) -> DatasetManifest {
    let records = toy_layout()
        .into_iter()
        .enumerate()
        .map(|(i, (patient_id, record_id, label))| EventRecord {
            patient_id,
            record_id,
            label,
            source: RecordSource::Inline(
                RriSeries::new(synth_rri(label, i as u64, duration_s), 1.0).unwrap(),
            ),
        })
        .collect();
    DatasetManifest::new(records).unwrap()
}

/// Writes one CSV per record plus `manifest.json` into `dir` and returns the
/// manifest path.
pub fn write_dataset(dir: &Path, layout: &[(String, String, Label)], duration_s: f64) -> PathBuf {
    fs::create_dir_all(dir.join("rri")).unwrap();
    let mut entries = Vec::new();
    for (i, (pid, rid, label)) in layout.iter().enumerate() {
        let rel = format!("rri/{rid}.csv");
        let mut text = String::from("rri_ms\n");
        for v in synth_rri(*label, i as u64, duration_s) {
            text.push_str(&format!("{v}\n"));
        }
        fs::write(dir.join(&rel), text).unwrap();
        entries.push(serde_json::json!({
            "patient_id": pid,
            "record_id": rid,
            "label": label.as_str(),
            "path": rel,
        }));
    }
    let manifest = dir.join("manifest.json");
    fs::write(
        &manifest,
        serde_json::to_string_pretty(&serde_json::json!({ "records": entries })).unwrap(),
    )
    .unwrap();
    manifest
}

/// `n_patients` patients each holding one record of every label in `labels`.
pub fn small_layout(n_patients: usize, labels: &[Label]) -> Vec<(String, String, Label)> {
    let mut out = Vec::new();
    for p in 0..n_patients {
        for (j, &label) in labels.iter().enumerate() {
            out.push((
                format!("S{p}"),
                format!("S{p}_{}{j}", label.as_str()),
                label,
            ));
        }
    }
    out
}

pub fn hrvkit_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_hrvkit"))
}
