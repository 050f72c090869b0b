//! Named preprocessing presets and per-record feature extraction.
//!
//! * `ch4`: resample the RR intervals at 16 Hz, convert to heart rate, then
//!   median filter (order 5).
//! * `ch5`: wavelet-denoise the RR intervals, median filter (order 5),
//!   convert to heart rate, resample at 16 Hz.
//! * `ch6`: convert to heart rate, reject impulses, wavelet-denoise,
//!   resample at 7 Hz.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{extract_event_window, RriSeries};
use crate::features::{paf_feature_vector, vt_vf_features, FeatureConfig, Task};
use crate::preprocess::{
    impulse_reject, median_filter, resample_uniform, rri_to_ihr, wavelet_denoise, IhrSeries,
    ImpulseRejectConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Ch4,
    Ch5,
    Ch6,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Ch4, Preset::Ch5, Preset::Ch6];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Ch4 => "ch4",
            Preset::Ch5 => "ch5",
            Preset::Ch6 => "ch6",
        }
    }

    pub fn task(self) -> Task {
        match self {
            Preset::Ch4 | Preset::Ch5 => Task::VtVf,
            Preset::Ch6 => Task::Paf,
        }
    }

    pub fn rate_hz(self) -> f64 {
        match self {
            Preset::Ch4 | Preset::Ch5 => 16.0,
            Preset::Ch6 => 7.0,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "preset",
                reason: "expected ch4, ch5 or ch6".to_string(),
            })
    }
}

pub const DEFAULT_GUARD_S: f64 = 10.0;
pub const DEFAULT_MEDIAN_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub preset: Preset,
    pub window_s: f64,
    pub guard_s: f64,
    pub median_order: usize,
    pub impulse: ImpulseRejectConfig,
    pub features: FeatureConfig,
}

impl PipelineConfig {
    pub fn new(preset: Preset, window_s: f64) -> Self {
        Self {
            preset,
            window_s,
            guard_s: DEFAULT_GUARD_S,
            median_order: DEFAULT_MEDIAN_ORDER,
            impulse: ImpulseRejectConfig::default(),
            features: FeatureConfig::default(),
        }
    }

    pub fn task(&self) -> Task {
        self.preset.task()
    }
}

/// Output of a preset: the uniform heart-rate signal and the cleaned RR
/// intervals (ms) it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedRecord {
    pub signal: IhrSeries,
    pub rr_ms: Vec<f64>,
}

fn to_ihr(rr: &[f64]) -> Vec<f64> {
    rr.iter().map(|v| 60_000.0 / v).collect()
}

pub fn preprocess(series: &RriSeries, cfg: &PipelineConfig) -> Result<ProcessedRecord> {
    let rate = cfg.preset.rate_hz();
    let times: Vec<f64> = series.timestamps_ms().iter().map(|t| t / 1000.0).collect();
    match cfg.preset {
        Preset::Ch4 => {
            // the uniform grid is built on RR values, converted afterwards
            let rr = IhrSeries::new(series.values().to_vec(), times)?;
            let uniform = resample_uniform(&rr, rate)?;
            let ihr = median_filter(&to_ihr(uniform.values()), cfg.median_order)?;
            Ok(ProcessedRecord {
                rr_ms: to_ihr(&ihr),
                signal: uniform.with_values(ihr),
            })
        }
        Preset::Ch5 => {
            let smooth = wavelet_denoise(series.values())?;
            let rr = median_filter(&smooth, cfg.median_order)?;
            let ihr = IhrSeries::new(to_ihr(&rr), times)?;
            Ok(ProcessedRecord {
                signal: resample_uniform(&ihr, rate)?,
                rr_ms: rr,
            })
        }
        Preset::Ch6 => {
            let ihr = impulse_reject(&rri_to_ihr(series)?, &cfg.impulse)?;
            let smooth = wavelet_denoise(ihr.values())?;
            let cleaned = IhrSeries::new(smooth, ihr.times_s().to_vec())?;
            Ok(ProcessedRecord {
                rr_ms: to_ihr(cleaned.values()),
                signal: resample_uniform(&cleaned, rate)?,
            })
        }
    }
}

/// Window extraction, preprocessing and the task's feature vector, in the
/// order of `cfg.task().feature_names()`.
pub fn extract_record_features(series: &RriSeries, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    let window = extract_event_window(series, cfg.window_s, cfg.guard_s)?;
    let processed = preprocess(&window, cfg)?;
    let rate = cfg.preset.rate_hz();
    match cfg.task() {
        Task::VtVf => vt_vf_features(processed.signal.values(), rate, &cfg.features),
        Task::Paf => paf_feature_vector(
            &processed.rr_ms,
            processed.signal.values(),
            rate,
            &cfg.features,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn varied_rr(n: usize) -> RriSeries {
        let values = (0..n)
            .map(|i| {
                let t = i as f64;
                (800.0 + 40.0 * (t * 0.35).sin() + 15.0 * (t * 1.9).cos()).round()
            })
            .collect();
        RriSeries::new(values, 1.0).unwrap()
    }

    #[test]
    fn presets_parse_and_map_to_tasks() {
        assert_eq!("ch6".parse::<Preset>().unwrap(), Preset::Ch6);
        assert!("ch7".parse::<Preset>().is_err());
        assert_eq!(Preset::Ch4.task(), Task::VtVf);
        assert_eq!(Preset::Ch6.rate_hz(), 7.0);
    }

    #[test]
    fn constant_record_stays_constant() {
        let series = RriSeries::new(vec![857.0; 120], 1.0).unwrap();
        for preset in Preset::ALL {
            let p = preprocess(&series, &PipelineConfig::new(preset, 60.0)).unwrap();
            assert_eq!(p.signal.rate_hz(), Some(preset.rate_hz()));
            for v in p.signal.values() {
                assert!((v - 60_000.0 / 857.0).abs() < 1e-6, "{preset}: {v}");
            }
        }
    }

    #[test]
    fn every_preset_extracts_a_full_vector() {
        let series = varied_rr(500);
        for preset in Preset::ALL {
            let cfg = PipelineConfig::new(preset, 300.0);
            let v = extract_record_features(&series, &cfg).unwrap();
            assert_eq!(v.len(), preset.task().feature_names().len());
            assert!(v.iter().all(|x| x.is_finite()), "{preset}: {v:?}");
        }
    }

    #[test]
    fn short_records_are_rejected() {
        let series = varied_rr(30);
        let err = extract_record_features(&series, &PipelineConfig::new(Preset::Ch5, 60.0));
        assert!(matches!(err, Err(Error::InsufficientDuration { .. })));
    }
}
