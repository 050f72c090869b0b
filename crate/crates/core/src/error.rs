use alloc::string::String;

use crate::bispectrum::RegionId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,
    #[error("non-positive or non-finite interval {value} at index {index}")]
    InvalidInterval { index: usize, value: f64 },
    #[error("insufficient duration: {available_s:.3} s available, {required_s:.3} s required")]
    InsufficientDuration { available_s: f64, required_s: f64 },
    #[error("{what} needs at least {needed} samples, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("duplicate record id `{0}`")]
    DuplicateRecord(String),
    #[error("record `{0}` has an empty patient id")]
    EmptyPatientId(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error(
        "no feasible split after {attempts} attempts (targets VT {target_vt}, VF {target_vf}; \
         closest draw VT {best_vt}, VF {best_vf})"
    )]
    NoFeasibleSplit {
        attempts: usize,
        target_vt: usize,
        target_vf: usize,
        best_vt: usize,
        best_vf: usize,
    },
    #[error("bispectrum region {0:?} contains no grid cells")]
    EmptyRegion(RegionId),
    #[error("spectrum only reaches {max_hz} Hz, band integration needs {needed_hz} Hz")]
    SpectrumCoverage { max_hz: f64, needed_hz: f64 },
    #[error("every feature was removed at alpha = {alpha}; try a larger alpha")]
    AllFeaturesRemoved { alpha: f64 },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("k = {k} exceeds the {rows} training rows")]
    NeighboursExceedRows { k: usize, rows: usize },
    #[error("{folds} folds requested but only {patients} patients are available")]
    TooManyFolds { folds: usize, patients: usize },
    #[error("confusion matrix is empty")]
    EmptyConfusion,
}
