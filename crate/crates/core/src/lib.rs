//! Heart rate variability analysis for arrhythmia prediction.
//!
//! The crate is `no_std` (with `alloc`) and holds every numerical piece of the
//! pipeline: R-R interval records and dataset splitting, signal clean-up and
//! resampling, the HRV feature families (time domain, Welch spectrum,
//! bispectrum, nonlinear, difference-map/KDE), feature ranking, and the
//! classifiers with their cross-validated evaluation. File formats and the
//! command line live in the `hrvkit` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bispectrum;
pub mod classify;
pub mod dataset;
mod error;
pub mod features;
pub mod fft;
pub mod nonlinear;
pub mod paf;
pub mod pipeline;
pub mod preprocess;
pub mod selection;
pub mod special;
pub mod stats;
pub mod time_freq;
mod wavelet;

pub use error::{Error, Result};
