//! Time-domain statistics and Welch power-spectrum band powers.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::fft::fft_real;
use crate::stats::{mean, min_max, std_dev};
use crate::{Error, Result};

/// Conventional triangular-index bin width, 1/128 s.
pub const DEFAULT_HRV_TRI_BIN: f64 = 7.8125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainFeatures {
    pub mean_nn: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub nn50: usize,
    pub pnn50: f64,
    pub hrv_tri: f64,
}

/// MeanNN, SDNN, RMSSD, NN50, pNN50 and the HRV triangular index.
///
/// pNN50 divides by the number of successive differences (`N - 1`).
pub fn time_domain_features(x: &[f64], bin_width: f64) -> Result<TimeDomainFeatures> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            what: "time_domain_features",
            needed: 2,
            got: x.len(),
        });
    }
    if !(bin_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            reason: "must be positive".to_string(),
        });
    }
    let n = x.len();
    let diffs = x.windows(2).map(|w| w[1] - w[0]);
    let (sq_sum, nn50) = diffs.fold((0.0, 0usize), |(s, c), d| {
        (s + d * d, c + usize::from(d.abs() > 50.0))
    });
    let rmssd = (sq_sum / (n - 1) as f64).sqrt();

    let (lo, _) = min_max(x);
    let mut counts: Vec<usize> = Vec::new();
    for &v in x {
        let bin = ((v - lo) / bin_width).floor() as usize;
        if bin >= counts.len() {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1);

    Ok(TimeDomainFeatures {
        mean_nn: mean(x),
        sdnn: std_dev(x),
        rmssd,
        nn50,
        pnn50: nn50 as f64 / (n - 1) as f64,
        hrv_tri: n as f64 / peak as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Taper {
    Rectangular,
    Hann,
    Hamming,
}

impl Taper {
    /// Periodic (DFT-even) window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let n_f = n as f64;
        (0..n)
            .map(|i| {
                let phase = 2.0 * PI * i as f64 / n_f;
                match self {
                    Taper::Rectangular => 1.0,
                    Taper::Hann => 0.5 - 0.5 * phase.cos(),
                    Taper::Hamming => 0.54 - 0.46 * phase.cos(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub seg_len: usize,
    pub overlap_frac: f64,
    pub taper: Taper,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            seg_len: 256,
            overlap_frac: 0.5,
            taper: Taper::Hann,
        }
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub rate_hz: f64,
    pub segments: usize,
    pub config: Option<WelchConfig>,
}

impl PsdEstimate {
    /// A spectrum from explicit samples on an ascending frequency grid.
    pub fn new(freqs: Vec<f64>, power: Vec<f64>, rate_hz: f64) -> Result<Self> {
        if freqs.len() != power.len() {
            return Err(Error::LengthMismatch {
                left: freqs.len(),
                right: power.len(),
            });
        }
        if freqs.len() < 2 || freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "freqs",
                reason: "need at least two strictly ascending frequencies".to_string(),
            });
        }
        if power.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "power",
                reason: "must be non-negative".to_string(),
            });
        }
        Ok(Self {
            freqs,
            power,
            rate_hz,
            segments: 0,
            config: None,
        })
    }

    pub fn resolution_hz(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    /// Integral of the piecewise-linear spectrum over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let f = &self.freqs;
        let p = &self.power;
        let interp = |k: usize, x: f64| p[k] + (p[k + 1] - p[k]) * (x - f[k]) / (f[k + 1] - f[k]);
        let mut total = 0.0;
        for k in 0..f.len() - 1 {
            let a = f[k].max(lo);
            let b = f[k + 1].min(hi);
            if b > a {
                total += 0.5 * (b - a) * (interp(k, a) + interp(k, b));
            }
        }
        total
    }
}

/// Welch averaged modified periodogram with per-segment mean removal.
///
/// Density scaling makes `sum(power) * df` approximate the signal variance.
pub fn welch_psd(x: &[f64], rate_hz: f64, cfg: &WelchConfig) -> Result<PsdEstimate> {
    let seg = cfg.seg_len;
    if seg < 2 {
        return Err(Error::InvalidParameter {
            name: "seg_len",
            reason: "must be at least 2".to_string(),
        });
    }
    if !(0.0..1.0).contains(&cfg.overlap_frac) {
        return Err(Error::InvalidParameter {
            name: "overlap_frac",
            reason: "must lie in [0, 1)".to_string(),
        });
    }
    if !(rate_hz > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rate_hz",
            reason: "must be positive".to_string(),
        });
    }
    if x.len() < seg {
        return Err(Error::TooShort {
            what: "welch_psd",
            needed: seg,
            got: x.len(),
        });
    }
    let overlap = (cfg.overlap_frac * seg as f64).floor() as usize;
    let step = seg - overlap;
    let window = cfg.taper.coefficients(seg);
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let bins = seg / 2 + 1;
    let mut power = vec![0.0; bins];
    let mut segments = 0;
    let mut buf = vec![0.0; seg];
    let mut start = 0;
    while start + seg <= x.len() {
        let chunk = &x[start..start + seg];
        let m = mean(chunk);
        for ((b, v), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = (v - m) * w;
        }
        let spectrum = fft_real(&buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p += spectrum[k].norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (rate_hz * window_energy * segments as f64);
    for (k, p) in power.iter_mut().enumerate() {
        *p *= scale;
        let edge = k == 0 || (seg % 2 == 0 && k == bins - 1);
        if !edge {
            *p *= 2.0;
        }
    }
    let freqs = (0..bins).map(|k| k as f64 * rate_hz / seg as f64).collect();
    Ok(PsdEstimate {
        freqs,
        power,
        rate_hz,
        segments,
        config: Some(*cfg),
    })
}

pub const VLF_BAND: (f64, f64) = (0.0, 0.04);
pub const LF_BAND: (f64, f64) = (0.04, 0.15);
pub const HF_BAND: (f64, f64) = (0.15, 0.4);

/// LF/HF value reported when HF power is zero but LF power is not.
pub const LF_HF_RATIO_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqDomainFeatures {
    pub p_vlf: f64,
    pub p_lf: f64,
    pub p_hf: f64,
    pub lf_hf_ratio: f64,
}

pub fn band_power_features(psd: &PsdEstimate) -> Result<FreqDomainFeatures> {
    let max_hz = *psd.freqs.last().expect("validated spectrum");
    if max_hz < HF_BAND.1 {
        return Err(Error::SpectrumCoverage {
            max_hz,
            needed_hz: HF_BAND.1,
        });
    }
    let p_vlf = psd.integrate(VLF_BAND.0, VLF_BAND.1);
    let p_lf = psd.integrate(LF_BAND.0, LF_BAND.1);
    let p_hf = psd.integrate(HF_BAND.0, HF_BAND.1);
    let lf_hf_ratio = if p_hf > 0.0 {
        p_lf / p_hf
    } else if p_lf > 0.0 {
        LF_HF_RATIO_CAP
    } else {
        0.0
    };
    Ok(FreqDomainFeatures {
        p_vlf,
        p_lf,
        p_hf,
        lf_hf_ratio,
    })
}
