//! Noise reduction and resampling of R-R interval / heart-rate signals.

use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dataset::RriSeries;
use crate::stats::median_in_place;
use crate::wavelet;
use crate::{Error, Result};

/// Instantaneous heart rate in beats per minute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IhrSeries {
    values: Vec<f64>,
    times_s: Vec<f64>,
    rate_hz: Option<f64>,
}

impl IhrSeries {
    /// Beat-indexed (non-uniform) series.
    pub fn new(values: Vec<f64>, times_s: Vec<f64>) -> Result<Self> {
        if values.len() != times_s.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: times_s.len(),
            });
        }
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
        if times_s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "times_s",
                reason: "sample times must be strictly increasing".to_string(),
            });
        }
        Ok(Self {
            values,
            times_s,
            rate_hz: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    /// Sampling rate when the series is uniform.
    pub fn rate_hz(&self) -> Option<f64> {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            times_s: self.times_s.clone(),
            rate_hz: self.rate_hz,
        }
    }
}

/// `IHR = 60000 / RRI`, each sample stamped at the end of its interval.
pub fn rri_to_ihr(series: &RriSeries) -> Result<IhrSeries> {
    let values: Vec<f64> = series.values().iter().map(|&rr| 60_000.0 / rr).collect();
    let times: Vec<f64> = series.timestamps_ms().iter().map(|t| t / 1000.0).collect();
    IhrSeries::new(values, times)
}

fn check_odd_order(name: &'static str, order: usize) -> Result<()> {
    if order < 3 || order % 2 == 0 {
        return Err(Error::InvalidParameter {
            name,
            reason: "must be odd and at least 3".to_string(),
        });
    }
    Ok(())
}

/// Running median over a centred window of `order` samples, clipped at the
/// edges so the output keeps the input length.
pub fn median_filter(x: &[f64], order: usize) -> Result<Vec<f64>> {
    check_odd_order("order", order)?;
    let half = order / 2;
    let mut buf = Vec::with_capacity(order);
    Ok((0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            buf.clear();
            buf.extend_from_slice(&x[lo..hi]);
            median_in_place(&mut buf)
        })
        .collect())
}

/// Keep the level-1 Symlet-8 approximation and discard the detail band.
pub fn wavelet_denoise(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < wavelet::FILTER_LEN {
        return Err(Error::TooShort {
            what: "wavelet_denoise",
            needed: wavelet::FILTER_LEN,
            got: x.len(),
        });
    }
    let (approx, _) = wavelet::dwt(x);
    Ok(wavelet::idwt(&approx, None, x.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpulseRejectConfig {
    /// Outlier threshold on the robust deviation score.
    pub tau: f64,
    /// Median window length (odd).
    pub wm: usize,
}

impl Default for ImpulseRejectConfig {
    fn default() -> Self {
        Self { tau: 4.0, wm: 11 }
    }
}

/// Replace impulsive heart-rate samples by the local median.
///
/// The deviation score is `|IHR(n) - med| / (1.483 * MAD)` over a centred
/// `wm`-sample window. A window with zero MAD scores 0 when the sample equals
/// the median and infinity otherwise.
pub fn impulse_reject(ihr: &IhrSeries, cfg: &ImpulseRejectConfig) -> Result<IhrSeries> {
    check_odd_order("wm", cfg.wm)?;
    if !(cfg.tau > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: "must be positive".to_string(),
        });
    }
    let x = ihr.values();
    if x.len() <= cfg.wm {
        return Err(Error::TooShort {
            what: "impulse_reject",
            needed: cfg.wm + 1,
            got: x.len(),
        });
    }
    let half = cfg.wm / 2;
    let mut window = Vec::with_capacity(cfg.wm);
    let mut deviations = Vec::with_capacity(cfg.wm);
    let out = (0..x.len())
        .map(|n| {
            let lo = n.saturating_sub(half);
            let hi = (n + half + 1).min(x.len());
            window.clear();
            window.extend_from_slice(&x[lo..hi]);
            let med = median_in_place(&mut window);
            deviations.clear();
            deviations.extend(x[lo..hi].iter().map(|v| (v - med).abs()));
            let mad = median_in_place(&mut deviations);
            let dev = (x[n] - med).abs();
            let score = if mad > 0.0 {
                dev / (1.483 * mad)
            } else if dev > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if score >= cfg.tau {
                med
            } else {
                x[n]
            }
        })
        .collect();
    Ok(ihr.with_values(out))
}

/// Slopes of the shape-preserving (Fritsch-Carlson) piecewise cubic Hermite
/// interpolant.
fn pchip_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = alloc::vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Three-point end slope, limited so the end piece stays monotone.
fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Evaluate the monotone cubic interpolant of `(t, y)` on a uniform grid
/// starting at `t[0]` with spacing `1 / rate_hz`.
pub(crate) fn pchip_resample(t: &[f64], y: &[f64], rate_hz: f64) -> (Vec<f64>, Vec<f64>) {
    let d = pchip_slopes(t, y);
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    let count = (span * rate_hz + 1e-9).floor() as usize + 1;
    let mut times = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let tq = t0 + i as f64 / rate_hz;
        let k = t.partition_point(|&v| v <= tq).clamp(1, t.len() - 1) - 1;
        let h = t[k + 1] - t[k];
        let s = (tq - t[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        times.push(tq);
        values.push(h00 * y[k] + h10 * h * d[k] + h01 * y[k + 1] + h11 * h * d[k + 1]);
    }
    (times, values)
}

/// Resample onto a uniform grid at `rate_hz` with a shape-preserving cubic.
pub fn resample_uniform(ihr: &IhrSeries, rate_hz: f64) -> Result<IhrSeries> {
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "rate_hz",
            reason: "must be positive".to_string(),
        });
    }
    if ihr.len() < 4 {
        return Err(Error::TooShort {
            what: "resample_uniform",
            needed: 4,
            got: ihr.len(),
        });
    }
    let (times_s, values) = pchip_resample(ihr.times_s(), ihr.values(), rate_hz);
    Ok(IhrSeries {
        values,
        times_s,
        rate_hz: Some(rate_hz),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::variance;
    use alloc::vec;
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> IhrSeries {
        let times = (0..values.len()).map(|i| i as f64 * 0.8).collect();
        IhrSeries::new(values, times).unwrap()
    }

    #[test]
    fn ihr_conversion() {
        let rr = RriSeries::new(vec![1000.0, 600.0], 1.0).unwrap();
        let ihr = rri_to_ihr(&rr).unwrap();
        assert_eq!(ihr.values(), &[60.0, 100.0]);
        assert_eq!(ihr.times_s(), &[1.0, 1.6]);
        let ihr = rri_to_ihr(&RriSeries::new(vec![500.0], 1.0).unwrap()).unwrap();
        assert_eq!(ihr.values(), &[120.0]);
        let ihr = rri_to_ihr(&RriSeries::new(vec![857.0; 5], 1.0).unwrap()).unwrap();
        assert!(ihr.values().iter().all(|v| (v - 70.0).abs() < 0.02));
    }

    #[test]
    fn median_filter_edges_are_clipped() {
        assert_eq!(
            median_filter(&[1.0, 9.0, 1.0], 3).unwrap(),
            vec![5.0, 1.0, 5.0]
        );
        assert_eq!(median_filter(&[4.0; 6], 5).unwrap(), vec![4.0; 6]);
        let ramp: Vec<f64> = (0..10).map(f64::from).collect();
        let out = median_filter(&ramp, 5).unwrap();
        assert_eq!(&out[2..8], &ramp[2..8]);
        assert!(median_filter(&ramp, 4).is_err());
    }

    #[test]
    fn wavelet_preserves_dc_and_kills_nyquist() {
        let out = wavelet_denoise(&[3.25; 40]).unwrap();
        assert!(out.iter().all(|v| (v - 3.25).abs() < 1e-9));
        let alt: Vec<f64> = (0..64)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let out = wavelet_denoise(&alt).unwrap();
        // interior samples are free of boundary effects
        assert!(
            out[16..48].iter().all(|v| v.abs() < 1e-6),
            "{:?}",
            &out[16..48]
        );
        assert!(wavelet_denoise(&[1.0; 15]).is_err());
    }

    #[test]
    fn wavelet_reduces_variance_of_spiky_record() {
        let x: Vec<f64> = (0..256)
            .map(|i| {
                let base = 800.0 + 40.0 * (i as f64 * 0.05).sin();
                if i % 37 == 0 {
                    base + 300.0
                } else {
                    base
                }
            })
            .collect();
        let y = wavelet_denoise(&x).unwrap();
        assert!(variance(&y) <= variance(&x));
    }

    #[test]
    fn impulse_reject_replaces_isolated_spike() {
        let mut v = vec![70.0; 30];
        v[15] = 200.0;
        let out = impulse_reject(&series(v), &ImpulseRejectConfig::default()).unwrap();
        assert!(out.values().iter().all(|&x| x == 70.0));

        let flat = series(vec![70.0; 30]);
        assert_eq!(
            impulse_reject(&flat, &ImpulseRejectConfig::default()).unwrap(),
            flat
        );
    }

    #[test]
    fn impulse_reject_quiet_signal_untouched() {
        let v: Vec<f64> = (0..40).map(|i| 70.0 + (i as f64 * 0.9).sin()).collect();
        let s = series(v);
        let out = impulse_reject(&s, &ImpulseRejectConfig::default()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn impulse_reject_validates() {
        let s = series(vec![70.0; 11]);
        assert!(impulse_reject(&s, &ImpulseRejectConfig::default()).is_err());
        let s = series(vec![70.0; 20]);
        let cfg = ImpulseRejectConfig { tau: 4.0, wm: 4 };
        assert!(impulse_reject(&s, &cfg).is_err());
    }

    #[test]
    fn resample_reproduces_lines_and_constants() {
        let times = vec![0.0, 0.7, 1.1, 2.0, 2.9, 3.3];
        let line: Vec<f64> = times.iter().map(|t| 60.0 + 4.0 * t).collect();
        let out = resample_uniform(&IhrSeries::new(line, times.clone()).unwrap(), 16.0).unwrap();
        assert_eq!(out.rate_hz(), Some(16.0));
        assert_eq!(out.len(), 53);
        for (t, v) in out.times_s().iter().zip(out.values()) {
            assert!((v - (60.0 + 4.0 * t)).abs() < 1e-9);
        }
        let flat = IhrSeries::new(vec![70.0; 6], times).unwrap();
        let out = resample_uniform(&flat, 7.0).unwrap();
        assert!(out.values().iter().all(|&v| (v - 70.0).abs() < 1e-12));
        let spacing = out.times_s()[1] - out.times_s()[0];
        assert!((spacing - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn resample_sine_against_dense_reference() {
        // 0.25 Hz sine, samples every 0.2-0.25 s (16-20 per period)
        let f = 0.25;
        let mut t = 0.0;
        let mut times = vec![];
        let mut i = 0;
        while t < 40.0 {
            times.push(t);
            t += 0.2 + 0.05 * ((i * 7 % 5) as f64 / 4.0);
            i += 1;
        }
        let vals: Vec<f64> = times
            .iter()
            .map(|t| 70.0 + (2.0 * core::f64::consts::PI * f * t).sin())
            .collect();
        let out = resample_uniform(&IhrSeries::new(vals, times).unwrap(), 16.0).unwrap();
        let max_err = out
            .times_s()
            .iter()
            .zip(out.values())
            .map(|(t, v)| (v - 70.0 - (2.0 * core::f64::consts::PI * f * t).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 0.02, "max error {max_err}");
    }

    #[test]
    fn resample_needs_four_samples() {
        let s = IhrSeries::new(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            resample_uniform(&s, 4.0),
            Err(Error::TooShort { .. })
        ));
    }

    proptest! {
        #[test]
        fn resample_never_overshoots(
            steps in prop::collection::vec(0.3f64..1.5, 4..40),
            vals in prop::collection::vec(40.0f64..180.0, 40),
        ) {
            let times: Vec<f64> = steps.iter().scan(0.0, |acc, s| { *acc += s; Some(*acc) }).collect();
            let values = vals[..times.len()].to_vec();
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let out = resample_uniform(&IhrSeries::new(values, times).unwrap(), 16.0).unwrap();
            for v in out.values() {
                prop_assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
            }
        }

        #[test]
        fn filters_idempotent_on_constants(c in 30.0f64..200.0, n in 12usize..60) {
            let x = vec![c; n];
            let once = median_filter(&x, 5).unwrap();
            prop_assert_eq!(&median_filter(&once, 5).unwrap(), &once);
            let s = series(x);
            let r = impulse_reject(&s, &ImpulseRejectConfig::default()).unwrap();
            prop_assert_eq!(&impulse_reject(&r, &ImpulseRejectConfig::default()).unwrap(), &r);
        }
    }
}
