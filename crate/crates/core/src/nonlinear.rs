//! Poincaré descriptors, sample entropy, histogram entropies and Hjorth
//! parameters.

use alloc::string::ToString;
use alloc::vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::stats::{min_max, std_dev, variance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareFeatures {
    pub sd1: f64,
    pub sd2: f64,
    /// `sd1 / sd2`, or 0 when `sd2` is 0.
    pub ratio: f64,
    pub sdsd: f64,
    pub sdrr: f64,
}

pub fn poincare_features(rr: &[f64]) -> Result<PoincareFeatures> {
    if rr.len() < 3 {
        return Err(Error::TooShort {
            what: "poincare_features",
            needed: 3,
            got: rr.len(),
        });
    }
    let diffs: alloc::vec::Vec<f64> = rr.windows(2).map(|w| w[1] - w[0]).collect();
    let sdsd = std_dev(&diffs);
    let sdrr = std_dev(rr);
    let sd1 = (sdsd * sdsd / 2.0).sqrt();
    let radicand = 2.0 * sdrr * sdrr - sdsd * sdsd / 2.0;
    let sd2 = if radicand < 0.0 {
        log::warn!("poincare_features: negative SD2 radicand {radicand} clamped to 0");
        0.0
    } else {
        radicand.sqrt()
    };
    let ratio = if sd2 > 0.0 { sd1 / sd2 } else { 0.0 };
    Ok(PoincareFeatures {
        sd1,
        sd2,
        ratio,
        sdsd,
        sdrr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub m: usize,
    pub r_coeff: f64,
    pub alpha: f64,
    pub bins: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            m: 2,
            r_coeff: 0.2,
            alpha: 2.0,
            bins: 16,
        }
    }
}

impl EntropyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.m < 1 {
            return bad("m", "must be at least 1");
        }
        if !(self.r_coeff > 0.0) {
            return bad("r_coeff", "must be positive");
        }
        if !(self.alpha >= 0.0) || self.alpha == 1.0 {
            return bad("alpha", "must be non-negative and not 1");
        }
        if self.bins < 2 {
            return bad("bins", "must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleEntropy {
    pub value: f64,
    /// Set when no template pairs matched and `value` is the
    /// `ln(possible pairs)` ceiling.
    pub capped: bool,
}

// Unordered pairs among the first `n_templates` templates whose Chebyshev
// distance over `len` points is strictly below `r`.
fn matching_pairs(x: &[f64], n_templates: usize, len: usize, r: f64) -> u64 {
    let mut count = 0;
    for i in 0..n_templates {
        for j in i + 1..n_templates {
            if (0..len).all(|k| (x[i + k] - x[j + k]).abs() < r) {
                count += 1;
            }
        }
    }
    count
}

/// `-ln(A / B)` with Chebyshev matching at `r = r_coeff * SD(x)`.
///
/// Both lengths use the same `N - m` templates and self-matches are excluded.
pub fn sample_entropy(x: &[f64], cfg: &EntropyConfig) -> Result<SampleEntropy> {
    cfg.validate()?;
    let m = cfg.m;
    if x.len() < m + 2 {
        return Err(Error::TooShort {
            what: "sample_entropy",
            needed: m + 2,
            got: x.len(),
        });
    }
    let sd = std_dev(x);
    if sd == 0.0 {
        return Ok(SampleEntropy {
            value: 0.0,
            capped: false,
        });
    }
    let r = cfg.r_coeff * sd;
    let n_templates = x.len() - m;
    let b = matching_pairs(x, n_templates, m, r);
    let a = if b == 0 {
        0
    } else {
        matching_pairs(x, n_templates, m + 1, r)
    };
    if a == 0 || b == 0 {
        let possible = (n_templates * (n_templates - 1) / 2).max(1) as f64;
        return Ok(SampleEntropy {
            value: possible.ln(),
            capped: true,
        });
    }
    Ok(SampleEntropy {
        value: -(a as f64 / b as f64).ln(),
        capped: false,
    })
}

/// Rényi and Tsallis entropies of order `alpha` from an equal-width
/// histogram over `[min, max]`.
pub fn distribution_entropies(x: &[f64], cfg: &EntropyConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if x.len() < cfg.bins {
        return Err(Error::TooShort {
            what: "distribution_entropies",
            needed: cfg.bins,
            got: x.len(),
        });
    }
    let (lo, hi) = min_max(x);
    if hi == lo {
        return Ok((0.0, 0.0));
    }
    let mut counts = vec![0usize; cfg.bins];
    let width = (hi - lo) / cfg.bins as f64;
    for &v in x {
        let bin = (((v - lo) / width).floor() as usize).min(cfg.bins - 1);
        counts[bin] += 1;
    }
    let n = x.len() as f64;
    let power_sum: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| (c as f64 / n).powf(cfg.alpha))
        .sum();
    let renyi = power_sum.ln() / (1.0 - cfg.alpha);
    let tsallis = (1.0 - power_sum) / (cfg.alpha - 1.0);
    Ok((renyi, tsallis))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HjorthFeatures {
    pub activity: f64,
    pub mobility: f64,
    pub complexity: f64,
}

fn mobility(var_x: f64, var_dx: f64) -> f64 {
    if var_x > 0.0 {
        (var_dx / var_x).sqrt()
    } else {
        0.0
    }
}

/// Activity, mobility and complexity with the first difference as derivative.
pub fn hjorth_parameters(x: &[f64]) -> Result<HjorthFeatures> {
    if x.len() < 3 {
        return Err(Error::TooShort {
            what: "hjorth_parameters",
            needed: 3,
            got: x.len(),
        });
    }
    let dx: alloc::vec::Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let ddx: alloc::vec::Vec<f64> = dx.windows(2).map(|w| w[1] - w[0]).collect();
    let var_x = variance(x);
    let var_dx = variance(&dx);
    let var_ddx = variance(&ddx);
    let mob_x = mobility(var_x, var_dx);
    let mob_dx = mobility(var_dx, var_ddx);
    let complexity = if mob_x > 0.0 { mob_dx / mob_x } else { 0.0 };
    Ok(HjorthFeatures {
        activity: var_x,
        mobility: mob_x,
        complexity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn poincare_closed_forms() {
        let p = poincare_features(&[800.0; 10]).unwrap();
        assert_eq!((p.sd1, p.sd2, p.ratio), (0.0, 0.0, 0.0));

        // the N - 1 successive differences of an even-length alternation have
        // mean d / (N - 1), so the closed forms carry a finite-length factor
        let n = 1000;
        let k = (n - 1) as f64;
        let alt: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 800.0 } else { 840.0 })
            .collect();
        let p = poincare_features(&alt).unwrap();
        let sd1_limit = 40.0 / 2f64.sqrt();
        assert_relative_eq!(
            p.sd1,
            sd1_limit * (1.0 - 1.0 / (k * k)).sqrt(),
            epsilon = 1e-9
        );
        assert_relative_eq!(p.sd2, sd1_limit / k, epsilon = 1e-9);
        assert!((p.sd1 - sd1_limit).abs() < 1e-4 && p.sd2 < 0.03);

        let ramp: Vec<f64> = (0..20).map(|i| 700.0 + 5.0 * i as f64).collect();
        let p = poincare_features(&ramp).unwrap();
        assert_eq!(p.sd1, 0.0);
        assert_relative_eq!(p.sd2, 2f64.sqrt() * p.sdrr, epsilon = 1e-9);

        assert!(poincare_features(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn poincare_variance_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..200)
            .map(|_| 800.0 + rng.random_range(-50.0..50.0))
            .collect();
        let p = poincare_features(&x).unwrap();
        assert_relative_eq!(
            2.0 * p.sdrr * p.sdrr,
            p.sd1 * p.sd1 + p.sd2 * p.sd2,
            epsilon = 1e-9
        );
    }

    fn brute_force_counts(x: &[f64], m: usize, r: f64) -> (usize, usize) {
        let n = x.len() - m;
        let close = |i: usize, j: usize, len: usize| {
            (0..len)
                .map(|k| (x[i + k] - x[j + k]).abs())
                .fold(0.0, f64::max)
                < r
        };
        let mut b = 0;
        let mut a = 0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    b += usize::from(close(i, j, m));
                    a += usize::from(close(i, j, m + 1));
                }
            }
        }
        (a, b)
    }

    #[test]
    fn sample_entropy_hand_sequence() {
        let x = [1.0, 2.0, 1.05, 2.02, 1.1, 2.5, 1.0, 2.01, 1.03, 1.9];
        let cfg = EntropyConfig::default();
        let (a, b) = brute_force_counts(&x, 2, 0.2 * std_dev(&x));
        assert_eq!((a, b), (6, 12));
        let s = sample_entropy(&x, &cfg).unwrap();
        assert!(!s.capped);
        assert_relative_eq!(s.value, core::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn sample_entropy_conventions() {
        let cfg = EntropyConfig::default();
        let s = sample_entropy(&[5.0; 12], &cfg).unwrap();
        assert_eq!((s.value, s.capped), (0.0, false));

        // widely spread values never match
        let x: Vec<f64> = (0..10).map(|i| (i * i * 37 % 101) as f64).collect();
        let s = sample_entropy(&x, &cfg).unwrap();
        assert!(s.capped);
        assert_relative_eq!(s.value, (28.0f64).ln(), epsilon = 1e-12);

        assert!(sample_entropy(&[1.0, 2.0, 3.0], &cfg).is_err());
    }

    #[test]
    fn noise_is_more_irregular_than_a_slow_sine() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sd = std_dev(&noise);
        let sine: Vec<f64> = (0..300)
            .map(|i| sd * 2f64.sqrt() * (2.0 * PI * i as f64 / 50.0).sin())
            .collect();
        let cfg = EntropyConfig::default();
        let a = sample_entropy(&noise, &cfg).unwrap().value;
        let b = sample_entropy(&sine, &cfg).unwrap().value;
        assert!(a > b, "{a} vs {b}");
    }

    #[test]
    fn sample_entropy_is_affine_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..150).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v + 7.0).collect();
        let cfg = EntropyConfig::default();
        assert_relative_eq!(
            sample_entropy(&x, &cfg).unwrap().value,
            sample_entropy(&y, &cfg).unwrap().value,
            epsilon = 1e-12
        );
    }

    #[test]
    fn distribution_entropy_closed_forms() {
        let cfg = EntropyConfig {
            bins: 4,
            ..EntropyConfig::default()
        };
        let x = [0.5, 1.5, 2.5, 3.5, 0.6, 1.6, 2.6, 3.4];
        let (renyi, tsallis) = distribution_entropies(&x, &cfg).unwrap();
        assert_relative_eq!(renyi, 4f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(tsallis, 0.75, epsilon = 1e-12);

        assert_eq!(distribution_entropies(&[2.0; 8], &cfg).unwrap(), (0.0, 0.0));
        assert!(distribution_entropies(&[1.0, 2.0], &cfg).is_err());
        let bad = EntropyConfig {
            alpha: 1.0,
            ..EntropyConfig::default()
        };
        assert!(distribution_entropies(&x, &bad).is_err());
    }

    #[test]
    fn distribution_entropies_match_histogram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x: Vec<f64> = (0..256)
            .map(|_| {
                let u: f64 = rng.random_range(1e-12..1.0);
                let v: f64 = rng.random_range(0.0..1.0);
                (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
            })
            .collect();
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = [0.0f64; 16];
        for v in &x {
            let k = ((v - lo) / (hi - lo) * 16.0) as usize;
            counts[k.min(15)] += 1.0;
        }
        let sum_sq: f64 = counts.iter().map(|c| (c / 256.0) * (c / 256.0)).sum();
        let (renyi, tsallis) = distribution_entropies(&x, &EntropyConfig::default()).unwrap();
        assert!((renyi + sum_sq.ln()).abs() < 1e-12);
        assert!((tsallis - (1.0 - sum_sq)).abs() < 1e-12);
    }

    #[test]
    fn hjorth_conventions_and_sine() {
        assert_eq!(
            hjorth_parameters(&[3.0; 8]).unwrap(),
            HjorthFeatures {
                activity: 0.0,
                mobility: 0.0,
                complexity: 0.0
            }
        );
        let f = 0.05;
        let x: Vec<f64> = (0..1024).map(|i| (2.0 * PI * f * i as f64).sin()).collect();
        let h = hjorth_parameters(&x).unwrap();
        let expected = 2.0 * (PI * f).sin();
        assert!(
            (h.mobility - expected).abs() / expected < 0.02,
            "{}",
            h.mobility
        );

        let scaled: Vec<f64> = x.iter().map(|v| -4.0 * v).collect();
        let s = hjorth_parameters(&scaled).unwrap();
        assert_relative_eq!(s.activity, 16.0 * h.activity, max_relative = 1e-12);
        assert_relative_eq!(s.mobility, h.mobility, max_relative = 1e-12);
        assert_relative_eq!(s.complexity, h.complexity, max_relative = 1e-12);
    }
}
