//! Difference-map features: covariance of successive RR differences and
//! summaries of univariate and bivariate Gaussian kernel density estimates.
//!
//! Area, volume and energy are plain sums over grid density values without
//! cell-size scaling, so the grid resolution is part of their definition.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::stats::{mean, min_max, std_dev};
use crate::{Error, Result};

/// Points `(rr[i+1] - rr[i], rr[i+2] - rr[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceMap {
    pub points: Vec<(f64, f64)>,
}

impl DifferenceMap {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn difference_map(rr: &[f64]) -> Result<DifferenceMap> {
    if rr.len() < 3 {
        return Err(Error::TooShort {
            what: "difference_map",
            needed: 3,
            got: rr.len(),
        });
    }
    let points = rr.windows(3).map(|w| (w[1] - w[0], w[2] - w[1])).collect();
    Ok(DifferenceMap { points })
}

/// Population covariance of the two axes.
pub fn diffmap_covariance(map: &DifferenceMap) -> Result<f64> {
    if map.len() < 2 {
        return Err(Error::TooShort {
            what: "diffmap_covariance",
            needed: 2,
            got: map.len(),
        });
    }
    let xs = map.xs();
    let ys = map.ys();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sum: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sum / map.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// `1.06 * sigma * n^(-1/5)` per axis with the population SD.
    Silverman,
    Fixed(f64),
    /// Separate x and y bandwidths; univariate estimates use the first.
    FixedXy(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeConfig {
    pub bandwidth: Bandwidth,
    pub grid_points: usize,
}

impl Default for KdeConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Silverman,
            grid_points: 256,
        }
    }
}

/// Bandwidth used when the Silverman rule meets zero-variance samples.
pub const FALLBACK_BANDWIDTH: f64 = 1.0;

const PAD_BANDWIDTHS: f64 = 3.0;

fn silverman(samples: &[f64]) -> f64 {
    let sigma = std_dev(samples);
    if sigma > 0.0 {
        1.06 * sigma * (samples.len() as f64).powf(-0.2)
    } else {
        log::warn!("kde: zero-variance samples, bandwidth falls back to {FALLBACK_BANDWIDTH}");
        FALLBACK_BANDWIDTH
    }
}

fn check_bandwidth(h: f64) -> Result<f64> {
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(Error::InvalidParameter {
            name: "bandwidth",
            reason: "must be positive and finite".to_string(),
        })
    }
}

impl KdeConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_points < 16 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                reason: "must be at least 16".to_string(),
            });
        }
        Ok(())
    }

    // `axis` 0 is x, 1 is y.
    fn bandwidth_for(&self, samples: &[f64], axis: usize) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Silverman => {
                if samples.len() < 2 {
                    return Err(Error::TooShort {
                        what: "kde with Silverman bandwidth",
                        needed: 2,
                        got: samples.len(),
                    });
                }
                Ok(silverman(samples))
            }
            Bandwidth::Fixed(h) => check_bandwidth(h),
            Bandwidth::FixedXy(hx, hy) => check_bandwidth(if axis == 0 { hx } else { hy }),
        }
    }
}

fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// A univariate Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateKde {
    samples: Vec<f64>,
    h: f64,
}

impl UnivariateKde {
    pub fn new(samples: &[f64], cfg: &KdeConfig) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySeries);
        }
        let h = cfg.bandwidth_for(samples, 0)?;
        Ok(Self {
            samples: samples.to_vec(),
            h,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn density(&self, x: f64) -> f64 {
        let sum: f64 = self
            .samples
            .iter()
            .map(|s| gaussian((x - s) / self.h))
            .sum();
        sum / (self.samples.len() as f64 * self.h)
    }
}

/// A bivariate product-kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateKde {
    points: Vec<(f64, f64)>,
    hx: f64,
    hy: f64,
}

impl BivariateKde {
    pub fn new(map: &DifferenceMap, cfg: &KdeConfig) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::EmptySeries);
        }
        let hx = cfg.bandwidth_for(&map.xs(), 0)?;
        let hy = cfg.bandwidth_for(&map.ys(), 1)?;
        Ok(Self {
            points: map.points.clone(),
            hx,
            hy,
        })
    }

    pub fn bandwidths(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let sum: f64 = self
            .points
            .iter()
            .map(|(px, py)| gaussian((x - px) / self.hx) * gaussian((y - py) / self.hy))
            .sum();
        sum / (self.points.len() as f64 * self.hx * self.hy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid1d {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub step: f64,
}

impl DensityGrid1d {
    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.step
    }
}

/// Density sampled on `x` by `y`; `density[r * x.len() + c]` is the value at
/// `(x[c], y[r])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid2d {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub density: Vec<f64>,
    pub step_x: f64,
    pub step_y: f64,
}

impl DensityGrid2d {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.density[row * self.x.len() + col]
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.step_x * self.step_y
    }
}

fn padded_axis(samples: &[f64], h: f64, points: usize) -> (Vec<f64>, f64) {
    let (lo, hi) = min_max(samples);
    let start = lo - PAD_BANDWIDTHS * h;
    let step = (hi - lo + 2.0 * PAD_BANDWIDTHS * h) / (points - 1) as f64;
    ((0..points).map(|i| start + i as f64 * step).collect(), step)
}

// kernel[g * n + i] = k((grid[g] - samples[i]) / h)
fn kernel_table(grid: &[f64], samples: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len() * samples.len());
    for g in grid {
        out.extend(samples.iter().map(|s| gaussian((g - s) / h)));
    }
    out
}

/// Evaluates the estimate on a grid padded by three bandwidths beyond the
/// sample extent.
pub fn kde_univariate(samples: &[f64], cfg: &KdeConfig) -> Result<DensityGrid1d> {
    cfg.validate()?;
    let kde = UnivariateKde::new(samples, cfg)?;
    let (grid, step) = padded_axis(samples, kde.h, cfg.grid_points);
    let density = grid.iter().map(|&g| kde.density(g)).collect();
    Ok(DensityGrid1d {
        grid,
        density,
        step,
    })
}

pub fn kde_bivariate(map: &DifferenceMap, cfg: &KdeConfig) -> Result<DensityGrid2d> {
    cfg.validate()?;
    if map.len() < 2 {
        return Err(Error::TooShort {
            what: "kde_bivariate",
            needed: 2,
            got: map.len(),
        });
    }
    let kde = BivariateKde::new(map, cfg)?;
    let xs = map.xs();
    let ys = map.ys();
    let (x, step_x) = padded_axis(&xs, kde.hx, cfg.grid_points);
    let (y, step_y) = padded_axis(&ys, kde.hy, cfg.grid_points);
    let n = xs.len();
    let kx = kernel_table(&x, &xs, kde.hx);
    let ky = kernel_table(&y, &ys, kde.hy);
    let norm = 1.0 / (n as f64 * kde.hx * kde.hy);
    let mut density = vec![0.0; x.len() * y.len()];
    for (r, row) in density.chunks_mut(x.len()).enumerate() {
        let ky_row = &ky[r * n..(r + 1) * n];
        for (c, cell) in row.iter_mut().enumerate() {
            let kx_row = &kx[c * n..(c + 1) * n];
            let s: f64 = ky_row.iter().zip(kx_row).map(|(a, b)| a * b).sum();
            *cell = s * norm;
        }
    }
    Ok(DensityGrid2d {
        x,
        y,
        density,
        step_x,
        step_y,
    })
}

// (sum, sqrt of sum of squares) over values strictly above half the maximum.
fn half_max_sums(values: &[f64]) -> (f64, f64) {
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * peak;
    let (sum, sq) = values
        .iter()
        .filter(|&&v| v > half || v == peak)
        .fold((0.0, 0.0), |(s, q), &v| (s + v, q + v * v));
    (sum, sq.sqrt())
}

/// Area and energy of the cells above half the peak density.
pub fn univariate_kde_features(d: &DensityGrid1d) -> (f64, f64) {
    half_max_sums(&d.density)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateKdeFeatures {
    pub surf_min: f64,
    pub surf_max: f64,
    pub volume: f64,
    pub energy: f64,
}

/// `surf_min`/`surf_max` come from the extent of the map points on both
/// axes; volume and energy from the cells above half the peak density.
pub fn bivariate_kde_features(d: &DensityGrid2d, map: &DifferenceMap) -> BivariateKdeFeatures {
    let (surf_min, surf_max) = map
        .points
        .iter()
        .flat_map(|&(x, y)| [x, y])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let (volume, energy) = half_max_sums(&d.density);
    BivariateKdeFeatures {
        surf_min,
        surf_max,
        volume,
        energy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PafFeatures {
    pub cov_xy: f64,
    pub area_y: f64,
    pub energy_y: f64,
    pub surf_min: f64,
    pub surf_max: f64,
    pub volume_xy: f64,
    pub energy_xy: f64,
}

/// All difference-map features of an RR series in ms. The univariate
/// estimate uses the y axis.
pub fn paf_features(rr: &[f64], cfg: &KdeConfig) -> Result<PafFeatures> {
    let map = difference_map(rr)?;
    let cov_xy = diffmap_covariance(&map)?;
    let uni = kde_univariate(&map.ys(), cfg)?;
    let (area_y, energy_y) = univariate_kde_features(&uni);
    let bi = kde_bivariate(&map, cfg)?;
    let b = bivariate_kde_features(&bi, &map);
    Ok(PafFeatures {
        cov_xy,
        area_y,
        energy_y,
        surf_min: b.surf_min,
        surf_max: b.surf_max,
        volume_xy: b.volume,
        energy_xy: b.energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn normal(rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random_range(1e-12..1.0);
        let v: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    }

    fn random_rr(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| 800.0 + 30.0 * normal(&mut rng)).collect()
    }

    #[test]
    fn difference_map_examples() {
        let m = difference_map(&[800.0, 810.0, 805.0, 820.0]).unwrap();
        assert_eq!(m.points, vec![(10.0, -5.0), (-5.0, 15.0)]);
        let m = difference_map(&[700.0; 6]).unwrap();
        assert!(m.points.iter().all(|&p| p == (0.0, 0.0)));
        assert_eq!(m.len(), 4);
        let m = difference_map(&[700.0, 703.0, 706.0, 709.0]).unwrap();
        assert!(m.points.iter().all(|&p| p == (3.0, 3.0)));
        assert!(difference_map(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn covariance_examples() {
        let map = |pts: &[(f64, f64)]| DifferenceMap {
            points: pts.to_vec(),
        };
        assert_eq!(diffmap_covariance(&map(&[(2.0, 3.0); 4])).unwrap(), 0.0);
        let c = diffmap_covariance(&map(&[(-1.0, -1.0), (0.0, 0.0), (1.0, 1.0)])).unwrap();
        assert_relative_eq!(c, 2.0 / 3.0, epsilon = 1e-15);
        let c = diffmap_covariance(&map(&[(-1.0, 1.0), (0.0, 0.0), (1.0, -1.0)])).unwrap();
        assert_relative_eq!(c, -2.0 / 3.0, epsilon = 1e-15);
        assert!(diffmap_covariance(&map(&[(1.0, 1.0)])).is_err());
    }

    #[test]
    fn covariance_shift_and_scale() {
        let rr = random_rr(1, 100);
        let c = diffmap_covariance(&difference_map(&rr).unwrap()).unwrap();
        let shifted: Vec<f64> = rr.iter().map(|v| v + 123.0).collect();
        let scaled: Vec<f64> = rr.iter().map(|v| 1.5 * v).collect();
        let cs = diffmap_covariance(&difference_map(&shifted).unwrap()).unwrap();
        let ck = diffmap_covariance(&difference_map(&scaled).unwrap()).unwrap();
        assert_relative_eq!(cs, c, max_relative = 1e-9);
        assert_relative_eq!(ck, 2.25 * c, max_relative = 1e-9);
    }

    #[test]
    fn kernel_peak_values() {
        let fixed = KdeConfig {
            bandwidth: Bandwidth::Fixed(1.0),
            ..KdeConfig::default()
        };
        let kde = UnivariateKde::new(&[0.0], &fixed).unwrap();
        assert_relative_eq!(kde.density(0.0), 0.398_942_280_401_432_7, epsilon = 1e-12);
        let kde = UnivariateKde::new(&[-1.0, 1.0], &fixed).unwrap();
        assert_relative_eq!(kde.density(0.0), 0.241_970_724_519_143_37, epsilon = 1e-12);
        let map = DifferenceMap {
            points: vec![(0.0, 0.0)],
        };
        let kde = BivariateKde::new(&map, &fixed).unwrap();
        assert_relative_eq!(
            kde.density(0.0, 0.0),
            0.159_154_943_091_895_35,
            epsilon = 1e-12
        );
        assert!(UnivariateKde::new(&[0.0], &KdeConfig::default()).is_err());
    }

    #[test]
    fn grids_integrate_to_one() {
        for seed in 0..5 {
            let rr = random_rr(seed, 60 + 20 * seed as usize);
            let map = difference_map(&rr).unwrap();
            let cfg = KdeConfig::default();
            let u = kde_univariate(&map.ys(), &cfg).unwrap();
            assert!((u.integral() - 1.0).abs() < 0.02, "{}", u.integral());
            assert!(u.density.iter().all(|&d| d >= 0.0));
            let b = kde_bivariate(&map, &cfg).unwrap();
            assert!((b.integral() - 1.0).abs() < 0.02, "{}", b.integral());
            let (hx, hy) = BivariateKde::new(&map, &cfg).unwrap().bandwidths();
            let bound = 1.0 / (2.0 * PI * hx * hy);
            assert!(b
                .density
                .iter()
                .all(|&d| d >= 0.0 && d <= bound * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn bivariate_grid_matches_direct_evaluation() {
        let map = difference_map(&random_rr(9, 40)).unwrap();
        let cfg = KdeConfig {
            grid_points: 32,
            ..KdeConfig::default()
        };
        let grid = kde_bivariate(&map, &cfg).unwrap();
        let kde = BivariateKde::new(&map, &cfg).unwrap();
        for (r, &y) in grid.y.iter().enumerate() {
            for (c, &x) in grid.x.iter().enumerate() {
                assert_relative_eq!(grid.get(c, r), kde.density(x, y), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn zero_variance_falls_back_to_unit_bandwidth() {
        let u = kde_univariate(&[5.0; 10], &KdeConfig::default()).unwrap();
        assert_relative_eq!(u.step, 6.0 / 255.0, epsilon = 1e-12);
        let map = difference_map(&[800.0; 12]).unwrap();
        let b = kde_bivariate(&map, &KdeConfig::default()).unwrap();
        let f = bivariate_kde_features(&b, &map);
        assert_eq!((f.surf_min, f.surf_max), (0.0, 0.0));
    }

    #[test]
    fn half_max_sums_single_cell() {
        let mut density = vec![0.0; 16];
        density[7] = 0.3;
        let d = DensityGrid1d {
            grid: (0..16).map(f64::from).collect(),
            density: density.clone(),
            step: 1.0,
        };
        assert_eq!(univariate_kde_features(&d), (0.3, 0.3));
        let d2 = DensityGrid2d {
            x: (0..4).map(f64::from).collect(),
            y: (0..4).map(f64::from).collect(),
            density,
            step_x: 1.0,
            step_y: 1.0,
        };
        let map = DifferenceMap {
            points: vec![(-5.5, 2.0), (1.0, 5.5)],
        };
        let f = bivariate_kde_features(&d2, &map);
        assert_eq!((f.volume, f.energy), (0.3, 0.3));
        assert_eq!((f.surf_min, f.surf_max), (-5.5, 5.5));
    }

    #[test]
    fn half_maximum_width_of_a_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples: Vec<f64> = (0..10_000).map(|_| normal(&mut rng)).collect();
        let cfg = KdeConfig::default();
        let d = kde_univariate(&samples, &cfg).unwrap();
        let h = UnivariateKde::new(&samples, &cfg).unwrap().bandwidth();
        let peak = d.density.iter().copied().fold(0.0, f64::max);
        let above: Vec<f64> = d
            .grid
            .iter()
            .zip(&d.density)
            .filter(|(_, &v)| v > 0.5 * peak)
            .map(|(&g, _)| g)
            .collect();
        let half_width = 0.5 * (above[above.len() - 1] - above[0]);
        // a Gaussian KDE of N(0, 1) samples approximates N(0, 1 + h^2)
        let expected = (2.0 * 2f64.ln()).sqrt() * (1.0 + h * h).sqrt();
        assert!(
            (half_width - expected).abs() < 0.05 * expected,
            "{half_width} vs {expected}"
        );
    }

    #[test]
    fn energy_is_bounded_by_area_and_peak() {
        for seed in 0..5 {
            let rr = random_rr(100 + seed, 120);
            let map = difference_map(&rr).unwrap();
            let d = kde_univariate(&map.ys(), &KdeConfig::default()).unwrap();
            let (area, energy) = univariate_kde_features(&d);
            let peak = d.density.iter().copied().fold(0.0, f64::max);
            assert!(energy * energy <= area * peak * (1.0 + 1e-12));
        }
    }

    #[test]
    fn y_axis_area_tracks_x_axis_area() {
        let rr = random_rr(33, 600);
        let map = difference_map(&rr).unwrap();
        let cfg = KdeConfig::default();
        let (ay, _) = univariate_kde_features(&kde_univariate(&map.ys(), &cfg).unwrap());
        let (ax, _) = univariate_kde_features(&kde_univariate(&map.xs(), &cfg).unwrap());
        assert!((ay - ax).abs() < 0.05 * ax, "{ay} vs {ax}");
    }

    #[test]
    fn surf_extent_is_translation_equivariant() {
        let map = difference_map(&random_rr(4, 50)).unwrap();
        let shifted = DifferenceMap {
            points: map
                .points
                .iter()
                .map(|&(x, y)| (x + 2.0, y + 2.0))
                .collect(),
        };
        let cfg = KdeConfig::default();
        let a = bivariate_kde_features(&kde_bivariate(&map, &cfg).unwrap(), &map);
        let b = bivariate_kde_features(&kde_bivariate(&shifted, &cfg).unwrap(), &shifted);
        assert_relative_eq!(b.surf_min, a.surf_min + 2.0, epsilon = 1e-9);
        assert_relative_eq!(b.surf_max, a.surf_max + 2.0, epsilon = 1e-9);
        assert_relative_eq!(a.volume, b.volume, max_relative = 1e-9);
    }

    #[test]
    fn paf_features_are_consistent() {
        let rr = random_rr(8, 300);
        let f = paf_features(&rr, &KdeConfig::default()).unwrap();
        assert!(f.area_y > 0.0 && f.energy_y > 0.0 && f.volume_xy > 0.0 && f.energy_xy > 0.0);
        assert!(f.surf_min <= f.surf_max);
        // successive differences of white noise are negatively correlated
        assert!(f.cov_xy < 0.0);
    }
}
