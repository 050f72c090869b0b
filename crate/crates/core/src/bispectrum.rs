//! Third-order cumulants, the indirect bispectrum estimate and the
//! region-based bispectral features.
//!
//! The bispectrum is evaluated on a `G x G` grid of normalized frequencies
//! `f = i / (2G)` covering `[0, 0.5)` on both axes. Physical bands map to
//! normalized frequency as `Hz / rate_hz`:
//!
//! * LL: both frequencies in LF (0.04-0.15 Hz)
//! * LH: `f1` in HF (0.15-0.4 Hz), `f2` in LF
//! * HH: both frequencies in HF
//! * ROI: the principal triangle `0 <= f2 <= f1`, `f1 + f2 <= 0.5`
//!
//! All four regions are restricted to the principal triangle, so LL, LH and
//! HH are disjoint subsets of ROI.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::fft::fft2_in_place;
use crate::stats::mean;
use crate::time_freq::{HF_BAND, LF_BAND};
use crate::{Error, Result};

/// Biased third-moment estimate `R(m, n)` for lags in `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantGrid {
    max_lag: usize,
    values: Vec<f64>,
}

impl CumulantGrid {
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    fn side(&self) -> usize {
        2 * self.max_lag + 1
    }

    pub fn get(&self, m: isize, n: isize) -> f64 {
        let l = self.max_lag as isize;
        assert!(m.abs() <= l && n.abs() <= l, "lag out of range");
        self.values[(m + l) as usize * self.side() + (n + l) as usize]
    }
}

/// `R(m, n) = (1/N) sum_k x(k) x(k+m) x(k+n)` on the mean-removed signal,
/// summing only over indices that stay inside the record.
pub fn third_order_cumulant(x: &[f64], max_lag: usize) -> Result<CumulantGrid> {
    if x.len() <= 2 * max_lag {
        return Err(Error::TooShort {
            what: "third_order_cumulant",
            needed: 2 * max_lag + 1,
            got: x.len(),
        });
    }
    let mu = mean(x);
    let z: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let n_len = z.len() as isize;
    let l = max_lag as isize;
    let side = 2 * max_lag + 1;
    let mut values = vec![0.0; side * side];
    for m in -l..=l {
        for n in m..=l {
            let k_lo = 0.max(-m).max(-n);
            let k_hi = n_len.min(n_len - m).min(n_len - n);
            let mut acc = 0.0;
            for k in k_lo..k_hi {
                acc += z[k as usize] * z[(k + m) as usize] * z[(k + n) as usize];
            }
            let r = acc / n_len as f64;
            values[(m + l) as usize * side + (n + l) as usize] = r;
            values[(n + l) as usize * side + (m + l) as usize] = r;
        }
    }
    Ok(CumulantGrid { max_lag, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BispectrumConfig {
    pub max_lag: usize,
    pub grid_size: usize,
}

impl Default for BispectrumConfig {
    fn default() -> Self {
        Self {
            max_lag: 64,
            grid_size: 256,
        }
    }
}

/// Complex bispectrum on `[0, 0.5)^2`, row index `f1`, column index `f2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BispectrumGrid {
    size: usize,
    values: Vec<Complex64>,
}

impl BispectrumGrid {
    pub fn from_values(size: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != size * size || size == 0 {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: size * size,
            });
        }
        Ok(Self { size, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn grid_step(&self) -> f64 {
        0.5 / self.size as f64
    }

    /// Normalized frequency of grid index `i`.
    pub fn freq(&self, i: usize) -> f64 {
        i as f64 * self.grid_step()
    }

    pub fn get(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.size + i2]
    }

    pub fn magnitude(&self, i1: usize, i2: usize) -> f64 {
        self.get(i1, i2).norm()
    }
}

/// Indirect estimate: 2-D DFT of the cumulant over lags `[-L, L]^2`
/// (uniform lag window).
pub fn estimate_bispectrum(x: &[f64], cfg: &BispectrumConfig) -> Result<BispectrumGrid> {
    let g = cfg.grid_size;
    if g < 2 * cfg.max_lag + 1 {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            reason: "must be at least 2 * max_lag + 1".to_string(),
        });
    }
    let cumulant = third_order_cumulant(x, cfg.max_lag)?;
    let nfft = 2 * g;
    let mut plane = vec![Complex64::new(0.0, 0.0); nfft * nfft];
    let l = cfg.max_lag as isize;
    let wrap = |k: isize| (k.rem_euclid(nfft as isize)) as usize;
    for m in -l..=l {
        for n in -l..=l {
            plane[wrap(m) * nfft + wrap(n)] = Complex64::new(cumulant.get(m, n), 0.0);
        }
    }
    fft2_in_place(&mut plane, nfft, nfft);
    let mut values = Vec::with_capacity(g * g);
    for row in plane.chunks_exact(nfft).take(g) {
        values.extend_from_slice(&row[..g]);
    }
    Ok(BispectrumGrid { size: g, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionId {
    Ll,
    Lh,
    Hh,
    Roi,
}

impl RegionId {
    pub const ALL: [RegionId; 4] = [RegionId::Ll, RegionId::Lh, RegionId::Hh, RegionId::Roi];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionId::Ll => "ll",
            RegionId::Lh => "lh",
            RegionId::Hh => "hh",
            RegionId::Roi => "roi",
        }
    }

    pub fn has_diagonal(self) -> bool {
        self != RegionId::Lh
    }

    /// Membership of the normalized frequency pair `(f1, f2)`.
    pub fn contains(self, f1: f64, f2: f64, rate_hz: f64) -> bool {
        if !(f2 <= f1 && f1 + f2 <= 0.5 && f2 >= 0.0) {
            return false;
        }
        let in_band = |f: f64, band: (f64, f64)| f >= band.0 / rate_hz && f < band.1 / rate_hz;
        match self {
            RegionId::Ll => in_band(f1, LF_BAND) && in_band(f2, LF_BAND),
            RegionId::Lh => in_band(f1, HF_BAND) && in_band(f2, LF_BAND),
            RegionId::Hh => in_band(f1, HF_BAND) && in_band(f2, HF_BAND),
            RegionId::Roi => true,
        }
    }
}

/// Grid cells `(i1, i2)` of a region, row-major order.
pub fn region_cells(grid: &BispectrumGrid, region: RegionId, rate_hz: f64) -> Vec<(usize, usize)> {
    let g = grid.size();
    let mut cells = Vec::new();
    for i1 in 0..g {
        for i2 in 0..=i1 {
            if region.contains(grid.freq(i1), grid.freq(i2), rate_hz) {
                cells.push((i1, i2));
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionFeatures {
    pub m_avg: f64,
    pub p_avg: f64,
    pub e_nb: f64,
    pub e_snb: f64,
    pub l_m: f64,
    /// Absent for LH, which has no diagonal cells.
    pub l_dm: Option<f64>,
    pub wcob_i: f64,
    pub wcob_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BispectrumFeatures {
    pub ll: RegionFeatures,
    pub lh: RegionFeatures,
    pub hh: RegionFeatures,
    pub roi: RegionFeatures,
}

impl BispectrumFeatures {
    pub fn region(&self, id: RegionId) -> &RegionFeatures {
        match id {
            RegionId::Ll => &self.ll,
            RegionId::Lh => &self.lh,
            RegionId::Hh => &self.hh,
            RegionId::Roi => &self.roi,
        }
    }
}

fn shannon(weights: impl Iterator<Item = f64> + Clone) -> f64 {
    let total: f64 = weights.clone().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -weights
        .filter(|&w| w > 0.0)
        .map(|w| {
            let p = w / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Features of one region from its cell list.
pub fn region_features(
    grid: &BispectrumGrid,
    cells: &[(usize, usize)],
    region: RegionId,
) -> Result<RegionFeatures> {
    if cells.is_empty() {
        return Err(Error::EmptyRegion(region));
    }
    let mags: Vec<f64> = cells.iter().map(|&(i, j)| grid.magnitude(i, j)).collect();
    let count = mags.len() as f64;
    let sum: f64 = mags.iter().sum();
    let peak = mags.iter().copied().fold(0.0, f64::max);
    let floor = if peak > 0.0 {
        1e-12 * peak
    } else {
        f64::MIN_POSITIVE
    };
    let log_mag = |m: f64| m.max(floor).ln();

    let l_m = mags.iter().map(|&m| log_mag(m)).sum();
    let l_dm = region.has_diagonal().then(|| {
        cells
            .iter()
            .zip(&mags)
            .filter(|((i, j), _)| i == j)
            .map(|(_, &m)| log_mag(m))
            .sum()
    });

    let (wcob_i, wcob_j) = if sum > 0.0 {
        let (si, sj) = cells
            .iter()
            .zip(&mags)
            .fold((0.0, 0.0), |(a, b), (&(i, j), &m)| {
                (a + grid.freq(i) * m, b + grid.freq(j) * m)
            });
        (si / sum, sj / sum)
    } else {
        let (si, sj) = cells.iter().fold((0.0, 0.0), |(a, b), &(i, j)| {
            (a + grid.freq(i), b + grid.freq(j))
        });
        (si / count, sj / count)
    };

    Ok(RegionFeatures {
        m_avg: sum / count,
        p_avg: mags.iter().map(|m| m * m).sum::<f64>() / count,
        e_nb: shannon(mags.iter().copied()),
        e_snb: shannon(mags.iter().map(|m| m * m)),
        l_m,
        l_dm,
        wcob_i,
        wcob_j,
    })
}

pub fn bispectral_features(grid: &BispectrumGrid, rate_hz: f64) -> Result<BispectrumFeatures> {
    let compute = |id| region_features(grid, &region_cells(grid, id, rate_hz), id);
    Ok(BispectrumFeatures {
        ll: compute(RegionId::Ll)?,
        lh: compute(RegionId::Lh)?,
        hh: compute(RegionId::Hh)?,
        roi: compute(RegionId::Roi)?,
    })
}
