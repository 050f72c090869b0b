//! Named feature registries for the two prediction tasks and per-record
//! feature extraction.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bispectrum::{bispectral_features, estimate_bispectrum, BispectrumConfig, RegionId};
use crate::nonlinear::{
    distribution_entropies, hjorth_parameters, poincare_features, sample_entropy, EntropyConfig,
};
use crate::paf::{paf_features, KdeConfig};
use crate::time_freq::{
    band_power_features, time_domain_features, welch_psd, WelchConfig, DEFAULT_HRV_TRI_BIN,
};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Ventricular tachyarrhythmia onset against control records.
    VtVf,
    /// Paroxysmal atrial fibrillation onset against normal records.
    Paf,
}

pub const VT_VF_FEATURES: [&str; 50] = [
    "mean_nn",
    "sdnn",
    "rmssd",
    "nn50",
    "pnn50",
    "hrv_tri",
    "psd_vlf",
    "psd_lf",
    "psd_hf",
    "lf_hf_ratio",
    "mavg_ll",
    "mavg_lh",
    "mavg_hh",
    "mavg_roi",
    "pavg_ll",
    "pavg_lh",
    "pavg_hh",
    "pavg_roi",
    "enb_ll",
    "enb_lh",
    "enb_hh",
    "enb_roi",
    "esnb_ll",
    "esnb_lh",
    "esnb_hh",
    "esnb_roi",
    "lm_ll",
    "lm_lh",
    "lm_hh",
    "lm_roi",
    "ldm_ll",
    "ldm_hh",
    "ldm_roi",
    "wcob_i_ll",
    "wcob_i_lh",
    "wcob_i_hh",
    "wcob_i_roi",
    "wcob_j_ll",
    "wcob_j_lh",
    "wcob_j_hh",
    "wcob_j_roi",
    "sd1",
    "sd2",
    "sd1_sd2",
    "samp_en",
    "renyi_en",
    "tsallis_en",
    "hjorth_activity",
    "hjorth_mobility",
    "hjorth_complexity",
];

pub const PAF_FEATURES: [&str; 36] = [
    "mean_nn",
    "sdnn",
    "nn50",
    "pnn50",
    "psd_vlf",
    "psd_lf",
    "psd_hf",
    "lf_hf_ratio",
    "mavg_ll",
    "mavg_lh",
    "mavg_hh",
    "mavg_roi",
    "pavg_ll",
    "pavg_lh",
    "pavg_hh",
    "pavg_roi",
    "lm_ll",
    "lm_lh",
    "lm_hh",
    "lm_roi",
    "ldm_ll",
    "ldm_hh",
    "ldm_roi",
    "sd1",
    "sd2",
    "sd1_sd2",
    "samp_en",
    "renyi_en",
    "tsallis_en",
    "cov_xy",
    "area_y",
    "energy_y",
    "surf_min",
    "surf_max",
    "volume_xy",
    "energy_xy",
];

impl Task {
    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            Task::VtVf => &VT_VF_FEATURES,
            Task::Paf => &PAF_FEATURES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub hrv_tri_bin: f64,
    pub welch: WelchConfig,
    pub bispectrum: BispectrumConfig,
    pub entropy: EntropyConfig,
    pub kde: KdeConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            hrv_tri_bin: DEFAULT_HRV_TRI_BIN,
            welch: WelchConfig::default(),
            bispectrum: BispectrumConfig::default(),
            entropy: EntropyConfig::default(),
            kde: KdeConfig::default(),
        }
    }
}

fn ldm(features: &crate::bispectrum::RegionFeatures) -> f64 {
    features.l_dm.unwrap_or(0.0)
}

/// The ventricular feature vector in [`VT_VF_FEATURES`] order, computed
/// entirely on a uniformly resampled heart-rate signal.
pub fn vt_vf_features(signal: &[f64], rate_hz: f64, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let time = time_domain_features(signal, cfg.hrv_tri_bin)?;
    let bands = band_power_features(&welch_psd(signal, rate_hz, &cfg.welch)?)?;
    let bis = bispectral_features(&estimate_bispectrum(signal, &cfg.bispectrum)?, rate_hz)?;
    let poincare = poincare_features(signal)?;
    let samp = sample_entropy(signal, &cfg.entropy)?;
    let (renyi, tsallis) = distribution_entropies(signal, &cfg.entropy)?;
    let hjorth = hjorth_parameters(signal)?;

    let mut out = Vec::with_capacity(VT_VF_FEATURES.len());
    out.extend([
        time.mean_nn,
        time.sdnn,
        time.rmssd,
        time.nn50 as f64,
        time.pnn50,
        time.hrv_tri,
        bands.p_vlf,
        bands.p_lf,
        bands.p_hf,
        bands.lf_hf_ratio,
    ]);
    let regions = RegionId::ALL.map(|r| *bis.region(r));
    out.extend(regions.iter().map(|r| r.m_avg));
    out.extend(regions.iter().map(|r| r.p_avg));
    out.extend(regions.iter().map(|r| r.e_nb));
    out.extend(regions.iter().map(|r| r.e_snb));
    out.extend(regions.iter().map(|r| r.l_m));
    out.extend([
        ldm(bis.region(RegionId::Ll)),
        ldm(bis.region(RegionId::Hh)),
        ldm(bis.region(RegionId::Roi)),
    ]);
    out.extend(regions.iter().map(|r| r.wcob_i));
    out.extend(regions.iter().map(|r| r.wcob_j));
    out.extend([
        poincare.sd1,
        poincare.sd2,
        poincare.ratio,
        samp.value,
        renyi,
        tsallis,
        hjorth.activity,
        hjorth.mobility,
        hjorth.complexity,
    ]);
    debug_assert_eq!(out.len(), VT_VF_FEATURES.len());
    Ok(out)
}

/// The atrial feature vector in [`PAF_FEATURES`] order.
///
/// Time-domain, Poincaré and difference-map features use the cleaned RR
/// intervals in ms; spectral, bispectral and entropy features use the
/// uniformly resampled heart-rate signal.
pub fn paf_feature_vector(
    rr_ms: &[f64],
    signal: &[f64],
    rate_hz: f64,
    cfg: &FeatureConfig,
) -> Result<Vec<f64>> {
    let time = time_domain_features(rr_ms, cfg.hrv_tri_bin)?;
    let bands = band_power_features(&welch_psd(signal, rate_hz, &cfg.welch)?)?;
    let bis = bispectral_features(&estimate_bispectrum(signal, &cfg.bispectrum)?, rate_hz)?;
    let poincare = poincare_features(rr_ms)?;
    let samp = sample_entropy(signal, &cfg.entropy)?;
    let (renyi, tsallis) = distribution_entropies(signal, &cfg.entropy)?;
    let diff = paf_features(rr_ms, &cfg.kde)?;

    let mut out = Vec::with_capacity(PAF_FEATURES.len());
    out.extend([
        time.mean_nn,
        time.sdnn,
        time.nn50 as f64,
        time.pnn50,
        bands.p_vlf,
        bands.p_lf,
        bands.p_hf,
        bands.lf_hf_ratio,
    ]);
    let regions = RegionId::ALL.map(|r| *bis.region(r));
    out.extend(regions.iter().map(|r| r.m_avg));
    out.extend(regions.iter().map(|r| r.p_avg));
    out.extend(regions.iter().map(|r| r.l_m));
    out.extend([
        ldm(bis.region(RegionId::Ll)),
        ldm(bis.region(RegionId::Hh)),
        ldm(bis.region(RegionId::Roi)),
    ]);
    out.extend([
        poincare.sd1,
        poincare.sd2,
        poincare.ratio,
        samp.value,
        renyi,
        tsallis,
        diff.cov_xy,
        diff.area_y,
        diff.energy_y,
        diff.surf_min,
        diff.surf_max,
        diff.volume_xy,
        diff.energy_xy,
    ]);
    debug_assert_eq!(out.len(), PAF_FEATURES.len());
    Ok(out)
}
