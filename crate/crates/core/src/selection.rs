//! Feature matrix, Student's t prefilter, histogram mutual information,
//! mRMR ranking and the first-local-maximum feature-count rule.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::classify::{cross_validate, ClassifierConfig, CvScheme};
use crate::special::student_t_two_tailed;
use crate::stats::{mean, min_max, sample_variance};
use crate::{Error, Result};

/// Records by named features, with a binary label and patient id per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    data: Vec<f64>,
    labels: Vec<bool>,
    patient_ids: Vec<String>,
    record_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<bool>,
        patient_ids: Vec<String>,
        record_ids: Vec<String>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateFeature(n.clone()));
            }
        }
        for len in [labels.len(), patient_ids.len(), record_ids.len()] {
            if len != rows.len() {
                return Err(Error::LengthMismatch {
                    left: rows.len(),
                    right: len,
                });
            }
        }
        let mut data = Vec::with_capacity(rows.len() * names.len());
        for row in &rows {
            if row.len() != names.len() {
                return Err(Error::LengthMismatch {
                    left: names.len(),
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            names,
            data,
            labels,
            patient_ids,
            record_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn patient_ids(&self) -> &[String] {
        &self.patient_ids
    }

    pub fn record_ids(&self) -> &[String] {
        &self.record_ids
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[row * c..(row + 1) * c]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.column_index(n.as_ref()))
            .collect()
    }

    /// The rows restricted to `cols`, in that order.
    pub fn rows_with(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&r| cols.iter().map(|&c| self.get(r, c)).collect())
            .collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let all: Vec<usize> = (0..self.n_rows()).collect();
        FeatureMatrix {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            data: self.rows_with(&all, cols).concat(),
            labels: self.labels.clone(),
            patient_ids: self.patient_ids.clone(),
            record_ids: self.record_ids.clone(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: self.names.clone(),
            data: rows
                .iter()
                .flat_map(|&r| self.row(r).iter().copied())
                .collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            patient_ids: rows.iter().map(|&r| self.patient_ids[r].clone()).collect(),
            record_ids: rows.iter().map(|&r| self.record_ids[r].clone()).collect(),
        }
    }

    /// Replaces NaN and infinite entries with the mean of the finite values
    /// in their column (0 when none are finite). Returns the number replaced.
    pub fn sanitize(&mut self) -> usize {
        let (rows, cols) = (self.n_rows(), self.n_cols());
        let mut replaced = 0;
        for c in 0..cols {
            let finite: Vec<f64> = (0..rows)
                .map(|r| self.data[r * cols + c])
                .filter(|v| v.is_finite())
                .collect();
            if finite.len() == rows {
                continue;
            }
            let fill = if finite.is_empty() {
                0.0
            } else {
                mean(&finite)
            };
            for r in 0..rows {
                let v = &mut self.data[r * cols + c];
                if !v.is_finite() {
                    *v = fill;
                    replaced += 1;
                }
            }
            log::warn!(
                "feature `{}`: {} non-finite values replaced by {fill}",
                self.names[c],
                rows - finite.len()
            );
        }
        replaced
    }

    fn class_split(&self, col: usize) -> (Vec<f64>, Vec<f64>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in 0..self.n_rows() {
            if self.labels[r] {
                pos.push(self.get(r, col));
            } else {
                neg.push(self.get(r, col));
            }
        }
        (pos, neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub p: f64,
}

/// Pooled-variance two-sample t-test with a two-tailed p-value.
pub fn students_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::TooShort {
                what: "students_t_test",
                needed: 2,
                got: s.len(),
            });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / df;
    let diff = mean(a) - mean(b);
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            TTestResult { t: 0.0, p: 1.0 }
        } else {
            TTestResult {
                t: diff.signum() * f64::INFINITY,
                p: 0.0,
            }
        });
    }
    let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TTestResult {
        t,
        p: student_t_two_tailed(t, df),
    })
}

pub const DEFAULT_T_ALPHA: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFilterOutcome {
    pub matrix: FeatureMatrix,
    pub removed: Vec<String>,
    /// Test result for every input column, in input order.
    pub tests: Vec<(String, TTestResult)>,
}

/// Keeps the columns whose positive-vs-negative t-test has `p <= alpha`.
pub fn t_filter(x: &FeatureMatrix, alpha: f64) -> Result<TFilterOutcome> {
    let mut keep = Vec::new();
    let mut removed = Vec::new();
    let mut tests = Vec::new();
    for c in 0..x.n_cols() {
        let (pos, neg) = x.class_split(c);
        if pos.is_empty() || neg.is_empty() {
            return Err(Error::SingleClass);
        }
        let res = students_t_test(&pos, &neg)?;
        if res.p <= alpha {
            keep.push(c);
        } else {
            removed.push(x.names[c].clone());
        }
        tests.push((x.names[c].clone(), res));
    }
    if keep.is_empty() {
        return Err(Error::AllFeaturesRemoved { alpha });
    }
    Ok(TFilterOutcome {
        matrix: x.select_columns(&keep),
        removed,
        tests,
    })
}

pub const DEFAULT_MI_BINS: usize = 8;

/// Equal-width bin index over `[min, max]`; a constant input maps to bin 0.
pub fn discretize(x: &[f64], bins: usize) -> Vec<usize> {
    if x.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = min_max(x);
    if hi == lo {
        return vec![0; x.len()];
    }
    let width = (hi - lo) / bins as f64;
    x.iter()
        .map(|v| (((v - lo) / width).floor() as usize).min(bins - 1))
        .collect()
}

/// Plug-in mutual information (nats) of two discrete codings.
pub fn mutual_information_codes(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySeries);
    }
    let na = a.iter().max().map_or(0, |m| m + 1);
    let nb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0usize; na * nb];
    let mut pa = vec![0usize; na];
    let mut pb = vec![0usize; nb];
    for (&i, &j) in a.iter().zip(b) {
        joint[i * nb + j] += 1;
        pa[i] += 1;
        pb[j] += 1;
    }
    let n = a.len() as f64;
    let mut mi = 0.0;
    for i in 0..na {
        for j in 0..nb {
            let c = joint[i * nb + j];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (pa[i] as f64 * pb[j] as f64)).ln();
            }
        }
    }
    Ok(mi)
}

fn check_mi_lengths(left: usize, right: usize, bins: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    if bins < 2 {
        return Err(Error::InvalidParameter {
            name: "bins",
            reason: "must be at least 2".to_string(),
        });
    }
    if left < bins {
        return Err(Error::TooShort {
            what: "mutual_information",
            needed: bins,
            got: left,
        });
    }
    Ok(())
}

/// Mutual information of two continuous samples, each discretized into
/// `bins` equal-width bins.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    check_mi_lengths(x.len(), y.len(), bins)?;
    mutual_information_codes(&discretize(x, bins), &discretize(y, bins))
}

/// Mutual information between a continuous sample and binary labels.
pub fn label_mutual_information(x: &[f64], labels: &[bool], bins: usize) -> Result<f64> {
    check_mi_lengths(x.len(), labels.len(), bins)?;
    let codes: Vec<usize> = labels.iter().map(|&l| usize::from(l)).collect();
    mutual_information_codes(&discretize(x, bins), &codes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures {
    pub names: Vec<String>,
    /// Objective value at the moment each feature was picked.
    pub scores: Vec<f64>,
    pub method: String,
}

impl RankedFeatures {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn top(&self, k: usize) -> &[String] {
        &self.names[..k.min(self.names.len())]
    }
}

/// Objective differences at or below this count as ties.
pub const MRMR_TIE_TOL: f64 = 1e-12;

/// Greedy mRMR in difference form: relevance to the label minus mean mutual
/// information with the already selected features. Ties within
/// [`MRMR_TIE_TOL`] go to the earlier column.
pub fn mrmr_rank(x: &FeatureMatrix, bins: usize) -> Result<RankedFeatures> {
    let d = x.n_cols();
    if d < 2 {
        return Err(Error::TooShort {
            what: "mrmr_rank",
            needed: 2,
            got: d,
        });
    }
    if !x.labels.iter().any(|&l| l) || x.labels.iter().all(|&l| l) {
        return Err(Error::SingleClass);
    }
    check_mi_lengths(x.n_rows(), x.n_rows(), bins)?;
    let codes: Vec<Vec<usize>> = (0..d).map(|c| discretize(&x.column(c), bins)).collect();
    let label_codes: Vec<usize> = x.labels.iter().map(|&l| usize::from(l)).collect();
    let relevance = codes
        .iter()
        .map(|c| mutual_information_codes(c, &label_codes))
        .collect::<Result<Vec<f64>>>()?;

    let mut redundancy = vec![0.0; d];
    let mut chosen = vec![false; d];
    let mut names = Vec::with_capacity(d);
    let mut scores = Vec::with_capacity(d);
    for step in 0..d {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..d).filter(|&c| !chosen[c]) {
            let phi = if step == 0 {
                relevance[c]
            } else {
                relevance[c] - redundancy[c] / step as f64
            };
            if best.map_or(true, |(_, b)| phi > b + MRMR_TIE_TOL) {
                best = Some((c, phi));
            }
        }
        let (pick, phi) = best.expect("unchosen column remains");
        chosen[pick] = true;
        names.push(x.names[pick].clone());
        scores.push(phi);
        for c in (0..d).filter(|&c| !chosen[c]) {
            redundancy[c] += mutual_information_codes(&codes[c], &codes[pick])?;
        }
    }
    Ok(RankedFeatures {
        names,
        scores,
        method: "mrmr-mid".to_string(),
    })
}

/// 1-based index of the first local maximum of an accuracy curve.
///
/// A plateau counts from its first index, and qualifies when entered from
/// below (or at the start) and left by a strict drop. A curve without such a
/// peak returns its last index.
pub fn first_local_max(acc: &[f64]) -> usize {
    let n = acc.len();
    let mut k = 0;
    while k < n {
        let mut end = k;
        while end + 1 < n && acc[end + 1] == acc[k] {
            end += 1;
        }
        let rises = k == 0 || acc[k] > acc[k - 1];
        let drops = end + 1 < n && acc[end + 1] < acc[k];
        if rises && drops {
            return k + 1;
        }
        k = end + 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub k: usize,
    /// Cross-validated accuracy using the top `i + 1` features.
    pub accuracies: Vec<f64>,
}

/// Evaluates the top-k prefixes of `ranked` for k = 1..=max_k and applies
/// [`first_local_max`] to the accuracy curve.
pub fn threshold_determination(
    ranked: &RankedFeatures,
    x: &FeatureMatrix,
    classifier: &ClassifierConfig,
    scheme: &CvScheme,
    max_k: usize,
) -> Result<ThresholdResult> {
    let accuracies = accuracy_curve(ranked, x, classifier, scheme, max_k)?;
    Ok(ThresholdResult {
        k: first_local_max(&accuracies),
        accuracies,
    })
}

pub fn accuracy_curve(
    ranked: &RankedFeatures,
    x: &FeatureMatrix,
    classifier: &ClassifierConfig,
    scheme: &CvScheme,
    max_k: usize,
) -> Result<Vec<f64>> {
    if ranked.is_empty() {
        return Err(Error::EmptySeries);
    }
    let order = x.indices_of(&ranked.names)?;
    let max_k = max_k.clamp(1, order.len());
    (1..=max_k)
        .map(|k| Ok(cross_validate(x, scheme, classifier, &order[..k])?.acc))
        .collect()
}
