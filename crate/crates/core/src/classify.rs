//! Classifiers (k-NN, SMO-trained SVM, random forest), confusion metrics,
//! ROC analysis and patient-grouped cross-validation.
//!
//! Every score follows the same direction: higher means more likely positive.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::selection::FeatureMatrix;
use crate::{Error, Result};

/// Per-column z-scoring fitted on training rows. Zero-SD columns are only
/// centred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptySeries)?;
        let d = first.len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut sds = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in sds.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        sds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Ok(Self { means, sds })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { v - m })
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Manhattan,
    Euclidean,
    Chebyshev,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let gaps = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::Manhattan => gaps.sum(),
            Metric::Euclidean => gaps.map(|g| g * g).sum::<f64>().sqrt(),
            Metric::Chebyshev => gaps.fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierConfig {
    Knn {
        k: usize,
        metric: Metric,
    },
    /// Inputs are divided by `scale` before the kernel is applied.
    Svm {
        c: f64,
        kernel: KernelKind,
        scale: f64,
    },
    Rf {
        n_trees: usize,
        min_leaf: usize,
        seed: u64,
    },
    Constant {
        positive: bool,
    },
}

impl ClassifierConfig {
    pub fn knn() -> Self {
        Self::Knn {
            k: 5,
            metric: Metric::Chebyshev,
        }
    }

    pub fn svm_linear() -> Self {
        Self::Svm {
            c: 1.6,
            kernel: KernelKind::Linear,
            scale: 1.0,
        }
    }

    pub fn svm_gaussian(scale: f64) -> Self {
        Self::Svm {
            c: 2.0,
            kernel: KernelKind::Gaussian,
            scale,
        }
    }

    pub fn random_forest(seed: u64) -> Self {
        Self::Rf {
            n_trees: 64,
            min_leaf: 4,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub positive: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    k: usize,
    metric: Metric,
}

impl KnnModel {
    /// Nearest-first training row indices; equal distances keep row order.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut order: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (self.metric.distance(r, query), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order.into_iter().take(self.k).map(|(_, i)| i).collect()
    }

    /// Majority vote; a tied vote goes to the positive class.
    pub fn predict(&self, query: &[f64]) -> Prediction {
        let votes = self
            .neighbours(query)
            .into_iter()
            .filter(|&i| self.labels[i])
            .count();
        Prediction {
            positive: 2 * votes >= self.k,
            score: votes as f64 / self.k as f64,
        }
    }
}

pub fn knn_fit(rows: &[Vec<f64>], labels: &[bool], k: usize, metric: Metric) -> Result<KnnModel> {
    check_training(rows, labels)?;
    if k == 0 || k > rows.len() {
        return Err(Error::NeighboursExceedRows {
            k,
            rows: rows.len(),
        });
    }
    Ok(KnnModel {
        rows: rows.to_vec(),
        labels: labels.to_vec(),
        k,
        metric,
    })
}

fn check_training(rows: &[Vec<f64>], labels: &[bool]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptySeries);
    }
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    Ok(())
}

pub const SMO_TOLERANCE: f64 = 1e-3;
pub const SMO_MAX_ITER: usize = 100_000;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    coef: Vec<f64>,
    rho: f64,
    kernel: KernelKind,
    scale: f64,
    pub c: f64,
    /// Final maximal KKT violation.
    pub kkt_gap: f64,
    pub iterations: usize,
}

impl SvmModel {
    fn kernel_value(&self, a: &[f64], b: &[f64]) -> f64 {
        kernel(self.kernel, a, b)
    }

    fn scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v / self.scale).collect()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        let x = self.scaled(x);
        let sum: f64 = self
            .support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * self.kernel_value(s, &x))
            .sum();
        sum - self.rho
    }

    /// Primal weights and bias for a linear kernel, in the scaled space.
    pub fn linear_weights(&self) -> Option<(Vec<f64>, f64)> {
        if self.kernel != KernelKind::Linear {
            return None;
        }
        let d = self.support.first().map_or(0, Vec::len);
        let mut w = vec![0.0; d];
        for (s, c) in self.support.iter().zip(&self.coef) {
            for (wi, si) in w.iter_mut().zip(s) {
                *wi += c * si;
            }
        }
        Some((w, -self.rho))
    }

    /// Label is the sign of the decision value; zero counts as positive.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let f = self.decision(x);
        Prediction {
            positive: f >= 0.0,
            score: f,
        }
    }
}

fn kernel(kind: KernelKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        KernelKind::Gaussian => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-d2).exp()
        }
    }
}

/// Soft-margin SVM dual solved by SMO with maximal-violating-pair working
/// set selection.
pub fn svm_train(
    rows: &[Vec<f64>],
    labels: &[bool],
    c: f64,
    kind: KernelKind,
    scale: f64,
) -> Result<SvmModel> {
    check_training(rows, labels)?;
    if !(c > 0.0) || !(scale > 0.0) {
        return Err(Error::InvalidParameter {
            name: "svm",
            reason: "C and kernel scale must be positive".to_string(),
        });
    }
    if labels.iter().all(|&l| l) || !labels.iter().any(|&l| l) {
        return Err(Error::SingleClass);
    }
    let n = rows.len();
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|v| v / scale).collect())
        .collect();
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = y[i] * y[j] * kernel(kind, &x[i], &x[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut gap;
    loop {
        // i maximizes -y G over I_up, j minimizes it over I_low
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        let mut i_sel = usize::MAX;
        let mut j_sel = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            if up && v > g_max {
                g_max = v;
                i_sel = t;
            }
            if low && v < g_min {
                g_min = v;
                j_sel = t;
            }
        }
        gap = g_max - g_min;
        if gap < SMO_TOLERANCE || iterations >= SMO_MAX_ITER {
            break;
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qi, qj) = (&q[i * n..(i + 1) * n], &q[j * n..(j + 1) * n]);
        if y[i] != y[j] {
            let mut quad = qi[i] + qj[j] + 2.0 * qi[j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qi[i] + qj[j] - 2.0 * qi[j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }
    if iterations >= SMO_MAX_ITER {
        log::warn!("svm_train: stopped after {SMO_MAX_ITER} iterations with KKT gap {gap}");
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    let mut support = Vec::new();
    let mut coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support.push(x[t].clone());
            coef.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support,
        coef,
        rho,
        kernel: kind,
        scale,
        c,
        kkt_gap: gap,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        positive: bool,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { positive } => return positive,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub seed: u64,
}

impl ForestModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Majority of tree votes, a tie going to the positive class; the score
    /// is the positive-vote fraction.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let votes = self.trees.iter().filter(|t| t.predict(x)).count();
        Prediction {
            positive: 2 * votes >= self.trees.len(),
            score: votes as f64 / self.trees.len() as f64,
        }
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    min_leaf: usize,
    mtry: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        self.nodes.push(Node::Leaf {
            positive: 2 * pos >= idx.len(),
        });
        self.nodes.len() - 1
    }

    // Best (weighted Gini, feature, threshold) among the candidate features.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let d = self.rows[0].len();
        let candidates = index::sample(rng, d, self.mtry.min(d));
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, bool)> = Vec::with_capacity(n);
        for f in candidates.iter() {
            sorted.clear();
            sorted.extend(idx.iter().map(|&i| (self.rows[i][f], self.labels[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for s in 1..n {
                left_pos += usize::from(sorted[s - 1].1);
                if s < self.min_leaf || n - s < self.min_leaf || sorted[s - 1].0 == sorted[s].0 {
                    continue;
                }
                let score = (s as f64 * gini(left_pos, s)
                    + (n - s) as f64 * gini(total_pos - left_pos, n - s))
                    / n as f64;
                if best.map_or(true, |(b, _, _)| score < b) {
                    let threshold = 0.5 * (sorted[s - 1].0 + sorted[s].0);
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        if pos == 0 || pos == idx.len() || idx.len() < 2 * self.min_leaf {
            return self.leaf(idx);
        }
        let Some((feature, threshold)) = self.best_split(idx, rng) else {
            return self.leaf(idx);
        };
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { positive: false });
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][feature] <= threshold);
        let left = self.grow(&l, rng);
        let right = self.grow(&r, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

/// Bagged Gini trees with `floor(sqrt(d))` candidate features per node.
/// Tree `t` draws from a ChaCha8 stream `t` of the given seed.
pub fn rf_train(
    rows: &[Vec<f64>],
    labels: &[bool],
    n_trees: usize,
    min_leaf: usize,
    seed: u64,
) -> Result<ForestModel> {
    check_training(rows, labels)?;
    if n_trees == 0 || min_leaf == 0 {
        return Err(Error::InvalidParameter {
            name: "rf",
            reason: "n_trees and min_leaf must be positive".to_string(),
        });
    }
    if rows.len() < 2 * min_leaf {
        return Err(Error::TooShort {
            what: "rf_train",
            needed: 2 * min_leaf,
            got: rows.len(),
        });
    }
    let n = rows.len();
    let d = rows[0].len();
    let mtry = ((d as f64).sqrt().floor() as usize).max(1);
    let trees = (0..n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut builder = TreeBuilder {
                rows,
                labels,
                min_leaf,
                mtry,
                nodes: Vec::new(),
            };
            builder.grow(&sample, &mut rng);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();
    Ok(ForestModel { trees, seed })
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Knn(KnnModel),
    Svm(SvmModel),
    Rf(ForestModel),
    Constant(bool),
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Prediction {
        match self {
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Rf(m) => m.predict(x),
            TrainedModel::Constant(p) => Prediction {
                positive: *p,
                score: if *p { 1.0 } else { 0.0 },
            },
        }
    }
}

pub fn train(cfg: &ClassifierConfig, rows: &[Vec<f64>], labels: &[bool]) -> Result<TrainedModel> {
    Ok(match *cfg {
        ClassifierConfig::Knn { k, metric } => TrainedModel::Knn(knn_fit(rows, labels, k, metric)?),
        ClassifierConfig::Svm { c, kernel, scale } => {
            TrainedModel::Svm(svm_train(rows, labels, c, kernel, scale)?)
        }
        ClassifierConfig::Rf {
            n_trees,
            min_leaf,
            seed,
        } => TrainedModel::Rf(rf_train(rows, labels, n_trees, min_leaf, seed)?),
        ClassifierConfig::Constant { positive } => TrainedModel::Constant(positive),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sn: f64,
    pub sp: f64,
    pub acc: f64,
    /// False when there were no positives and `sn` was set to 0.
    pub sn_defined: bool,
    /// False when there were no negatives and `sp` was set to 0.
    pub sp_defined: bool,
}

pub fn confusion_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::EmptyConfusion);
    }
    let ratio = |num: usize, den: usize| {
        if den > 0 {
            num as f64 / den as f64
        } else {
            0.0
        }
    };
    Ok(Metrics {
        sn: ratio(cm.tp, cm.tp + cm.fn_),
        sp: ratio(cm.tn, cm.tn + cm.fp),
        acc: ratio(cm.tp + cm.tn, cm.total()),
        sn_defined: cm.tp + cm.fn_ > 0,
        sp_defined: cm.tn + cm.fp > 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; `None` for the origin.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC points over the distinct scores (tied scores enter together) and the
/// trapezoidal area, which equals the Mann-Whitney statistic with ties
/// counted as one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let prev = points[points.len() - 1];
        let p = RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: Some(s),
        };
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
        points.push(p);
    }
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CvScheme {
    /// One fold per patient, in sorted patient order.
    Lopo,
    /// Patients shuffled by `seed` and dealt round-robin into `k` folds.
    KFold { k: usize, seed: u64 },
}

/// Test-row indices of every fold. No patient appears in two folds.
pub fn make_folds(patient_ids: &[String], scheme: &CvScheme) -> Result<Vec<Vec<usize>>> {
    let patients: Vec<&str> = patient_ids
        .iter()
        .map(String::as_str)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let fold_of: BTreeMap<&str, usize> = match *scheme {
        CvScheme::Lopo => patients.iter().enumerate().map(|(i, p)| (*p, i)).collect(),
        CvScheme::KFold { k, seed } => {
            if k < 2 || k > patients.len() {
                return Err(Error::TooManyFolds {
                    folds: k,
                    patients: patients.len(),
                });
            }
            let mut shuffled = patients.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            shuffled
                .iter()
                .enumerate()
                .map(|(i, p)| (*p, i % k))
                .collect()
        }
    };
    let n_folds = match *scheme {
        CvScheme::Lopo => patients.len(),
        CvScheme::KFold { k, .. } => k,
    };
    let mut folds = vec![Vec::new(); n_folds];
    for (row, p) in patient_ids.iter().enumerate() {
        folds[fold_of[p.as_str()]].push(row);
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test_patients: Vec<String>,
    pub confusion: ConfusionMatrix,
    #[serde(skip)]
    pub standardizer: Option<Standardizer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPrediction {
    pub record_id: String,
    pub patient_id: String,
    pub actual: bool,
    pub predicted: bool,
    pub score: f64,
    pub fold: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMeans {
    /// Mean over folds that contain positives.
    pub sn: Option<f64>,
    /// Mean over folds that contain negatives.
    pub sp: Option<f64>,
    pub acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sn: f64,
    pub sp: f64,
    pub acc: f64,
    /// Pooled over all folds; absent when only one class is present.
    pub auc: Option<f64>,
    pub roc: Vec<RocPoint>,
    pub pooled: ConfusionMatrix,
    pub fold_means: FoldMeans,
    pub folds: Vec<FoldResult>,
    pub predictions: Vec<RowPrediction>,
    pub features: Vec<String>,
    pub classifier: ClassifierConfig,
    pub scheme: CvScheme,
}

/// Patient-grouped cross-validation on the columns `features`. The
/// standardizer is fitted on each training fold only. A training fold with a
/// single class is answered by a constant predictor of that class.
pub fn cross_validate(
    x: &FeatureMatrix,
    scheme: &CvScheme,
    classifier: &ClassifierConfig,
    features: &[usize],
) -> Result<EvalReport> {
    if x.n_rows() == 0 {
        return Err(Error::EmptySeries);
    }
    let folds = make_folds(x.patient_ids(), scheme)?;
    let labels = x.labels();
    let mut in_test = vec![false; x.n_rows()];
    let mut pooled = ConfusionMatrix::default();
    let mut fold_results = Vec::with_capacity(folds.len());
    let mut predictions = Vec::with_capacity(x.n_rows());
    for (f, test) in folds.iter().enumerate() {
        in_test.iter_mut().for_each(|t| *t = false);
        test.iter().for_each(|&r| in_test[r] = true);
        let train_idx: Vec<usize> = (0..x.n_rows()).filter(|&r| !in_test[r]).collect();
        if train_idx.is_empty() {
            return Err(Error::TooManyFolds {
                folds: folds.len(),
                patients: folds.len(),
            });
        }
        let train_raw = x.rows_with(&train_idx, features);
        let standardizer = Standardizer::fit(&train_raw)?;
        let train_rows = standardizer.transform_all(&train_raw);
        let train_labels: Vec<bool> = train_idx.iter().map(|&r| labels[r]).collect();
        let model = if train_labels.iter().all(|&l| l == train_labels[0])
            && !matches!(classifier, ClassifierConfig::Constant { .. })
        {
            log::warn!("fold {f}: training data has a single class, predicting it constantly");
            TrainedModel::Constant(train_labels[0])
        } else {
            train(classifier, &train_rows, &train_labels)?
        };
        let mut cm = ConfusionMatrix::default();
        for &r in test {
            let row = standardizer.transform(&x.rows_with(&[r], features)[0]);
            let p = model.predict(&row);
            cm.record(labels[r], p.positive);
            predictions.push(RowPrediction {
                record_id: x.record_ids()[r].clone(),
                patient_id: x.patient_ids()[r].clone(),
                actual: labels[r],
                predicted: p.positive,
                score: p.score,
                fold: f,
            });
        }
        pooled.add(&cm);
        let test_patients: BTreeSet<&String> = test.iter().map(|&r| &x.patient_ids()[r]).collect();
        fold_results.push(FoldResult {
            test_patients: test_patients.into_iter().cloned().collect(),
            confusion: cm,
            standardizer: Some(standardizer),
        });
    }
    let m = confusion_metrics(&pooled)?;
    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    let actual: Vec<bool> = predictions.iter().map(|p| p.actual).collect();
    let (auc, roc) = match roc_auc(&scores, &actual) {
        Ok(c) => (Some(c.auc), c.points),
        Err(Error::SingleClass) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        sn: m.sn,
        sp: m.sp,
        acc: m.acc,
        auc,
        roc,
        pooled,
        fold_means: fold_means(&fold_results)?,
        folds: fold_results,
        predictions,
        features: features.iter().map(|&c| x.names()[c].clone()).collect(),
        classifier: *classifier,
        scheme: *scheme,
    })
}

fn fold_means(folds: &[FoldResult]) -> Result<FoldMeans> {
    let mut sn = (0.0, 0usize);
    let mut sp = (0.0, 0usize);
    let mut acc = 0.0;
    let mut counted = 0usize;
    for f in folds.iter().filter(|f| f.confusion.total() > 0) {
        let m = confusion_metrics(&f.confusion)?;
        if m.sn_defined {
            sn = (sn.0 + m.sn, sn.1 + 1);
        }
        if m.sp_defined {
            sp = (sp.0 + m.sp, sp.1 + 1);
        }
        acc += m.acc;
        counted += 1;
    }
    let avg = |(s, n): (f64, usize)| (n > 0).then(|| s / n as f64);
    Ok(FoldMeans {
        sn: avg(sn),
        sp: avg(sp),
        acc: if counted > 0 {
            acc / counted as f64
        } else {
            0.0
        },
    })
}
