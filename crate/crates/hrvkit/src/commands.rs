//! The `extract`, `rank`, `evaluate` and `reproduce` commands.

use std::fs;
use std::path::{Path, PathBuf};

use hrvkit_core::classify::{cross_validate, ClassifierConfig, CvScheme, EvalReport};
use hrvkit_core::dataset::{split_learning_evaluation, DatasetManifest, Label, SplitConfig};
use hrvkit_core::features::Task;
use hrvkit_core::pipeline::{extract_record_features, PipelineConfig, Preset};
use hrvkit_core::selection::{
    first_local_max, mrmr_rank, t_filter, FeatureMatrix, RankedFeatures, TFilterOutcome,
    ThresholdResult, DEFAULT_MI_BINS, DEFAULT_T_ALPHA,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::io::{load_manifest, load_series};
use crate::tables::{
    fmt_f64, read_ranking, write_csv, write_curve, write_ranking, write_roc, FeatureTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierChoice {
    Knn,
    SvmLinear,
    SvmRbf,
    Rf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
pub enum RankingMethod {
    /// Student's t prefilter followed by mRMR.
    #[value(name = "ttest+mrmr")]
    #[serde(rename = "ttest+mrmr")]
    TtestMrmr,
}

/// Gaussian kernel scale used when none is given: 5 for 1-minute windows,
/// 10 otherwise.
pub fn default_kernel_scale(window_s: f64) -> f64 {
    if window_s <= 60.0 {
        5.0
    } else {
        10.0
    }
}

pub fn classifier_config(
    choice: ClassifierChoice,
    seed: u64,
    window_s: f64,
    kernel_scale: Option<f64>,
) -> ClassifierConfig {
    match choice {
        ClassifierChoice::Knn => ClassifierConfig::knn(),
        ClassifierChoice::SvmLinear => ClassifierConfig::svm_linear(),
        ClassifierChoice::SvmRbf => {
            ClassifierConfig::svm_gaussian(kernel_scale.unwrap_or(default_kernel_scale(window_s)))
        }
        ClassifierChoice::Rf => ClassifierConfig::random_forest(seed),
    }
}

/// Parses `lopo` or `kfold:K`.
pub fn parse_cv(text: &str, seed: u64) -> Result<CvScheme> {
    if text == "lopo" {
        return Ok(CvScheme::Lopo);
    }
    let k = text
        .strip_prefix("kfold:")
        .and_then(|k| k.parse::<usize>().ok())
        .ok_or_else(|| CliError::Config(format!("--cv `{text}`: expected lopo or kfold:K")))?;
    if k < 2 {
        return Err(CliError::Config("--cv kfold needs K >= 2".to_string()));
    }
    Ok(CvScheme::KFold { k, seed })
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::write(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

fn task_labels(task: Task) -> &'static [Label] {
    match task {
        Task::VtVf => &[Label::Vt, Label::Vf, Label::Con],
        Task::Paf => &[Label::PafPre, Label::Normal],
    }
}

#[derive(Debug, Clone)]
pub struct ExtractArgs {
    pub manifest: PathBuf,
    pub preset: Preset,
    pub window_s: f64,
    pub out: PathBuf,
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct ExtractOutcome {
    pub table: FeatureTable,
    /// `(record_id, reason)` for every record left out.
    pub skipped: Vec<(String, String)>,
    pub features_path: PathBuf,
}

fn check_window(window_s: f64) -> Result<()> {
    if window_s > 0.0 && window_s.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "--window {window_s}: must be positive"
        )))
    }
}

/// Feature rows for every record of the manifest used by the preset's task,
/// in manifest order.
pub fn extract_features(
    manifest: &DatasetManifest,
    manifest_name: &str,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<(FeatureTable, Vec<(String, String)>)> {
    let task = cfg.task();
    let wanted = task_labels(task);
    let pool = thread_pool(jobs)?;
    let results: Vec<std::result::Result<Vec<f64>, String>> = pool.install(|| {
        manifest
            .records()
            .par_iter()
            .map(|r| {
                if !wanted.contains(&r.label) {
                    return Err(format!("label {} is not used by this preset", r.label));
                }
                let series = load_series(r).map_err(|e| e.to_string())?;
                extract_record_features(&series, cfg).map_err(|e| e.to_string())
            })
            .collect()
    });
    let mut table = FeatureTable {
        config: json!({
            "command": "extract",
            "manifest": manifest_name,
            "pipeline": cfg,
        }),
        names: task.feature_names().iter().map(|s| s.to_string()).collect(),
        record_ids: Vec::new(),
        patient_ids: Vec::new(),
        labels: Vec::new(),
        rows: Vec::new(),
    };
    let mut skipped = Vec::new();
    for (record, result) in manifest.records().iter().zip(results) {
        match result {
            Ok(row) => {
                table.record_ids.push(record.record_id.clone());
                table.patient_ids.push(record.patient_id.clone());
                table.labels.push(record.label);
                table.rows.push(row);
            }
            Err(reason) => {
                log::warn!("skipping {}: {reason}", record.record_id);
                skipped.push((record.record_id.clone(), reason));
            }
        }
    }
    Ok((table, skipped))
}

fn write_skipped(path: &Path, config: &Value, skipped: &[(String, String)]) -> Result<()> {
    let rows: Vec<Vec<String>> = skipped
        .iter()
        .map(|(id, reason)| vec![id.clone(), reason.clone()])
        .collect();
    write_csv(path, config, &["record_id", "reason"], &rows)
}

pub fn extract(args: &ExtractArgs) -> Result<ExtractOutcome> {
    check_window(args.window_s)?;
    let manifest = load_manifest(&args.manifest, true)?;
    let cfg = PipelineConfig::new(args.preset, args.window_s);
    let (table, skipped) =
        extract_features(&manifest, &args.manifest.to_string_lossy(), &cfg, args.jobs)?;
    create_dir(&args.out)?;
    write_skipped(&args.out.join("skipped.csv"), &table.config, &skipped)?;
    if table.rows.is_empty() {
        return Err(CliError::Data("no record produced features".to_string()));
    }
    let features_path = args.out.join("features.csv");
    table.write(&features_path)?;
    Ok(ExtractOutcome {
        table,
        skipped,
        features_path,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RankSettings {
    pub alpha: f64,
    pub mi_bins: usize,
}

impl Default for RankSettings {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_T_ALPHA,
            mi_bins: DEFAULT_MI_BINS,
        }
    }
}

pub fn rank_matrix(
    matrix: &FeatureMatrix,
    settings: &RankSettings,
) -> Result<(TFilterOutcome, RankedFeatures)> {
    let filtered = t_filter(matrix, settings.alpha)?;
    let ranked = if filtered.matrix.n_cols() == 1 {
        RankedFeatures {
            names: filtered.matrix.names().to_vec(),
            scores: vec![0.0],
            method: "mrmr-mid".to_string(),
        }
    } else {
        mrmr_rank(&filtered.matrix, settings.mi_bins)?
    };
    Ok((filtered, ranked))
}

/// Accuracy of the top-k prefixes for k = 1..=max_k, evaluated in parallel
/// and assembled in k order.
pub fn threshold_parallel(
    ranked: &RankedFeatures,
    matrix: &FeatureMatrix,
    classifier: &ClassifierConfig,
    scheme: &CvScheme,
    max_k: usize,
    jobs: usize,
) -> Result<ThresholdResult> {
    let order = matrix.indices_of(&ranked.names)?;
    let max_k = max_k.clamp(1, order.len());
    let pool = thread_pool(jobs)?;
    let accuracies = pool.install(|| {
        (1..=max_k)
            .into_par_iter()
            .map(|k| cross_validate(matrix, scheme, classifier, &order[..k]).map(|r| r.acc))
            .collect::<std::result::Result<Vec<f64>, _>>()
    })?;
    Ok(ThresholdResult {
        k: first_local_max(&accuracies),
        accuracies,
    })
}

fn write_ttest(path: &Path, config: &Value, filtered: &TFilterOutcome) -> Result<()> {
    let rows: Vec<Vec<String>> = filtered
        .tests
        .iter()
        .map(|(name, t)| {
            let kept = !filtered.removed.contains(name);
            vec![name.clone(), fmt_f64(t.t), fmt_f64(t.p), kept.to_string()]
        })
        .collect();
    write_csv(path, config, &["feature", "t", "p", "kept"], &rows)
}

#[derive(Debug, Serialize)]
struct ThresholdFile<'a> {
    config: &'a Value,
    k: usize,
    features: &'a [String],
    accuracies: &'a [f64],
}

fn window_of(config: &Value) -> f64 {
    config
        .pointer("/pipeline/window_s")
        .and_then(Value::as_f64)
        .unwrap_or(300.0)
}

#[derive(Debug, Clone)]
pub struct RankArgs {
    pub features: PathBuf,
    pub settings: RankSettings,
    pub classifier: ClassifierChoice,
    pub kernel_scale: Option<f64>,
    pub cv: String,
    pub seed: u64,
    pub max_k: Option<usize>,
    pub out: PathBuf,
    pub jobs: usize,
}

/// How many ranked features to keep.
#[derive(Debug, Clone, Copy)]
pub enum FeatureCount {
    /// First local maximum of the accuracy curve over `1..=max_k`.
    Threshold {
        max_k: Option<usize>,
    },
    Fixed(usize),
}

/// Writes `ttest.csv`, `ranking.csv`, `curve.csv` and `threshold.json`.
#[allow(clippy::too_many_arguments)]
fn rank_and_threshold(
    matrix: &FeatureMatrix,
    settings: &RankSettings,
    classifier: &ClassifierConfig,
    scheme: &CvScheme,
    count: FeatureCount,
    jobs: usize,
    config: &Value,
    out: &Path,
) -> Result<(RankedFeatures, ThresholdResult)> {
    let (filtered, ranked) = rank_matrix(matrix, settings)?;
    let threshold = match count {
        FeatureCount::Threshold { max_k } => threshold_parallel(
            &ranked,
            matrix,
            classifier,
            scheme,
            max_k.unwrap_or(ranked.len()),
            jobs,
        )?,
        FeatureCount::Fixed(k) if k >= 1 => ThresholdResult {
            k: k.min(ranked.len()),
            accuracies: Vec::new(),
        },
        FeatureCount::Fixed(_) => {
            return Err(CliError::Config("--top-k must be at least 1".to_string()))
        }
    };
    write_ttest(&out.join("ttest.csv"), config, &filtered)?;
    write_ranking(&out.join("ranking.csv"), config, &ranked)?;
    write_curve(&out.join("curve.csv"), config, &threshold.accuracies)?;
    write_json(
        &out.join("threshold.json"),
        &ThresholdFile {
            config,
            k: threshold.k,
            features: ranked.top(threshold.k),
            accuracies: &threshold.accuracies,
        },
    )?;
    Ok((ranked, threshold))
}

pub fn rank(args: &RankArgs) -> Result<(RankedFeatures, ThresholdResult)> {
    let table = FeatureTable::read(&args.features)?;
    let matrix = table.to_matrix()?;
    let window = window_of(&table.config);
    let classifier = classifier_config(args.classifier, args.seed, window, args.kernel_scale);
    let scheme = parse_cv(&args.cv, args.seed)?;
    let config = json!({
        "command": "rank",
        "features": args.features.to_string_lossy(),
        "ranking": "ttest+mrmr",
        "alpha": args.settings.alpha,
        "mi_bins": args.settings.mi_bins,
        "classifier": classifier,
        "cv": scheme,
        "seed": args.seed,
        "max_k": args.max_k,
        "source": table.config,
    });
    create_dir(&args.out)?;
    rank_and_threshold(
        &matrix,
        &args.settings,
        &classifier,
        &scheme,
        FeatureCount::Threshold { max_k: args.max_k },
        args.jobs,
        &config,
        &args.out,
    )
}

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub config: Value,
    pub report: EvalReport,
}

fn write_report(out: &Path, config: Value, report: EvalReport) -> Result<ReportFile> {
    write_roc(&out.join("roc.csv"), &config, &report.roc)?;
    let file = ReportFile { config, report };
    write_json(&out.join("report.json"), &file)?;
    Ok(file)
}

/// Plain-text summary of a report.
pub fn summary(report: &EvalReport) -> String {
    let classifier = match report.classifier {
        ClassifierConfig::Knn { .. } => "knn",
        ClassifierConfig::Svm { .. } => "svm",
        ClassifierConfig::Rf { .. } => "rf",
        ClassifierConfig::Constant { .. } => "constant",
    };
    let cv = match report.scheme {
        CvScheme::Lopo => "lopo".to_string(),
        CvScheme::KFold { k, .. } => format!("kfold:{k}"),
    };
    let auc = report.auc.map_or("-".to_string(), |a| format!("{a:.4}"));
    format!(
        "{:<10} {:<9} {:>8} {:>7} {:>7} {:>7} {:>7}\n{:<10} {:<9} {:>8} {:>7.4} {:>7.4} {:>7.4} {:>7}",
        "classifier",
        "cv",
        "features",
        "SN",
        "SP",
        "ACC",
        "AUC",
        classifier,
        cv,
        report.features.len(),
        report.sn,
        report.sp,
        report.acc,
        auc
    )
}

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub features: PathBuf,
    pub ranking: Option<PathBuf>,
    pub top_k: Option<usize>,
    pub classifier: ClassifierChoice,
    pub kernel_scale: Option<f64>,
    pub cv: String,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<ReportFile> {
    let table = FeatureTable::read(&args.features)?;
    let matrix = table.to_matrix()?;
    let names: Vec<String> = match &args.ranking {
        Some(path) => {
            let ranked = read_ranking(path)?;
            let k = args.top_k.unwrap_or(ranked.len());
            ranked.top(k).to_vec()
        }
        None => {
            let k = args.top_k.unwrap_or(matrix.n_cols());
            matrix.names()[..k.min(matrix.n_cols())].to_vec()
        }
    };
    if names.is_empty() {
        return Err(CliError::Config("no features selected".to_string()));
    }
    let columns = matrix.indices_of(&names)?;
    let window = window_of(&table.config);
    let classifier = classifier_config(args.classifier, args.seed, window, args.kernel_scale);
    let scheme = parse_cv(&args.cv, args.seed)?;
    let report = cross_validate(&matrix, &scheme, &classifier, &columns)?;
    let config = json!({
        "command": "evaluate",
        "features": args.features.to_string_lossy(),
        "ranking": args.ranking.as_ref().map(|p| p.to_string_lossy()),
        "top_k": args.top_k,
        "classifier": classifier,
        "cv": scheme,
        "seed": args.seed,
        "source": table.config,
    });
    create_dir(&args.out)?;
    write_report(&args.out, config, report)
}

#[derive(Debug, Clone)]
pub struct ReproduceArgs {
    pub manifest: PathBuf,
    pub preset: Preset,
    pub window_s: f64,
    pub classifier: Option<ClassifierChoice>,
    pub kernel_scale: Option<f64>,
    pub cv: Option<String>,
    pub seed: u64,
    pub max_k: Option<usize>,
    /// Fixed feature count for `ch5` instead of the accuracy-curve rule.
    pub top_k: Option<usize>,
    pub out: PathBuf,
    pub jobs: usize,
}

pub fn default_classifier(preset: Preset) -> ClassifierChoice {
    match preset {
        Preset::Ch4 => ClassifierChoice::SvmRbf,
        Preset::Ch5 => ClassifierChoice::Knn,
        Preset::Ch6 => ClassifierChoice::SvmLinear,
    }
}

pub fn default_cv(preset: Preset) -> &'static str {
    match preset {
        Preset::Ch4 | Preset::Ch5 => "lopo",
        Preset::Ch6 => "kfold:10",
    }
}

/// Runs a whole preset:
///
/// * `ch5` splits patients into learning and evaluation sets, ranks and picks
///   the feature count on the learning set, then cross-validates the chosen
///   features on the evaluation set;
/// * `ch4` and `ch6` cross-validate the full feature set.
pub fn reproduce(args: &ReproduceArgs) -> Result<ReportFile> {
    check_window(args.window_s)?;
    if args.top_k.is_some() && args.preset != Preset::Ch5 {
        return Err(CliError::Config(
            "--top-k applies to the ch5 preset only".to_string(),
        ));
    }
    let manifest = load_manifest(&args.manifest, true)?;
    let cfg = PipelineConfig::new(args.preset, args.window_s);
    let (table, skipped) =
        extract_features(&manifest, &args.manifest.to_string_lossy(), &cfg, args.jobs)?;
    if table.rows.is_empty() {
        return Err(CliError::Data("no record produced features".to_string()));
    }
    create_dir(&args.out)?;
    table.write(&args.out.join("features.csv"))?;
    write_skipped(&args.out.join("skipped.csv"), &table.config, &skipped)?;

    let choice = args.classifier.unwrap_or(default_classifier(args.preset));
    let classifier = classifier_config(choice, args.seed, args.window_s, args.kernel_scale);
    let scheme = parse_cv(
        args.cv.as_deref().unwrap_or(default_cv(args.preset)),
        args.seed,
    )?;
    let matrix = table.to_matrix()?;
    let mut config = json!({
        "command": "reproduce",
        "manifest": args.manifest.to_string_lossy(),
        "pipeline": cfg,
        "classifier": classifier,
        "cv": scheme,
        "seed": args.seed,
    });

    if args.preset != Preset::Ch5 {
        let all: Vec<usize> = (0..matrix.n_cols()).collect();
        let report = cross_validate(&matrix, &scheme, &classifier, &all)?;
        return write_report(&args.out, config, report);
    }

    // records that failed extraction do not take part in the split
    let kept: Vec<_> = manifest
        .records()
        .iter()
        .filter(|r| table.record_ids.contains(&r.record_id))
        .cloned()
        .collect();
    let kept = DatasetManifest::new(kept)?;
    let split = split_learning_evaluation(&kept, args.seed, &SplitConfig::default())?;
    write_json(&args.out.join("split.json"), &split)?;
    let rows_in = |set: &std::collections::BTreeSet<String>| -> Vec<usize> {
        (0..matrix.n_rows())
            .filter(|&r| set.contains(&matrix.patient_ids()[r]))
            .collect()
    };
    let learning = matrix.select_rows(&rows_in(&split.learning_patients));
    let evaluation = matrix.select_rows(&rows_in(&split.evaluation_patients));

    let settings = RankSettings::default();
    config["ranking"] = json!("ttest+mrmr");
    config["alpha"] = json!(settings.alpha);
    config["mi_bins"] = json!(settings.mi_bins);
    config["max_k"] = json!(args.max_k);
    config["top_k"] = json!(args.top_k);
    let count = match args.top_k {
        Some(k) => FeatureCount::Fixed(k),
        None => FeatureCount::Threshold { max_k: args.max_k },
    };
    let (ranked, threshold) = rank_and_threshold(
        &learning,
        &settings,
        &classifier,
        &CvScheme::Lopo,
        count,
        args.jobs,
        &config,
        &args.out,
    )?;
    let columns = evaluation.indices_of(ranked.top(threshold.k))?;
    let report = cross_validate(&evaluation, &scheme, &classifier, &columns)?;
    write_report(&args.out, config, report)
}
