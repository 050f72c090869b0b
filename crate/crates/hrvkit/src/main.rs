use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hrvkit::commands::{
    self, ClassifierChoice, EvaluateArgs, ExtractArgs, RankArgs, RankSettings, RankingMethod,
    ReproduceArgs,
};
use hrvkit::Result;
use hrvkit_core::pipeline::Preset;
use hrvkit_core::selection::{DEFAULT_MI_BINS, DEFAULT_T_ALPHA};

#[derive(Debug, Parser)]
#[command(
    name = "hrvkit",
    version,
    about = "HRV feature extraction, ranking and classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract one feature row per record of a manifest.
    Extract(ExtractCli),
    /// Rank features and pick how many to keep.
    Rank(RankCli),
    /// Cross-validate a classifier on a feature table.
    Evaluate(EvaluateCli),
    /// Run extraction, ranking and evaluation for a preset.
    Reproduce(ReproduceCli),
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Random seed for splits, folds and forests.
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ClassifierCli {
    #[arg(long, value_enum)]
    classifier: Option<ClassifierChoice>,
    /// Gaussian kernel scale; defaults to 5 for 60 s windows and 10 otherwise.
    #[arg(long)]
    kernel_scale: Option<f64>,
    /// `lopo` or `kfold:K`.
    #[arg(long)]
    cv: Option<String>,
}

#[derive(Debug, Args)]
struct ExtractCli {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    preset: Preset,
    /// Window length in seconds.
    #[arg(long, default_value_t = 300.0)]
    window: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct RankCli {
    /// Feature table written by `extract`.
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum, default_value = "ttest+mrmr")]
    ranking: RankingMethod,
    #[arg(long, default_value_t = DEFAULT_T_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_MI_BINS)]
    mi_bins: usize,
    #[command(flatten)]
    classifier: ClassifierCli,
    /// Largest feature count tried.
    #[arg(long)]
    max_k: Option<usize>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct EvaluateCli {
    #[arg(long)]
    features: PathBuf,
    /// Ranking written by `rank`; without it all columns are used.
    #[arg(long)]
    ranking: Option<PathBuf>,
    /// Number of leading ranked features to use.
    #[arg(long)]
    top_k: Option<usize>,
    #[command(flatten)]
    classifier: ClassifierCli,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ReproduceCli {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    preset: Preset,
    #[arg(long, default_value_t = 300.0)]
    window: f64,
    #[command(flatten)]
    classifier: ClassifierCli,
    #[arg(long)]
    max_k: Option<usize>,
    /// Keep this many ranked features instead of picking the count (ch5).
    #[arg(long)]
    top_k: Option<usize>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => {
            let outcome = commands::extract(&ExtractArgs {
                manifest: a.manifest,
                preset: a.preset,
                window_s: a.window,
                out: a.out,
                jobs: a.jobs,
            })?;
            println!(
                "{} records extracted, {} skipped -> {}",
                outcome.table.rows.len(),
                outcome.skipped.len(),
                outcome.features_path.display()
            );
        }
        Command::Rank(a) => {
            let RankingMethod::TtestMrmr = a.ranking;
            let (ranked, threshold) = commands::rank(&RankArgs {
                features: a.features,
                settings: RankSettings {
                    alpha: a.alpha,
                    mi_bins: a.mi_bins,
                },
                classifier: a.classifier.classifier.unwrap_or(ClassifierChoice::Knn),
                kernel_scale: a.classifier.kernel_scale,
                cv: a.classifier.cv.unwrap_or_else(|| "lopo".to_string()),
                seed: a.common.seed,
                max_k: a.max_k,
                out: a.common.out,
                jobs: a.jobs,
            })?;
            println!("{} features ranked, k* = {}", ranked.len(), threshold.k);
            for (i, name) in ranked.top(threshold.k).iter().enumerate() {
                println!("{:>3} {name}", i + 1);
            }
        }
        Command::Evaluate(a) => {
            let file = commands::evaluate(&EvaluateArgs {
                features: a.features,
                ranking: a.ranking,
                top_k: a.top_k,
                classifier: a.classifier.classifier.unwrap_or(ClassifierChoice::Knn),
                kernel_scale: a.classifier.kernel_scale,
                cv: a.classifier.cv.unwrap_or_else(|| "lopo".to_string()),
                seed: a.common.seed,
                out: a.common.out,
            })?;
            println!("{}", commands::summary(&file.report));
        }
        Command::Reproduce(a) => {
            let file = commands::reproduce(&ReproduceArgs {
                manifest: a.manifest,
                preset: a.preset,
                window_s: a.window,
                classifier: a.classifier.classifier,
                kernel_scale: a.classifier.kernel_scale,
                cv: a.classifier.cv,
                seed: a.common.seed,
                max_k: a.max_k,
                top_k: a.top_k,
                out: a.common.out,
                jobs: a.jobs,
            })?;
            println!("{}", commands::summary(&file.report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
