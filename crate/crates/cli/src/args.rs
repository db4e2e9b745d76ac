use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dakr", version, about = "Density-adaptive kernel re-ranking")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Precompute the gallery bandwidth table.
    Sigma(SigmaArgs),
    /// Rank the gallery for every probe.
    Rerank(RerankArgs),
    /// CMC and mAP for one or more methods.
    Eval(EvalArgs),
    /// Gain over k-NN across a range of k.
    Sweep(SweepArgs),
    /// Offline and online wall-clock at several gallery sizes.
    Bench(BenchArgs),
    /// Write a synthetic scenario to feature and truth files.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Euclidean,
    #[value(alias = "squared_euclidean")]
    SquaredEuclidean,
    Mahalanobis,
    Precomputed,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    #[arg(long, value_enum, default_value = "euclidean")]
    pub metric: MetricKind,

    /// Mahalanobis matrix (d x d CSV) or precomputed distances CSV.
    #[arg(long)]
    pub metric_matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NeighborArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,

    /// Bandwidth neighbor count; defaults to 5% of the gallery.
    #[arg(long)]
    pub k_sigma: Option<usize>,

    /// Let the probes augment gallery neighborhoods.
    #[arg(long)]
    pub with_probes: bool,

    /// Treat a probe whose id is also a gallery id as that gallery sample.
    #[arg(long)]
    pub shared_ids: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FileArgs {
    #[arg(long)]
    pub gallery: Option<PathBuf>,

    #[arg(long)]
    pub probes: Option<PathBuf>,

    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// perfect, imperfect or multi.
    #[arg(long)]
    pub scenario: Option<String>,

    #[arg(long, default_value_t = 100)]
    pub identities: usize,

    #[arg(long, default_value_t = 1)]
    pub shots: usize,

    #[arg(long, default_value_t = 0)]
    pub distractors: usize,

    #[arg(long, default_value_t = 16)]
    pub dim: usize,

    #[arg(long, default_value_t = 0.21)]
    pub spread: f64,

    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SigmaArgs {
    #[arg(long)]
    pub gallery: PathBuf,

    /// Needed with --with-probes.
    #[arg(long)]
    pub probes: Option<PathBuf>,

    #[command(flatten)]
    pub metric: MetricArgs,

    #[arg(long)]
    pub k_sigma: Option<usize>,

    #[arg(long)]
    pub with_probes: bool,

    #[arg(long)]
    pub shared_ids: bool,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RerankArgs {
    #[arg(long)]
    pub gallery: PathBuf,

    #[arg(long)]
    pub probes: PathBuf,

    /// knn, inn, rnn, inv_dakr or bi_dakr; a trailing `+` implies --with-probes.
    #[arg(long, default_value = "bi_dakr")]
    pub method: String,

    #[command(flatten)]
    pub metric: MetricArgs,

    #[command(flatten)]
    pub neighbors: NeighborArgs,

    /// Bandwidth sidecar; read when present, written otherwise.
    #[arg(long)]
    pub sigma_table: Option<PathBuf>,

    /// Rebuild a sidecar that no longer matches the inputs instead of failing.
    #[arg(long)]
    pub recompute: bool,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub files: FileArgs,

    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[arg(long, value_delimiter = ',', default_value = "knn,inn,rnn,inv_dakr,bi_dakr")]
    pub method: Vec<String>,

    #[command(flatten)]
    pub metric: MetricArgs,

    #[command(flatten)]
    pub neighbors: NeighborArgs,

    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
    pub ranks: Vec<usize>,

    /// Report path; `.json`, `.csv` and `.timings.csv` files are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub files: FileArgs,

    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[arg(long, value_delimiter = ',', default_value = "inn,rnn,inv_dakr,bi_dakr")]
    pub method: Vec<String>,

    #[command(flatten)]
    pub metric: MetricArgs,

    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10,15,20,30")]
    pub k_values: Vec<usize>,

    /// same, multiplicity, fraction:F or fixed:N.
    #[arg(long, default_value = "same")]
    pub k_sigma_rule: String,

    #[arg(long)]
    pub with_probes: bool,

    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
    pub ranks: Vec<usize>,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000")]
    pub sizes: Vec<usize>,

    #[arg(long, default_value_t = 64)]
    pub dim: usize,

    /// Probes timed per size for the linearithmic methods.
    #[arg(long, default_value_t = 16)]
    pub probes: usize,

    /// Probes timed per size for the full-scan k-INN.
    #[arg(long, default_value_t = 2)]
    pub inn_probes: usize,

    #[arg(long, default_value_t = 7)]
    pub repeats: usize,

    #[arg(long, default_value_t = 10)]
    pub k: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Timing CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureFormat {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: FeatureFormat,

    /// Output directory for gallery, probes and truth files.
    #[arg(long)]
    pub out: PathBuf,
}
