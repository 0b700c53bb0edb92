use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "novelty",
    version,
    about = "Semantic novelty curves and narrative-shape analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full per-book pipeline and export the 24-column dataset.
    Analyze(AnalyzeArgs),
    /// Fit Ward clusters on PAA vectors and write a centroid model.
    FitClusters(FitArgs),
    /// Assign PAA vectors to their nearest centroid.
    Assign(AssignArgs),
    /// Compute PAA-16 and SAX signatures for novelty curves.
    Sax(SaxArgs),
    /// Run a statistical test on dataset columns.
    Stats(StatsArgs),
    /// Discover discriminative shapelets between two classes.
    Shapelets(ShapeletArgs),
    /// Recompute curve-derived columns of a published dataset and diff them.
    Reproduce(ReproduceArgs),
    /// Write a synthetic corpus generated from the builtin archetypes.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of `<id>.txt` texts or `<id>.para` paragraph files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory of `<id>.sne1` embedding files.
    #[arg(
        long,
        conflicts_with = "embed_hash",
        required_unless_present = "embed_hash"
    )]
    pub embeddings: Option<PathBuf>,
    /// Embed paragraphs with the deterministic hashing embedder.
    #[arg(long)]
    pub embed_hash: bool,
    #[arg(long, default_value_t = 64)]
    pub hash_dim: usize,
    /// Metadata table (CSV or JSONL) keyed by gutenberg_id.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// `builtin`, `fit`, or a model file written by fit-clusters.
    #[arg(long, default_value = "builtin")]
    pub centroids: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the extension of --out.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Run report path; defaults to `<out>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub min_paragraphs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; NOVELTY_WORKERS takes precedence.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Trend-drift threshold for curve_type_3.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Write `<id>.para` paragraph files here for external embedding.
    #[arg(long)]
    pub dump_paragraphs: Option<PathBuf>,
    /// Number of clusters when --centroids fit.
    #[arg(long, default_value_t = 8)]
    pub fit_k: usize,
    /// Subsample size when --centroids fit.
    #[arg(long, default_value_t = 8000)]
    pub fit_sample: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Table with a PAA column (CSV or JSONL).
    #[arg(long)]
    pub paa: PathBuf,
    #[arg(long, default_value = "paa_16")]
    pub column: String,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 8000)]
    pub sample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also report WCSS/silhouette diagnostics for k in this range, e.g. `4-12`.
    #[arg(long)]
    pub diagnostics: Option<String>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    /// `builtin` or a model file written by fit-clusters.
    #[arg(long, default_value = "builtin")]
    pub model: String,
    #[arg(long)]
    pub paa: PathBuf,
    #[arg(long, default_value = "paa_16")]
    pub column: String,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SaxArgs {
    /// Table with a novelty_curve column, or a text file with one curve per line.
    #[arg(long)]
    pub curves: PathBuf,
    #[arg(long, default_value = "novelty_curve")]
    pub column: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("test").required(true).args(["pair", "chisq", "kw", "mw", "ols"])))]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Spearman correlation `X:Y`.
    #[arg(long)]
    pub pair: Option<String>,
    /// Partial out this column from --pair.
    #[arg(long, requires = "pair")]
    pub control: Option<String>,
    /// Chi-square independence of two categorical columns `A:B`.
    #[arg(long)]
    pub chisq: Option<String>,
    /// Kruskal-Wallis of VALUE across GROUP levels, `GROUP:VALUE`.
    #[arg(long)]
    pub kw: Option<String>,
    /// Mann-Whitney U of VALUE between two GROUP levels, `GROUP:VALUE`.
    #[arg(long)]
    pub mw: Option<String>,
    /// Levels compared by --mw (defaults to the only two present).
    #[arg(long, value_delimiter = ',')]
    pub groups: Option<Vec<String>>,
    /// Least squares `Y:X1,X2,...` with intercept.
    #[arg(long)]
    pub ols: Option<String>,
}

#[derive(Debug, Args)]
pub struct ShapeletArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label_col: String,
    /// Positive and negative class labels, `A,B`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub classes: Vec<String>,
    /// Series column mined for shapelets.
    #[arg(long, default_value = "paa_16")]
    pub series_col: String,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub min_len: usize,
    #[arg(long, default_value_t = 8)]
    pub max_len: usize,
    /// Draw candidates from at most this many series.
    #[arg(long)]
    pub sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "builtin")]
    pub centroids: String,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Receives `embeddings/<id>.sne1` and `meta.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub books_per_archetype: usize,
    #[arg(long, default_value_t = 60)]
    pub paragraphs: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.25)]
    pub noise: f64,
    /// Extra 10-paragraph books that the paragraph filter rejects.
    #[arg(long, default_value_t = 0)]
    pub short_books: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
