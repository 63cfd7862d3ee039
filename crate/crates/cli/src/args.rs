use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperseg_core::clustering::KMeansConfig;
use hyperseg_core::coefficients::DEFAULT_CONSTRAINT_SAMPLES;
use hyperseg_core::{ConstraintKind, Method, SegmentationConfig};

#[derive(Debug, Parser)]
#[command(name = "hyperseg", version, about = "Point cloud segmentation by hypergraph spectral clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one cloud and write a JSON report plus per-point assignments.
    Segment(SegmentArgs),
    /// Emit normalized spectrum curves (CSV) per method and sample size.
    Spectrum(SpectrumArgs),
    /// Run methods over a directory of clouds and aggregate the metrics.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Hgsp,
    Gsp,
    Laplacian,
    Kmeans,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Hgsp => Method::Hgsp,
            MethodArg::Gsp => Method::Gsp,
            MethodArg::Laplacian => Method::Laplacian,
            MethodArg::Kmeans => Method::Kmeans,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Relaxed,
    Sampled,
}

/// Parameters shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Regularization weight on the coefficients.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = ConstraintArg::Relaxed)]
    pub constraint_mode: ConstraintArg,
    /// Triples checked in sampled constraint mode.
    #[arg(long, default_value_t = DEFAULT_CONSTRAINT_SAMPLES)]
    pub constraint_samples: usize,
    #[arg(long, default_value_t = 5)]
    pub max_e: usize,
    #[arg(long, default_value_t = 2)]
    pub fallback_e: usize,
    /// Gaussian-graph kernel width (estimated if omitted).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Gaussian-graph squared-distance threshold (estimated if omitted).
    #[arg(long)]
    pub t: Option<f64>,
    /// Add white Gaussian noise at this SNR before segmenting.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Common {
    pub fn config(&self, k: usize, sample_n: Option<usize>) -> SegmentationConfig {
        let mut config = SegmentationConfig::new(k).with_seed(self.seed).with_beta(self.beta);
        config.constraint_mode = match self.constraint_mode {
            ConstraintArg::Relaxed => ConstraintKind::Relaxed,
            ConstraintArg::Sampled => ConstraintKind::Sampled,
        };
        config.constraint_samples = self.constraint_samples;
        config.max_e = self.max_e;
        config.fallback_e = self.fallback_e;
        config.delta = self.delta;
        config.t = self.t;
        config.snr_db = self.snr_db;
        config.sample_n = sample_n;
        config.kmeans = KMeansConfig::default();
        config
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Ground-truth labels, one integer per line; defaults to `<input stem>.labels` when present.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Hgsp)]
    pub method: MethodArg,
    #[arg(long)]
    pub k: usize,
    /// Random subsample size taken before segmenting.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report path; assignments go next to it as `<stem>.assignments.txt`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Methods to evaluate; defaults to every spectral method.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Sample sizes, e.g. `400,1400,2400,3400`; the full cloud when omitted.
    #[arg(long, value_delimiter = ',')]
    pub samples: Vec<usize>,
    /// Output directory for the CSV curves and `spectrum.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Directory of `.xyz`/`.ply` clouds with optional `<stem>.labels` files.
    #[arg(long)]
    pub input: PathBuf,
    /// Methods to run; all four by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Cluster count; the number of distinct labels when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[command(flatten)]
    pub common: Common,
}
