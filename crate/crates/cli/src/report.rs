use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use hyperseg_core::baselines::GaussianGraphParams;
use hyperseg_core::metrics::{CurvePoint, EvalReport};
use hyperseg_core::seed::Stream;
use hyperseg_core::{Method, SegmentationConfig, VERSION};
use serde::Serialize;

/// Effective configuration echoed into every report.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub config: SegmentationConfig,
    pub sub_seeds: SubSeeds,
    pub repeats: u64,
}

#[derive(Debug, Serialize)]
pub struct SubSeeds {
    pub noise: u64,
    pub sampling: u64,
    pub kmeans: u64,
    pub graph_params: u64,
    pub constraints: u64,
}

impl ConfigEcho {
    pub fn new(config: &SegmentationConfig, repeats: u64) -> Self {
        Self {
            config: config.clone(),
            sub_seeds: SubSeeds {
                noise: config.sub_seed(Stream::Noise),
                sampling: config.sub_seed(Stream::Sampling),
                kmeans: config.sub_seed(Stream::KMeans),
                graph_params: config.sub_seed(Stream::GraphParams),
                constraints: config.sub_seed(Stream::Constraints),
            },
            repeats,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SegmentReport {
    pub version: &'static str,
    pub input: String,
    pub n_points: usize,
    pub method: Method,
    pub k: usize,
    #[serde(rename = "E")]
    pub selected_e: usize,
    pub inertia: f64,
    pub assignments: Vec<usize>,
    pub metrics: EvalReport,
    pub timing_samples: Vec<f64>,
    pub graph_params: Option<GaussianGraphParams>,
    pub config: ConfigEcho,
}

#[derive(Debug, Serialize)]
pub struct CurveSummary {
    pub method: Method,
    pub n_points: usize,
    pub csv: String,
    pub nonzero: usize,
    pub graph_params: Option<GaussianGraphParams>,
    /// Hypergraph spectrum with its coefficients; hgsp only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
pub struct SpectrumReport {
    pub version: &'static str,
    pub input: String,
    pub curves: Vec<CurveSummary>,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkRow {
    pub cloud: String,
    pub n_points: usize,
    pub method: Method,
    pub k: usize,
    #[serde(rename = "E")]
    pub selected_e: usize,
    pub runtime_seconds: f64,
    pub silhouette: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_params: Option<GaussianGraphParams>,
}

#[derive(Debug, Default, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_runtime_seconds: f64,
    pub mean_silhouette: Option<f64>,
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Skipped {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct BenchmarkReport {
    pub version: &'static str,
    pub input: String,
    pub rows: Vec<BenchmarkRow>,
    pub aggregate: BTreeMap<String, Aggregate>,
    pub skipped: Vec<Skipped>,
    pub config: ConfigEcho,
}

pub fn aggregate(rows: &[BenchmarkRow]) -> BTreeMap<String, Aggregate> {
    fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
        let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        (count > 0).then(|| sum / count as f64)
    }
    let mut out = BTreeMap::new();
    for method in Method::ALL {
        let of: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.method == method).collect();
        if of.is_empty() {
            continue;
        }
        out.insert(
            method.to_string(),
            Aggregate {
                runs: of.len(),
                mean_runtime_seconds: mean(of.iter().map(|r| r.runtime_seconds)).unwrap_or(0.0),
                mean_silhouette: mean(of.iter().filter_map(|r| r.silhouette)),
                mean_accuracy: mean(of.iter().filter_map(|r| r.accuracy)),
            },
        );
    }
    out
}

pub fn version() -> &'static str {
    VERSION
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> anyhow::Result<()> {
    let mut text = String::from("pos,value\n");
    for p in curve {
        text.push_str(&format!("{},{}\n", p.pos, p.value));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
