//! Spectral embedding and clustering: component ranking and selection,
//! k-means on the embedding rows, and the full hypergraph pipeline.

mod kmeans;

pub use kmeans::{kmeans, KMeansConfig, KMeansOutcome};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::coefficients::{estimate_coefficients, CoefficientProblem};
use crate::config::{Method, SegmentationConfig, SelectionRule};
use crate::error::{Error, Result};
use crate::seed::Stream;
use crate::spectral::{center_rows, estimate_spectrum, SpectrumEstimate};

const STEEP_DROP: f64 = 5.0;
const RATIO_FLOOR: f64 = 1e-12;

/// Chooses how many leading components to keep: the position of the
/// steepest drop between consecutive sorted coefficients, or `fallback_e`
/// when no ratio reaches 5.
pub fn select_components(sigma_sorted: &[f64], max_e: usize, fallback_e: usize) -> Result<usize> {
    if sigma_sorted.is_empty() {
        return Err(Error::invalid("no coefficients to select from"));
    }
    if max_e == 0 || fallback_e == 0 {
        return Err(Error::invalid("max_e and fallback_e must be at least 1"));
    }
    if sigma_sorted.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::invalid("coefficients must be sorted in non-increasing order"));
    }
    let len = sigma_sorted.len();
    let last = max_e.min(len - 1);
    let mut best = (0, 0.0);
    for r in 1..=last {
        let ratio = sigma_sorted[r - 1] / sigma_sorted[r].max(RATIO_FLOOR);
        if ratio > best.1 {
            best = (r, ratio);
        }
    }
    if best.1 >= STEEP_DROP {
        Ok(best.0)
    } else {
        Ok(fallback_e.min(len))
    }
}

pub fn select_with(sigma_sorted: &[f64], rule: &SelectionRule) -> Result<usize> {
    select_components(sigma_sorted, rule.max_e, rule.fallback_e)
}

/// The N×E matrix whose columns are the leading spectral components.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: DMatrix<f64>,
}

impl EmbeddingMatrix {
    /// First `e` columns of `basis`.
    pub fn leading(basis: &DMatrix<f64>, e: usize) -> Result<Self> {
        if e == 0 || e > basis.ncols() {
            return Err(Error::invalid(format!(
                "cannot take {e} of {} components",
                basis.ncols()
            )));
        }
        Ok(Self {
            values: basis.columns(0, e).into_owned(),
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn selected_e(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    pub method: Method,
    pub assignments: Vec<usize>,
    pub k: usize,
    #[serde(rename = "E")]
    pub selected_e: usize,
    pub inertia: f64,
}

/// Clustering output together with the k-means trace, for diagnostics.
#[derive(Debug, Clone)]
pub struct ClusteredEmbedding {
    pub result: SegmentationResult,
    pub kmeans: KMeansOutcome,
}

pub(crate) fn cluster_embedding(
    method: Method,
    embedding: &EmbeddingMatrix,
    k: usize,
    seed: u64,
    config: &KMeansConfig,
) -> Result<ClusteredEmbedding> {
    let outcome = kmeans(embedding.values(), k, seed, config)?;
    Ok(ClusteredEmbedding {
        result: SegmentationResult {
            method,
            assignments: outcome.assignments.clone(),
            k,
            selected_e: embedding.selected_e(),
            inertia: outcome.inertia,
        },
        kmeans: outcome,
    })
}

/// Full hypergraph segmentation output.
#[derive(Debug, Clone)]
pub struct HgspSegmentation {
    pub clustered: ClusteredEmbedding,
    /// Components ranked by descending coefficient.
    pub spectrum: SpectrumEstimate,
}

/// Hypergraph spectral clustering of `cloud` into `config.k` segments.
pub fn segment(cloud: &PointCloud, config: &SegmentationConfig) -> Result<SegmentationResult> {
    Ok(segment_detailed(cloud, config)?.clustered.result)
}

pub fn segment_detailed(cloud: &PointCloud, config: &SegmentationConfig) -> Result<HgspSegmentation> {
    config.validate()?;
    if config.k > cloud.len() {
        return Err(Error::invalid(format!(
            "k = {} exceeds the {} points",
            config.k,
            cloud.len()
        )));
    }
    let (centered, _) = center_rows(cloud);
    let spectrum = estimate_spectrum(&centered)?;
    let problem =
        CoefficientProblem::from_centered(&centered, &spectrum, config.beta, config.coefficient_mode())?;
    let sigma = estimate_coefficients(&spectrum, &problem)?;
    let ranked = spectrum.with_coefficients(sigma)?.ranked()?;
    let sorted = ranked.coefficients().ok_or(Error::MissingCoefficients)?;
    let e = select_with(sorted, &config.selection())?;
    let embedding = EmbeddingMatrix::leading(ranked.components(), e)?;
    let clustered = cluster_embedding(
        Method::Hgsp,
        &embedding,
        config.k,
        config.sub_seed(Stream::KMeans),
        &config.kmeans,
    )?;
    Ok(HgspSegmentation {
        clustered,
        spectrum: ranked,
    })
}
