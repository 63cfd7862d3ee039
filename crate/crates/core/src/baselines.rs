//! Comparison methods: Gaussian-graph adjacency spectrum, unweighted
//! Laplacian spectrum, and k-means on raw coordinates.

use nalgebra::{DMatrix, MatrixXx3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::clustering::{cluster_embedding, select_with, ClusteredEmbedding, EmbeddingMatrix, KMeansConfig, SegmentationResult};
use crate::config::{Method, SelectionRule};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SymmetricEigen};
use crate::seed;
use crate::spectral::canonical_sign;

const PARAM_SAMPLE_PAIRS: usize = 1000;

/// Kernel bandwidth `delta` and squared-distance cutoff `t` of the
/// Gaussian graph `W_ij = exp(-‖s_i − s_j‖² / δ²)` for `‖s_i − s_j‖² ≤ t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianGraphParams {
    pub delta: f64,
    pub t: f64,
}

impl GaussianGraphParams {
    pub fn new(delta: f64, t: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("t must be nonnegative, got {t}")));
        }
        Ok(Self { delta, t })
    }

    /// Data-adaptive defaults from 1000 random point pairs: `delta` is the
    /// median sampled distance, `t` the squared 90th percentile.
    pub fn estimate(cloud: &PointCloud, seed: u64) -> Result<Self> {
        let n = cloud.len();
        if n < 2 {
            return Err(Error::invalid("need at least 2 points to estimate graph parameters"));
        }
        let mut rng = seed::rng(seed);
        let mut dists: Vec<f64> = (0..PARAM_SAMPLE_PAIRS)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                sq_dist(&cloud.point(i), &cloud.point(j)).sqrt()
            })
            .collect();
        dists.sort_by(f64::total_cmp);
        let delta = percentile(&dists, 0.5);
        let reach = percentile(&dists, 0.9);
        if delta <= 0.0 {
            return Err(Error::invalid(
                "sampled pairwise distances are zero; pass delta and t explicitly",
            ));
        }
        Self::new(delta, reach * reach)
    }

    /// Explicit overrides where given, data-adaptive estimates otherwise.
    pub fn resolve(cloud: &PointCloud, delta: Option<f64>, t: Option<f64>, seed: u64) -> Result<Self> {
        match (delta, t) {
            (Some(d), Some(t)) => Self::new(d, t),
            _ => {
                let est = Self::estimate(cloud, seed)?;
                Self::new(delta.unwrap_or(est.delta), t.unwrap_or(est.t))
            }
        }
    }
}

/// Linear interpolation between order statistics of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Weighted adjacency of the Gaussian graph with its unweighted counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMatrices {
    weighted: DMatrix<f64>,
    /// Column-major edge mask; kept apart from `weighted` because distant
    /// edges can underflow to a zero weight.
    edges: Vec<bool>,
    degree: Vec<f64>,
}

impl GraphMatrices {
    pub fn weighted_adjacency(&self) -> &DMatrix<f64> {
        &self.weighted
    }

    /// `S_ij = 1` for every pair within the distance threshold.
    pub fn unweighted_adjacency(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| if self.edge(i, j) { 1.0 } else { 0.0 })
    }

    fn edge(&self, i: usize, j: usize) -> bool {
        self.edges[j * self.len() + i]
    }

    /// Node degrees in the unweighted graph.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// `L = D − S`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.degree.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.degree[i]
            } else if self.edge(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }
}

pub fn gaussian_adjacency(cloud: &PointCloud, params: &GaussianGraphParams) -> Result<GraphMatrices> {
    let params = GaussianGraphParams::new(params.delta, params.t)?;
    let n = cloud.len();
    if n < 2 {
        return Err(Error::invalid("a graph needs at least 2 points"));
    }
    let coords = cloud.coords();
    let inv = 1.0 / (params.delta * params.delta);

    // Upper triangle row by row, then mirrored, so W is exactly symmetric.
    let mut buf = vec![0.0; n * n];
    let mut edges = vec![false; n * n];
    buf.par_chunks_mut(n)
        .zip(edges.par_chunks_mut(n))
        .enumerate()
        .for_each(|(i, (row, mask))| {
            let pi = point(coords, i);
            for j in i + 1..n {
                let d2 = sq_dist(&pi, &point(coords, j));
                if d2 <= params.t {
                    row[j] = (-d2 * inv).exp();
                    mask[j] = true;
                }
            }
        });
    for i in 0..n {
        for j in 0..i {
            buf[i * n + j] = buf[j * n + i];
            edges[i * n + j] = edges[j * n + i];
        }
    }
    let weighted = DMatrix::from_vec(n, n, buf);
    let degree = edges.chunks(n).map(|col| col.iter().filter(|e| **e).count() as f64).collect();
    Ok(GraphMatrices { weighted, edges, degree })
}

fn point(coords: &MatrixXx3<f64>, i: usize) -> [f64; 3] {
    [coords[(i, 0)], coords[(i, 1)], coords[(i, 2)]]
}

/// A baseline spectrum: eigenvalues in frequency order (lowest graph
/// frequency first) and their normalized form used for selection.
#[derive(Debug, Clone)]
pub struct GraphSpectrum {
    /// Raw eigenvalues, lowest frequency first.
    pub eigenvalues: Vec<f64>,
    /// Non-increasing values in `[0, 1]` starting at 1.
    pub normalized: Vec<f64>,
    eigen: SymmetricEigen,
    ascending: bool,
}

impl GraphSpectrum {
    /// Eigenvectors of the `e` lowest-frequency components.
    pub fn leading_vectors(&self, e: usize) -> DMatrix<f64> {
        let n = self.eigenvalues.len();
        let idx: Vec<usize> = if self.ascending {
            (0..e).collect()
        } else {
            (0..e).map(|r| n - 1 - r).collect()
        };
        let mut v = self.eigen.columns(&idx);
        for c in 0..v.ncols() {
            canonical_sign(v.column_mut(c));
        }
        v
    }
}

/// Adjacency spectrum: largest eigenvalue ↔ lowest frequency. Negative
/// eigenvalues normalize to 0.
pub fn adjacency_spectrum(graph: &GraphMatrices) -> Result<GraphSpectrum> {
    let eigen = symmetric_eigen(graph.weighted_adjacency())?;
    let eigenvalues: Vec<f64> = eigen.values.iter().rev().copied().collect();
    let top = eigenvalues[0];
    if !(top > 0.0) {
        return Err(Error::invalid("the Gaussian graph has no edges; increase t"));
    }
    let normalized = eigenvalues.iter().map(|v| (v / top).clamp(0.0, 1.0)).collect();
    Ok(GraphSpectrum {
        eigenvalues,
        normalized,
        eigen,
        ascending: false,
    })
}

/// Laplacian spectrum: smallest eigenvalue ↔ lowest frequency, normalized
/// as `(λ_max − λ_i) / λ_max` so the sequence falls from 1.
pub fn laplacian_spectrum(graph: &GraphMatrices) -> Result<GraphSpectrum> {
    let eigen = symmetric_eigen(&graph.laplacian())?;
    let eigenvalues = eigen.values.clone();
    let top = *eigenvalues.last().expect("non-empty graph");
    if !(top > 0.0) {
        return Err(Error::invalid("the graph has no edges; increase t"));
    }
    let mut normalized: Vec<f64> = eigenvalues
        .iter()
        .map(|v| ((top - v) / top).clamp(0.0, 1.0))
        .collect();
    normalized[0] = 1.0;
    Ok(GraphSpectrum {
        eigenvalues,
        normalized,
        eigen,
        ascending: true,
    })
}

fn cluster_spectrum(
    method: Method,
    spectrum: &GraphSpectrum,
    k: usize,
    seed: u64,
    rule: &SelectionRule,
    kmeans: &KMeansConfig,
) -> Result<ClusteredEmbedding> {
    let e = select_with(&spectrum.normalized, rule)?;
    let basis = spectrum.leading_vectors(e);
    let embedding = EmbeddingMatrix::leading(&basis, e)?;
    cluster_embedding(method, &embedding, k, seed, kmeans)
}

fn check_k(cloud: &PointCloud, k: usize) -> Result<()> {
    if k == 0 || k > cloud.len() {
        return Err(Error::invalid(format!("k = {k} is invalid for {} points", cloud.len())));
    }
    Ok(())
}

/// Spectral clustering on the Gaussian-graph adjacency, returning the
/// spectrum alongside the clustering.
pub fn gsp_segment_detailed(
    cloud: &PointCloud,
    params: &GaussianGraphParams,
    k: usize,
    seed: u64,
    rule: &SelectionRule,
    kmeans: &KMeansConfig,
) -> Result<(ClusteredEmbedding, GraphSpectrum)> {
    check_k(cloud, k)?;
    let graph = gaussian_adjacency(cloud, params)?;
    let spectrum = adjacency_spectrum(&graph)?;
    drop(graph);
    let clustered = cluster_spectrum(Method::Gsp, &spectrum, k, seed, rule, kmeans)?;
    Ok((clustered, spectrum))
}

pub fn gsp_segment(cloud: &PointCloud, params: &GaussianGraphParams, k: usize, seed: u64) -> Result<SegmentationResult> {
    let (c, _) = gsp_segment_detailed(cloud, params, k, seed, &SelectionRule::default(), &KMeansConfig::default())?;
    Ok(c.result)
}

/// Spectral clustering on the unweighted Laplacian `L = D − S`.
pub fn laplacian_segment_detailed(
    cloud: &PointCloud,
    params: &GaussianGraphParams,
    k: usize,
    seed: u64,
    rule: &SelectionRule,
    kmeans: &KMeansConfig,
) -> Result<(ClusteredEmbedding, GraphSpectrum)> {
    check_k(cloud, k)?;
    let graph = gaussian_adjacency(cloud, params)?;
    let spectrum = laplacian_spectrum(&graph)?;
    drop(graph);
    let clustered = cluster_spectrum(Method::Laplacian, &spectrum, k, seed, rule, kmeans)?;
    Ok((clustered, spectrum))
}

pub fn laplacian_segment(cloud: &PointCloud, params: &GaussianGraphParams, k: usize, seed: u64) -> Result<SegmentationResult> {
    let (c, _) = laplacian_segment_detailed(cloud, params, k, seed, &SelectionRule::default(), &KMeansConfig::default())?;
    Ok(c.result)
}

/// k-means directly on the coordinate rows.
pub fn kmeans_segment_detailed(
    cloud: &PointCloud,
    k: usize,
    seed: u64,
    kmeans: &KMeansConfig,
) -> Result<ClusteredEmbedding> {
    check_k(cloud, k)?;
    let coords = cloud.coords();
    let basis = DMatrix::from_fn(cloud.len(), 3, |i, j| coords[(i, j)]);
    let embedding = EmbeddingMatrix::leading(&basis, 3)?;
    cluster_embedding(Method::Kmeans, &embedding, k, seed, kmeans)
}

pub fn kmeans_segment(cloud: &PointCloud, k: usize, seed: u64) -> Result<SegmentationResult> {
    Ok(kmeans_segment_detailed(cloud, k, seed, &KMeansConfig::default())?.result)
}
