//! Method dispatch shared by the command line and the experiment harness.

use serde::Serialize;

use crate::baselines::{
    adjacency_spectrum, gaussian_adjacency, gsp_segment_detailed, kmeans_segment_detailed,
    laplacian_segment_detailed, laplacian_spectrum, GaussianGraphParams,
};
use crate::cloud::{add_noise, downsample, PointCloud};
use crate::clustering::{segment_detailed, ClusteredEmbedding};
use crate::coefficients::{estimate_coefficients, CoefficientProblem};
use crate::config::{Method, SegmentationConfig};
use crate::error::{Error, Result};
use crate::seed::Stream;
use crate::spectral::{center_rows, estimate_spectrum, SpectrumEstimate};

/// Applies the configured subsampling and then the configured noise.
pub fn prepare_cloud(cloud: &PointCloud, config: &SegmentationConfig) -> Result<PointCloud> {
    let sampled = match config.sample_n {
        Some(n) => downsample(cloud, n, config.sub_seed(Stream::Sampling))?,
        None => cloud.clone(),
    };
    match config.snr_db {
        Some(snr) => add_noise(&sampled, snr, config.sub_seed(Stream::Noise)),
        None => Ok(sampled),
    }
}

/// Graph parameters a baseline run will use, with overrides applied.
pub fn graph_params(cloud: &PointCloud, config: &SegmentationConfig) -> Result<GaussianGraphParams> {
    GaussianGraphParams::resolve(cloud, config.delta, config.t, config.sub_seed(Stream::GraphParams))
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub clustered: ClusteredEmbedding,
    /// Normalized spectrum in frequency order, one value per node; absent
    /// for k-means.
    pub spectrum_values: Option<Vec<f64>>,
    pub graph_params: Option<GaussianGraphParams>,
}

/// Runs one segmentation method on an already prepared cloud.
pub fn run_method(cloud: &PointCloud, method: Method, config: &SegmentationConfig) -> Result<MethodRun> {
    config.validate()?;
    let seed = config.sub_seed(Stream::KMeans);
    let rule = config.selection();
    match method {
        Method::Hgsp => {
            let out = segment_detailed(cloud, config)?;
            Ok(MethodRun {
                spectrum_values: Some(out.spectrum.padded_coefficients()?),
                clustered: out.clustered,
                graph_params: None,
            })
        }
        Method::Gsp | Method::Laplacian => {
            let params = graph_params(cloud, config)?;
            let (clustered, spectrum) = if method == Method::Gsp {
                gsp_segment_detailed(cloud, &params, config.k, seed, &rule, &config.kmeans)?
            } else {
                laplacian_segment_detailed(cloud, &params, config.k, seed, &rule, &config.kmeans)?
            };
            Ok(MethodRun {
                clustered,
                spectrum_values: Some(spectrum.normalized),
                graph_params: Some(params),
            })
        }
        Method::Kmeans => Ok(MethodRun {
            clustered: kmeans_segment_detailed(cloud, config.k, seed, &config.kmeans)?,
            spectrum_values: None,
            graph_params: None,
        }),
    }
}

/// Spectrum of one method without the clustering step.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSpectrum {
    pub method: Method,
    /// Normalized, non-increasing, one value per node.
    pub values: Vec<f64>,
    #[serde(skip)]
    pub hgsp: Option<SpectrumEstimate>,
    pub graph_params: Option<GaussianGraphParams>,
}

pub fn method_spectrum(cloud: &PointCloud, method: Method, config: &SegmentationConfig) -> Result<MethodSpectrum> {
    config.validate()?;
    match method {
        Method::Hgsp => {
            let (centered, _) = center_rows(cloud);
            let spectrum = estimate_spectrum(&centered)?;
            let problem = CoefficientProblem::from_centered(
                &centered,
                &spectrum,
                config.beta,
                config.coefficient_mode(),
            )?;
            let sigma = estimate_coefficients(&spectrum, &problem)?;
            let ranked = spectrum.with_coefficients(sigma)?.ranked()?;
            Ok(MethodSpectrum {
                method,
                values: ranked.padded_coefficients()?,
                hgsp: Some(ranked),
                graph_params: None,
            })
        }
        Method::Gsp | Method::Laplacian => {
            let params = graph_params(cloud, config)?;
            let graph = gaussian_adjacency(cloud, &params)?;
            let spectrum = if method == Method::Gsp {
                adjacency_spectrum(&graph)?
            } else {
                laplacian_spectrum(&graph)?
            };
            Ok(MethodSpectrum {
                method,
                values: spectrum.normalized,
                hgsp: None,
                graph_params: Some(params),
            })
        }
        Method::Kmeans => Err(Error::invalid("k-means has no spectrum")),
    }
}
