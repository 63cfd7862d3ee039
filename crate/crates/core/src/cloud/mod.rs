//! Point clouds: the N×3 coordinate matrix plus optional ground-truth labels.

mod io;
mod synth;

pub use io::{load_cloud, load_labels, save_cloud, save_labels, CloudFormat};
pub use synth::synth_blobs;

use nalgebra::MatrixXx3;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed;

/// A gray-scale point cloud: one row per point, columns are the three
/// coordinate observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: MatrixXx3<f64>,
    labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(coords: MatrixXx3<f64>) -> Result<Self> {
        if coords.nrows() == 0 {
            return Err(Error::NoPoints);
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            let row = pos % coords.nrows();
            return Err(Error::invalid(format!("non-finite coordinate in point {row}")));
        }
        Ok(Self {
            coords,
            labels: None,
        })
    }

    pub fn from_points(points: &[[f64; 3]]) -> Result<Self> {
        let coords = MatrixXx3::from_fn(points.len(), |i, j| points[i][j]);
        Self::new(coords)
    }

    /// Attaches per-point labels; the length must equal the number of points.
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} labels for a cloud of {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    /// Always false: a cloud holds at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self) -> &MatrixXx3<f64> {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        [self.coords[(i, 0)], self.coords[(i, 1)], self.coords[(i, 2)]]
    }

    /// Rows selected by `indices`, labels carried along.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::NoPoints);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!("row index {bad} out of range")));
        }
        let coords = MatrixXx3::from_fn(indices.len(), |i, j| self.coords[(indices[i], j)]);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Ok(Self { coords, labels })
    }

    /// Mean squared entry of the column-centered coordinate matrix.
    pub fn signal_power(&self) -> f64 {
        let n = self.len() as f64;
        let mut total = 0.0;
        for col in self.coords.column_iter() {
            let mean = col.sum() / n;
            total += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        }
        total / (3.0 * n)
    }
}

/// Uniform sample of `n` rows without replacement, kept in their original order.
pub fn downsample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 || n > cloud.len() {
        return Err(Error::invalid(format!(
            "cannot sample {n} of {} points",
            cloud.len()
        )));
    }
    let mut rng = seed::rng(seed);
    let mut indices = rand::seq::index::sample(&mut rng, cloud.len(), n).into_vec();
    indices.sort_unstable();
    cloud.select(&indices)
}

/// Adds white Gaussian noise at the requested signal-to-noise ratio.
///
/// Signal power is measured after removing the global centroid, and the same
/// noise variance applies to all 3N entries.
pub fn add_noise(cloud: &PointCloud, snr_db: f64, seed: u64) -> Result<PointCloud> {
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
    }
    let variance = cloud.signal_power() / 10f64.powf(snr_db / 10.0);
    let std_dev = variance.sqrt();
    let mut rng = seed::rng(seed);
    let mut coords = cloud.coords.clone();
    // Fill row by row so a point's noise does not depend on N.
    for i in 0..coords.nrows() {
        for j in 0..3 {
            let z: f64 = rng.sample(StandardNormal);
            coords[(i, j)] += std_dev * z;
        }
    }
    Ok(PointCloud {
        coords,
        labels: cloud.labels.clone(),
    })
}
