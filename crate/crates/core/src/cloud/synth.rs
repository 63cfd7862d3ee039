use nalgebra::MatrixXx3;
use rand::Rng;
use rand_distr::StandardNormal;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::seed;

const PLACEMENT_ATTEMPTS: usize = 10_000;

/// `k` isotropic Gaussian blobs of `per_cluster` points each, labelled by blob.
///
/// Centroids are rejection-sampled in a cube until every pair is at least
/// `separation` apart; if that keeps failing the remaining centroids are
/// placed along a line at exactly `separation` spacing. The centroid mean is
/// moved to the origin.
pub fn synth_blobs(
    k: usize,
    per_cluster: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Result<PointCloud> {
    if k == 0 || per_cluster == 0 {
        return Err(Error::invalid("k and per_cluster must be at least 1"));
    }
    if !(separation > 0.0 && separation.is_finite() && spread > 0.0 && spread.is_finite()) {
        return Err(Error::invalid("separation and spread must be positive"));
    }
    let mut rng = seed::rng(seed);
    let side = 2.0 * separation * (k as f64).cbrt();
    let mut centroids: Vec<[f64; 3]> = Vec::with_capacity(k);
    'outer: while centroids.len() < k {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5 * side..0.5 * side));
            if centroids.iter().all(|o| dist(o, &c) >= separation) {
                centroids.push(c);
                continue 'outer;
            }
        }
        break;
    }
    if centroids.len() < k {
        let far = side * 2.0;
        let base = centroids.len();
        for i in base..k {
            let offset = far + (i - base) as f64 * separation;
            centroids.push([offset, offset * 0.5, 0.0]);
        }
    }

    let mean: [f64; 3] = std::array::from_fn(|j| centroids.iter().map(|c| c[j]).sum::<f64>() / k as f64);
    for c in &mut centroids {
        for j in 0..3 {
            c[j] -= mean[j];
        }
    }

    let n = k * per_cluster;
    let mut coords = MatrixXx3::zeros(n);
    let mut labels = Vec::with_capacity(n);
    for (c, centre) in centroids.iter().enumerate() {
        for p in 0..per_cluster {
            let row = c * per_cluster + p;
            for (j, mu) in centre.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                coords[(row, j)] = mu + spread * z;
            }
            labels.push(c as u32);
        }
    }
    PointCloud::new(coords)?.with_labels(labels)
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
