//! Lloyd's algorithm with greedy D²-weighted seeding.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Stop once an iteration improves inertia by at most this fraction of
    /// the inertia right after seeding.
    pub rel_tol: f64,
    /// Independently seeded runs; the lowest final inertia wins.
    pub n_init: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iter: 300,
            rel_tol: 1e-8,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    pub assignments: Vec<usize>,
    /// Row-major `k × d`.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    /// Inertia after every assignment step, seeding included.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    /// Sum of squared row norms of the input; sets the rounding scale.
    pub energy: f64,
}

impl KMeansOutcome {
    /// True when no assignment step increased the objective beyond rounding.
    pub fn is_monotone(&self) -> bool {
        let slack = ROUNDING * self.energy.max(f64::MIN_POSITIVE);
        self.inertia_history.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

const ROUNDING: f64 = 1e-12;

struct Points {
    data: Vec<f64>,
    n: usize,
    d: usize,
    energy: f64,
}

impl Points {
    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let (n, d) = m.shape();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            data.extend(m.row(i).iter());
        }
        let energy = data.iter().map(|v| v * v).sum();
        Self { data, n, d, energy }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid per point (ties → lowest index) and its squared distance.
fn assign(points: &Points, centroids: &[f64], k: usize) -> Vec<(usize, f64)> {
    (0..points.n)
        .into_par_iter()
        .map(|i| {
            let p = points.row(i);
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(p, &centroids[c * points.d..(c + 1) * points.d]);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect()
}

// Sequential so the sum does not depend on the thread count.
fn total(nearest: &[(usize, f64)]) -> f64 {
    nearest.iter().map(|(_, d)| d).sum()
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64], sum: f64) -> usize {
    let target = rng.random::<f64>() * sum;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc > target && *w > 0.0 {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

fn seed_centroids(points: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = points.d;
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.random_range(0..points.n);
    centroids.extend_from_slice(points.row(first));
    let mut closest: Vec<f64> = (0..points.n)
        .map(|i| sq_dist(points.row(i), points.row(first)))
        .collect();
    let trials = 2 + (k as f64).ln().floor() as usize;

    for _ in 1..k {
        let potential: f64 = closest.iter().sum();
        let chosen = if potential <= 0.0 {
            // Fewer distinct points than clusters; duplicates get resolved by
            // the empty-cluster repair in the Lloyd loop.
            rng.random_range(0..points.n)
        } else {
            let mut best = (usize::MAX, f64::INFINITY);
            for _ in 0..trials {
                let cand = pick_weighted(rng, &closest, potential);
                let c = points.row(cand);
                let pot: f64 = (0..points.n)
                    .map(|i| closest[i].min(sq_dist(points.row(i), c)))
                    .sum();
                if pot < best.1 {
                    best = (cand, pot);
                }
            }
            best.0
        };
        let c = points.row(chosen).to_vec();
        for (i, slot) in closest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points.row(i), &c));
        }
        centroids.extend_from_slice(&c);
    }
    centroids
}

/// Clusters the rows of `points` into `k` groups.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, config: &KMeansConfig) -> Result<KMeansOutcome> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds the {n} points")));
    }
    if config.max_iter == 0 || config.n_init == 0 || !(config.rel_tol >= 0.0) {
        return Err(Error::invalid("max_iter and n_init must be positive and tol nonnegative"));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite embedding value"));
    }
    let pts = Points::from_matrix(points);
    let mut best: Option<KMeansOutcome> = None;
    for run in 0..config.n_init {
        let outcome = lloyd(&pts, k, seed::derive_run(seed, run as u64), config);
        if best.as_ref().map_or(true, |b| outcome.inertia < b.inertia) {
            best = Some(outcome);
        }
    }
    Ok(best.expect("n_init is positive"))
}

fn lloyd(pts: &Points, k: usize, seed: u64, config: &KMeansConfig) -> KMeansOutcome {
    let mut rng = seed::rng(seed);
    let mut centroids = seed_centroids(pts, k, &mut rng);

    let mut nearest = assign(pts, &centroids, k);
    let mut inertia = total(&nearest);
    let tol = config.rel_tol * inertia;
    let mut history = vec![inertia];
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        update_centroids(pts, &mut nearest, &mut centroids, k);
        let next = assign(pts, &centroids, k);
        let next_inertia = total(&next);
        let changed = next.iter().zip(&nearest).any(|(a, b)| a.0 != b.0);
        debug_assert!(next_inertia <= inertia + ROUNDING * pts.energy.max(f64::MIN_POSITIVE));
        nearest = next;
        let improvement = inertia - next_inertia;
        inertia = next_inertia;
        history.push(inertia);
        if !changed || improvement <= tol {
            break;
        }
    }

    KMeansOutcome {
        assignments: nearest.iter().map(|(c, _)| *c).collect(),
        centroids,
        inertia,
        inertia_history: history,
        iterations,
        energy: pts.energy,
    }
}

/// Recomputes means; an empty cluster takes over the point farthest from its
/// current centroid, which lowers the objective.
fn update_centroids(points: &Points, nearest: &mut [(usize, f64)], centroids: &mut [f64], k: usize) {
    let d = points.d;
    let mut counts = vec![0usize; k];
    for &(c, _) in nearest.iter() {
        counts[c] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let donor = nearest
            .iter()
            .enumerate()
            .filter(|(_, (owner, _))| counts[*owner] > 1)
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        if let Some(i) = donor {
            counts[nearest[i].0] -= 1;
            counts[c] = 1;
            nearest[i] = (c, 0.0);
        }
    }
    let mut sums = vec![0.0; k * d];
    for (i, &(c, _)) in nearest.iter().enumerate() {
        for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(points.row(i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        for j in 0..d {
            centroids[c * d + j] = sums[c * d + j] / counts[c] as f64;
        }
    }
}
