//! Evaluation: Silhouette index, matched accuracy, eigenvalue-distribution
//! curves and wall-clock timing.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::MatrixXx3;
use pathfinding::prelude::{kuhn_munkres, Matrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ALPHABET: usize = 64;

/// Metrics attached to one segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub silhouette: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub runtime_seconds: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub eigencurve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub pos: f64,
    pub value: f64,
}

/// Maps arbitrary ids onto `0..count`, in order of first appearance sorted by id.
fn dense_ids<T: Ord + Copy>(ids: &[T]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    for &id in ids {
        map.entry(id).or_insert(0usize);
    }
    for (slot, v) in map.values_mut().enumerate() {
        *v = slot;
    }
    (ids.iter().map(|id| map[id]).collect(), map.len())
}

/// Mean Silhouette over all points, with Euclidean distances in coordinate space.
///
/// Points in singleton clusters score 0, as do points with `a = b = 0`.
pub fn silhouette(coords: &MatrixXx3<f64>, assignments: &[usize]) -> Result<f64> {
    let n = coords.nrows();
    if assignments.len() != n {
        return Err(Error::Dimension(format!(
            "{} assignments for {n} points",
            assignments.len()
        )));
    }
    if n < 2 {
        return Err(Error::UndefinedMetric("silhouette needs at least 2 points".into()));
    }
    let (ids, k) = dense_ids(assignments);
    if k < 2 {
        return Err(Error::UndefinedMetric("silhouette needs at least 2 clusters".into()));
    }
    let mut sizes = vec![0usize; k];
    for &c in &ids {
        sizes[c] += 1;
    }
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|i| [coords[(i, 0)], coords[(i, 1)], coords[(i, 2)]])
        .collect();

    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = ids[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let p = pts[i];
            for (j, q) in pts.iter().enumerate() {
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                sums[ids[j]] += d;
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / n as f64)
}

/// Fraction of points labelled correctly under the best one-to-one mapping
/// from cluster ids to label ids.
pub fn matched_accuracy<A: Ord + Copy, L: Ord + Copy>(assignments: &[A], labels: &[L]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} assignments but {} labels",
            assignments.len(),
            labels.len()
        )));
    }
    if assignments.is_empty() {
        return Err(Error::invalid("no points to score"));
    }
    let (clusters, k) = dense_ids(assignments);
    let (classes, c) = dense_ids(labels);
    if k > MAX_ALPHABET || c > MAX_ALPHABET {
        return Err(Error::invalid(format!(
            "at most {MAX_ALPHABET} clusters and classes are supported"
        )));
    }
    let size = k.max(c);
    let mut table = Matrix::new(size, size, 0i64);
    for (&a, &l) in clusters.iter().zip(&classes) {
        table[(a, l)] += 1;
    }
    let (matched, _) = kuhn_munkres(&table);
    Ok(matched as f64 / assignments.len() as f64)
}

/// Normalized eigenvalue-distribution curve, `(i / N, v_i / v_1)`.
pub fn eigencurve(values: &[f64]) -> Vec<CurvePoint> {
    let n = values.len() as f64;
    let lead = values.first().copied().unwrap_or(0.0);
    values
        .iter()
        .enumerate()
        .map(|(i, v)| CurvePoint {
            pos: (i + 1) as f64 / n,
            value: if lead > 0.0 { v / lead } else { 0.0 },
        })
        .collect()
}

/// `v_at − v_{at+1}` on the normalized curve (1-based `at`).
pub fn eigengap(values: &[f64], at: usize) -> Result<f64> {
    if at == 0 || at >= values.len() {
        return Err(Error::invalid(format!(
            "eigengap position {at} outside 1..{}",
            values.len()
        )));
    }
    let curve = eigencurve(values);
    Ok(curve[at - 1].value - curve[at].value)
}

/// Curve value at the first position at or beyond `pos`.
pub fn curve_value_at(curve: &[CurvePoint], pos: f64) -> Option<f64> {
    curve.iter().find(|p| p.pos >= pos - 1e-12).map(|p| p.value)
}

/// Wall-clock timings of repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub samples: Vec<f64>,
    pub median_seconds: f64,
}

/// Runs `method` `repeats` times and reports the median wall-clock time.
pub fn time_method<T, F>(repeats: usize, mut method: F) -> Result<(Timing, T)>
where
    F: FnMut() -> Result<T>,
{
    if repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    let mut samples = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let out = method()?;
        samples.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    let median_seconds = median(&samples);
    Ok((
        Timing {
            samples,
            median_seconds,
        },
        last.expect("at least one repeat"),
    ))
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}
