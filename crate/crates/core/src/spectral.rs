//! Hypergraph spectrum estimation from point coordinates.
//!
//! A zero-mean signal whose covariance is diagonalized by the hypergraph
//! spectral basis is stationary over the hypergraph, so the basis can be read
//! off the eigenvectors of the observation Gram matrix `R = s' s'^T`, where
//! `s'` is the cloud with every row centered. Because each row of `s'` sums to
//! zero, `R` has rank at most two and only `min(N, 3)` components carry any
//! information; they are obtained from a thin QR + 3×3 SVD of `s'` without
//! ever forming the N×N Gram matrix.

use nalgebra::{DMatrix, DVector, MatrixXx3};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

const ORTHONORMALITY_TOL: f64 = 1e-10;
const DEGENERATE_RATIO: f64 = 1e-12;

/// Estimated spectral components with their Gram eigenvalues and, once
/// estimated, the normalized frequency coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson", into = "SpectrumJson")]
pub struct SpectrumEstimate {
    components: DMatrix<f64>,
    gram_eigenvalues: Vec<f64>,
    coefficients: Option<Vec<f64>>,
}

impl SpectrumEstimate {
    /// Builds an estimate from explicit components (columns) and their Gram
    /// eigenvalues, checking orthonormality and ordering.
    pub fn from_parts(components: DMatrix<f64>, gram_eigenvalues: Vec<f64>) -> Result<Self> {
        if components.ncols() == 0 || components.nrows() == 0 {
            return Err(Error::invalid("spectrum needs at least one component"));
        }
        if components.ncols() != gram_eigenvalues.len() {
            return Err(Error::Dimension(format!(
                "{} components but {} eigenvalues",
                components.ncols(),
                gram_eigenvalues.len()
            )));
        }
        if components.ncols() > components.nrows() {
            return Err(Error::Dimension("more components than nodes".into()));
        }
        let defect = orthonormality_defect(&components);
        if !(defect <= ORTHONORMALITY_TOL) {
            return Err(Error::invalid(format!(
                "components are not orthonormal (defect {defect:.3e})"
            )));
        }
        if gram_eigenvalues.iter().any(|g| !g.is_finite() || *g < -ORTHONORMALITY_TOL) {
            return Err(Error::invalid("Gram eigenvalues must be finite and nonnegative"));
        }
        if gram_eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("Gram eigenvalues must be non-increasing"));
        }
        let gram_eigenvalues = gram_eigenvalues.into_iter().map(|g| g.max(0.0)).collect();
        Ok(Self {
            components,
            gram_eigenvalues,
            coefficients: None,
        })
    }

    /// Attaches normalized frequency coefficients (`σ_1 = 1`, all in `[0, 1]`).
    pub fn with_coefficients(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.basis_size() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} components",
                sigma.len(),
                self.basis_size()
            )));
        }
        if sigma.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid("coefficients must lie in [0, 1]"));
        }
        if sigma[0] != 1.0 {
            return Err(Error::invalid("the leading coefficient must be exactly 1"));
        }
        self.coefficients = Some(sigma);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.components.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.components.nrows() == 0
    }

    /// Number of retained components, `E_basis`.
    pub fn basis_size(&self) -> usize {
        self.components.ncols()
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.gram_eigenvalues
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        self.coefficients.as_deref()
    }

    fn require_coefficients(&self) -> Result<&[f64]> {
        self.coefficients.as_deref().ok_or(Error::MissingCoefficients)
    }

    /// Components reordered by descending coefficient (stable, so equal
    /// coefficients keep their eigenvalue order).
    pub fn ranked(&self) -> Result<Self> {
        let sigma = self.require_coefficients()?;
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        let components = self.components.select_columns(&order);
        Ok(Self {
            components,
            gram_eigenvalues: order.iter().map(|&i| self.gram_eigenvalues[i]).collect(),
            coefficients: Some(order.iter().map(|&i| sigma[i]).collect()),
        })
    }

    /// Coefficients extended with zeros to one value per node, the form used
    /// for eigenvalue-distribution curves.
    pub fn padded_coefficients(&self) -> Result<Vec<f64>> {
        let mut sigma = self.require_coefficients()?.to_vec();
        sigma.resize(self.len(), 0.0);
        Ok(sigma)
    }

    fn check_signal(&self, signal: &DVector<f64>) -> Result<()> {
        if signal.len() != self.len() {
            return Err(Error::Dimension(format!(
                "signal of length {} for {} nodes",
                signal.len(),
                self.len()
            )));
        }
        Ok(())
    }

    fn weighted_projection(&self, signal: &DVector<f64>, weights: &[f64]) -> DVector<f64> {
        let spectral = self.components.tr_mul(signal);
        let scaled = DVector::from_iterator(
            weights.len(),
            spectral.iter().zip(weights).map(|(c, w)| c * w),
        );
        &self.components * scaled
    }
}

fn orthonormality_defect(components: &DMatrix<f64>) -> f64 {
    let gram = components.tr_mul(components);
    let e = gram.nrows();
    (gram - DMatrix::<f64>::identity(e, e)).amax()
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    g: Vec<f64>,
    sigma: Option<Vec<f64>>,
    /// One array of N entries per component.
    components: Vec<Vec<f64>>,
}

impl From<SpectrumEstimate> for SpectrumJson {
    fn from(s: SpectrumEstimate) -> Self {
        SpectrumJson {
            components: s
                .components
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
            g: s.gram_eigenvalues,
            sigma: s.coefficients,
        }
    }
}

impl TryFrom<SpectrumJson> for SpectrumEstimate {
    type Error = Error;

    fn try_from(j: SpectrumJson) -> Result<Self> {
        let n = j.components.first().map_or(0, Vec::len);
        if j.components.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("ragged component arrays".into()));
        }
        let components = DMatrix::from_fn(n, j.components.len(), |i, r| j.components[r][i]);
        let estimate = SpectrumEstimate::from_parts(components, j.g)?;
        match j.sigma {
            Some(sigma) => estimate.with_coefficients(sigma),
            None => Ok(estimate),
        }
    }
}

/// Subtracts each point's coordinate mean from its three coordinates.
///
/// Returns the centered matrix and the per-row means.
pub fn center_rows(cloud: &PointCloud) -> (MatrixXx3<f64>, Vec<f64>) {
    let coords = cloud.coords();
    let mut centered = coords.clone();
    let mut means = Vec::with_capacity(coords.nrows());
    for (i, mut row) in centered.row_iter_mut().enumerate() {
        let mean = (coords[(i, 0)] + coords[(i, 1)] + coords[(i, 2)]) / 3.0;
        row.add_scalar_mut(-mean);
        means.push(mean);
    }
    (centered, means)
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
pub(crate) fn canonical_sign(mut v: nalgebra::DVectorViewMut<'_, f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Estimates the hypergraph spectral basis from a row-centered cloud.
pub fn estimate_spectrum(centered: &MatrixXx3<f64>) -> Result<SpectrumEstimate> {
    let n = centered.nrows();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 points, got {n}")));
    }
    for (i, row) in centered.row_iter().enumerate() {
        let scale = row.amax().max(1.0);
        if row.sum().abs() > 1e-8 * scale {
            return Err(Error::invalid(format!("row {i} is not centered")));
        }
    }

    let dense = DMatrix::from_fn(n, 3, |i, j| centered[(i, j)]);
    let qr = dense.qr();
    let q = qr.q();
    let r = qr.r();
    let svd = r.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let mut components = q * u.select_columns(&order);
    for c in 0..components.ncols() {
        canonical_sign(components.column_mut(c));
    }
    let gram: Vec<f64> = order.iter().map(|&i| sv[i] * sv[i]).collect();

    if gram.iter().all(|&g| g < DEGENERATE_RATIO * n as f64) {
        return Err(Error::DegenerateSpectrum(
            "all points have equal coordinates in every axis".into(),
        ));
    }
    SpectrumEstimate::from_parts(components, gram)
}

/// Supporting-matrix action `V diag(σ) V^T x`, evaluated component by component.
pub fn apply_supporting_matrix(
    signal: &DVector<f64>,
    spectrum: &SpectrumEstimate,
) -> Result<DVector<f64>> {
    let sigma = spectrum.require_coefficients()?;
    spectrum.check_signal(signal)?;
    Ok(spectrum.weighted_projection(signal, sigma))
}

/// τ-step hypergraph shift `V diag(σ)^τ V^T x`.
///
/// `tau = 0` projects onto the retained components with unit weights.
pub fn shift(signal: &DVector<f64>, spectrum: &SpectrumEstimate, tau: u32) -> Result<DVector<f64>> {
    let sigma = spectrum.require_coefficients()?;
    spectrum.check_signal(signal)?;
    let tau = i32::try_from(tau).map_err(|_| Error::invalid("shift step too large"))?;
    let weights: Vec<f64> = sigma.iter().map(|s| s.powi(tau)).collect();
    Ok(spectrum.weighted_projection(signal, &weights))
}

/// Result of testing an ensemble for hypergraph weak-sense stationarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationarityDiagnostic {
    /// Largest absolute per-node ensemble mean.
    pub mean_norm: f64,
    /// Off-diagonal over diagonal Frobenius norm of the covariance expressed
    /// in the spectral basis.
    pub offdiag_ratio: f64,
    pub pass: bool,
}

/// Checks the two stationarity conditions on an N×m ensemble of observations:
/// zero mean, and a covariance diagonalized by the retained spectral basis.
pub fn check_stationarity(
    ensemble: &DMatrix<f64>,
    spectrum: &SpectrumEstimate,
    tol: f64,
) -> Result<StationarityDiagnostic> {
    let m = ensemble.ncols();
    if m < 2 {
        return Err(Error::invalid(format!("need at least 2 observations, got {m}")));
    }
    if ensemble.nrows() != spectrum.len() {
        return Err(Error::Dimension(format!(
            "ensemble has {} rows for {} nodes",
            ensemble.nrows(),
            spectrum.len()
        )));
    }
    let mean_norm = ensemble
        .row_iter()
        .map(|row| (row.sum() / m as f64).abs())
        .fold(0.0, f64::max);

    // V^T C V = (V^T X)(V^T X)^T / m, never forming the N×N covariance.
    let projected = spectrum.components.tr_mul(ensemble);
    let cov = (&projected * projected.transpose()) / m as f64;
    let (mut diag, mut off) = (0.0, 0.0);
    for ((i, j), v) in cov
        .iter()
        .enumerate()
        .map(|(idx, v)| ((idx % cov.nrows(), idx / cov.nrows()), v))
    {
        if i == j {
            diag += v * v;
        } else {
            off += v * v;
        }
    }
    let offdiag_ratio = if diag > 0.0 {
        (off / diag).sqrt()
    } else if off > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(StationarityDiagnostic {
        mean_norm,
        offdiag_ratio,
        pass: mean_norm <= tol && offdiag_ratio <= tol,
    })
}
