//! Estimation of the normalized frequency coefficients σ.
//!
//! The coefficients minimize the total variation of the three centered
//! coordinate signals over the supporting matrix plus an energy penalty,
//!
//! ```text
//! Σ_i ‖X_i − V diag(σ) Vᵀ X_i‖² + β σᵀσ,   0 ≤ σ_r ≤ σ_1 = 1,
//! ```
//!
//! which in the spectral basis is `Σ_r (1 − σ_r)² G_r + β σ_r²` with
//! `G_r = Σ_i (f_rᵀ X_i)²`. Without the adjacency-tensor sign constraint the
//! problem is separable and solved in closed form; the sampled mode enforces
//! that constraint on a random subset of index triples.

mod qp;

use nalgebra::MatrixXx3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::spectral::SpectrumEstimate;
use qp::{Constraint, SeparableQp};

/// Tensor entries below this trigger the constrained solve.
pub const TENSOR_VIOLATION_TOL: f64 = 1e-9;
pub const DEFAULT_CONSTRAINT_SAMPLES: usize = 100_000;
const QP_MAX_ITER: usize = 100_000;
const QP_OBJECTIVE_TOL: f64 = 1e-8;

/// How the adjacency-tensor nonnegativity constraint is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum ConstraintMode {
    /// Constraint dropped; closed-form solution.
    Relaxed,
    /// Constraint enforced on `n_samples` random index triples.
    Sampled { n_samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProblem {
    fourier_energy: Vec<f64>,
    beta: f64,
    constraint_mode: ConstraintMode,
}

impl CoefficientProblem {
    pub fn new(fourier_energy: Vec<f64>, beta: f64, constraint_mode: ConstraintMode) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be finite and nonnegative, got {beta}")));
        }
        if fourier_energy.is_empty() {
            return Err(Error::invalid("no spectral energies"));
        }
        if fourier_energy.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::invalid("spectral energies must be finite and nonnegative"));
        }
        if fourier_energy[1..].iter().any(|g| *g > fourier_energy[0]) {
            return Err(Error::invalid("the anchored component must carry the largest energy"));
        }
        Ok(Self {
            fourier_energy,
            beta,
            constraint_mode,
        })
    }

    /// Builds the problem from a row-centered cloud and its spectrum.
    pub fn from_centered(
        centered: &MatrixXx3<f64>,
        spectrum: &SpectrumEstimate,
        beta: f64,
        constraint_mode: ConstraintMode,
    ) -> Result<Self> {
        let mut energy = fourier_energy(centered, spectrum)?;
        // Rounding can leave G_1 a few ulps below a nominally equal G_r.
        let lead = energy[0];
        for g in energy.iter_mut().skip(1) {
            *g = g.min(lead);
        }
        Self::new(energy, beta, constraint_mode)
    }

    pub fn fourier_energy(&self) -> &[f64] {
        &self.fourier_energy
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn constraint_mode(&self) -> ConstraintMode {
        self.constraint_mode
    }

    /// `Σ_r (1 − σ_r)² G_r + β σ_r²`.
    pub fn objective(&self, sigma: &[f64]) -> f64 {
        self.fourier_energy
            .iter()
            .zip(sigma)
            .map(|(g, s)| (1.0 - s).powi(2) * g + self.beta * s * s)
            .sum()
    }

    /// The separable closed form, `σ_r = G_r / (G_r + β)` with `σ_1 = 1`.
    pub fn relaxed_solution(&self) -> Vec<f64> {
        let mut sigma: Vec<f64> = self
            .fourier_energy
            .iter()
            .map(|&g| {
                let denom = g + self.beta;
                if denom > 0.0 {
                    (g / denom).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        sigma[0] = 1.0;
        sigma
    }
}

/// `G_r = Σ_i (f_rᵀ X_i)²` for each retained component.
pub fn fourier_energy(centered: &MatrixXx3<f64>, spectrum: &SpectrumEstimate) -> Result<Vec<f64>> {
    check_rows(centered, spectrum)?;
    let coeffs = spectrum.components().tr_mul(centered);
    Ok(coeffs.row_iter().map(|r| r.norm_squared()).collect())
}

fn check_rows(centered: &MatrixXx3<f64>, spectrum: &SpectrumEstimate) -> Result<()> {
    if centered.nrows() != spectrum.len() {
        return Err(Error::Dimension(format!(
            "{} points for a spectrum over {} nodes",
            centered.nrows(),
            spectrum.len()
        )));
    }
    Ok(())
}

/// Total variation `Σ_i ‖X_i − P_s X_i‖²` with `P_s = V diag(σ) Vᵀ`.
pub fn total_variation(
    centered: &MatrixXx3<f64>,
    spectrum: &SpectrumEstimate,
    sigma: &[f64],
) -> Result<f64> {
    check_rows(centered, spectrum)?;
    if sigma.len() != spectrum.basis_size() {
        return Err(Error::invalid(format!(
            "{} coefficients for {} components",
            sigma.len(),
            spectrum.basis_size()
        )));
    }
    if sigma.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::invalid("coefficients must lie in [0, 1]"));
    }
    let v = spectrum.components();
    let mut coeffs = v.tr_mul(centered);
    for (mut row, s) in coeffs.row_iter_mut().zip(sigma) {
        row *= *s;
    }
    let residual = centered - v * coeffs;
    Ok(residual.norm_squared())
}

/// Adjacency-tensor entry `Σ_r σ_r f_{r,i} f_{r,j} f_{r,l}`.
pub fn tensor_entry(spectrum: &SpectrumEstimate, sigma: &[f64], triple: [usize; 3]) -> f64 {
    let v = spectrum.components();
    sigma
        .iter()
        .enumerate()
        .map(|(r, s)| s * v[(triple[0], r)] * v[(triple[1], r)] * v[(triple[2], r)])
        .sum()
}

/// Index triples drawn for the sampled constraint mode.
pub fn sample_triples(n: usize, n_samples: usize, seed: u64) -> Vec<[usize; 3]> {
    let mut rng = seed::rng(seed);
    (0..n_samples)
        .map(|_| std::array::from_fn(|_| rng.random_range(0..n)))
        .collect()
}

/// Estimates σ for `spectrum` under `problem`.
pub fn estimate_coefficients(
    spectrum: &SpectrumEstimate,
    problem: &CoefficientProblem,
) -> Result<Vec<f64>> {
    let e = spectrum.basis_size();
    if problem.fourier_energy.len() != e {
        return Err(Error::Dimension(format!(
            "{} energies for {} components",
            problem.fourier_energy.len(),
            e
        )));
    }
    let relaxed = problem.relaxed_solution();
    let (n_samples, seed) = match problem.constraint_mode {
        ConstraintMode::Relaxed => return Ok(relaxed),
        ConstraintMode::Sampled { n_samples, seed } => (n_samples, seed),
    };
    if e == 1 || n_samples == 0 {
        return Ok(relaxed);
    }

    let triples = sample_triples(spectrum.len(), n_samples, seed);
    let violated = triples
        .iter()
        .any(|&t| tensor_entry(spectrum, &relaxed, t) < -TENSOR_VIOLATION_TOL);
    if !violated {
        return Ok(relaxed);
    }

    // Free variables are σ_2..σ_E; σ_1 = 1 moves into the right-hand side.
    let v = spectrum.components();
    let constraints = triples
        .iter()
        .map(|&[i, j, l]| {
            let prod = |r: usize| v[(i, r)] * v[(j, r)] * v[(l, r)];
            Constraint {
                coeffs: (1..e).map(prod).collect(),
                rhs: -prod(0),
            }
        })
        .collect();
    let g = &problem.fourier_energy[1..];
    let qp = SeparableQp {
        h: g.iter().map(|g| 2.0 * (g + problem.beta)).collect(),
        b: g.iter().map(|g| 2.0 * g).collect(),
        lo: 0.0,
        hi: 1.0,
        constraints,
    };
    let solution = qp.solve(QP_OBJECTIVE_TOL, QP_MAX_ITER)?;
    let mut sigma = Vec::with_capacity(e);
    sigma.push(1.0);
    sigma.extend(solution.x.iter().map(|s| s.clamp(0.0, 1.0)));
    Ok(sigma)
}
