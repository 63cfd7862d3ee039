//! Dual projected-gradient solver for separable box QPs with linear
//! inequality constraints:
//!
//! ```text
//! minimize  Σ_j ½ h_j x_j² − b_j x_j
//! subject to lo ≤ x ≤ hi,  a_t · x ≥ d_t
//! ```
//!
//! With a diagonal Hessian the Lagrangian minimizer over the box has a closed
//! form, so the dual reduces to a smooth concave problem over `μ ≥ 0` that is
//! maximized by accelerated projected gradient ascent. Constraints enter a
//! working set only once they are violated, which keeps the inner problem
//! small when most sampled constraints are slack.

use crate::error::{Error, Result};

const MIN_CURVATURE: f64 = 1e-12;
const FEASIBILITY_TOL: f64 = 1e-10;
const BATCH: usize = 32;

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct SeparableQp {
    pub h: Vec<f64>,
    pub b: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub(crate) struct QpSolution {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub iterations: usize,
}

impl SeparableQp {
    fn curvature(&self) -> Vec<f64> {
        self.h.iter().map(|h| h.max(MIN_CURVATURE)).collect()
    }

    fn primal(&self, h: &[f64], rows: &[Constraint], mu: &[f64], x: &mut [f64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            let mut g = self.b[j];
            for (row, m) in rows.iter().zip(mu) {
                g += m * row.coeffs[j];
            }
            *xj = (g / h[j]).clamp(self.lo, self.hi);
        }
    }

    /// Solves to an absolute complementarity gap of `gap_tol`.
    pub fn solve(&self, gap_tol: f64, max_iter: usize) -> Result<QpSolution> {
        let n = self.h.len();
        let h = self.curvature();

        // Normalized rows; a zero row is either vacuous or impossible.
        let mut rows = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let norm = c.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                if c.rhs > FEASIBILITY_TOL {
                    return Err(infeasible(0));
                }
                continue;
            }
            // Unreachable even at the most favourable corner of the box.
            let best: f64 = c
                .coeffs
                .iter()
                .map(|a| if *a > 0.0 { a * self.hi } else { a * self.lo })
                .sum();
            if best < c.rhs - FEASIBILITY_TOL * norm {
                return Err(infeasible(0));
            }
            rows.push(Constraint {
                coeffs: c.coeffs.iter().map(|a| a / norm).collect(),
                rhs: c.rhs / norm,
            });
        }

        let mut x = vec![0.0; n];
        self.primal(&h, &[], &[], &mut x);
        let mut active: Vec<usize> = Vec::new();
        let mut mu: Vec<f64> = Vec::new();
        let mut iterations = 0;

        loop {
            let mut violated: Vec<(usize, f64)> = rows
                .iter()
                .enumerate()
                .filter(|(t, _)| !active.contains(t))
                .map(|(t, r)| (t, r.rhs - dot(&r.coeffs, &x)))
                .filter(|(_, v)| *v > FEASIBILITY_TOL)
                .collect();
            if violated.is_empty() {
                return Ok(QpSolution { x, iterations });
            }
            violated.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (t, _) in violated.into_iter().take(BATCH) {
                active.push(t);
                mu.push(0.0);
            }
            let working: Vec<Constraint> = active.iter().map(|&t| rows[t].clone()).collect();
            iterations += self.solve_dual(&h, &working, &mut mu, &mut x, gap_tol, max_iter - iterations.min(max_iter))?;
            if iterations >= max_iter {
                return Err(Error::Convergence {
                    iterations,
                    reason: "iteration budget exhausted".into(),
                });
            }
        }
    }

    fn solve_dual(
        &self,
        h: &[f64],
        rows: &[Constraint],
        mu: &mut [f64],
        x: &mut [f64],
        gap_tol: f64,
        budget: usize,
    ) -> Result<usize> {
        let lipschitz: f64 = rows
            .iter()
            .map(|r| r.coeffs.iter().zip(h).map(|(a, h)| a * a / h).sum::<f64>())
            .sum();
        let step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);
        let mut prev = mu.to_vec();
        let mut y = mu.to_vec();
        let mut momentum = 1.0f64;

        for it in 1..=budget {
            self.primal(h, rows, &y, x);
            let mut next = vec![0.0; mu.len()];
            for ((n, yt), r) in next.iter_mut().zip(&y).zip(rows) {
                *n = (yt + step * (r.rhs - dot(&r.coeffs, x))).max(0.0);
            }
            let momentum_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / momentum_next;
            for ((yt, n), p) in y.iter_mut().zip(&next).zip(&prev) {
                *yt = n + beta * (n - p);
            }
            momentum = momentum_next;
            prev.copy_from_slice(&next);
            mu.copy_from_slice(&next);

            if it % 10 == 0 || it == budget {
                self.primal(h, rows, mu, x);
                let mut worst = 0.0f64;
                let mut gap = 0.0;
                for (r, m) in rows.iter().zip(mu.iter()) {
                    let slack = dot(&r.coeffs, x) - r.rhs;
                    worst = worst.max(-slack);
                    gap += m * slack;
                }
                if worst <= FEASIBILITY_TOL && gap.abs() <= gap_tol {
                    return Ok(it);
                }
                if mu.iter().any(|m| !m.is_finite()) {
                    return Err(infeasible(it));
                }
            }
        }
        self.primal(h, rows, mu, x);
        Err(Error::Convergence {
            iterations: budget,
            reason: "dual ascent stalled; sampled constraints may be infeasible".into(),
        })
    }
}

fn infeasible(iterations: usize) -> Error {
    Error::Convergence {
        iterations,
        reason: "sampled constraints are infeasible over the coefficient box".into(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
