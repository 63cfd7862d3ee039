use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Full eigendecomposition of a dense symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub(crate) struct SymmetricEigen {
    pub values: Vec<f64>,
    vectors: Mat<f64>,
}

impl SymmetricEigen {
    /// Eigenvectors for the given eigenvalue positions, as columns.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        let n = self.vectors.nrows();
        DMatrix::from_fn(n, indices.len(), |i, c| self.vectors[(i, indices[c])])
    }
}

pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let raw: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let u = evd.U();
    let vectors = Mat::<f64>::from_fn(n, n, |i, c| u[(i, order[c])]);
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| raw[i]).collect(),
        vectors,
    })
}
