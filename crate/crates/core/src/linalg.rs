//! Symmetric eigendecomposition and small matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
///
/// Column `j` of `vectors` is the unit eigenvector of `values[j]`. Equal
/// eigenvalues keep the solver's output order.
#[derive(Debug, Clone)]
pub struct SymmetricEigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(matrix: DMatrix<f64>) -> Result<SymmetricEigenpairs> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, matrix.ncols())));
    }
    if n == 0 {
        return Ok(SymmetricEigenpairs { values: Vec::new(), vectors: matrix });
    }
    let eig = SymmetricEigen::try_new(matrix, 1e-15, 0).ok_or(Error::EigenSolver)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymmetricEigenpairs { values, vectors })
}

/// Eigenvalues only, in descending order.
pub fn symmetric_eigenvalues(matrix: DMatrix<f64>) -> Result<Vec<f64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", matrix.nrows(), matrix.ncols())));
    }
    let mut values: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolver);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `(I - 11ᵀ/n) M (I - 11ᵀ/n)`.
pub fn double_center(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| m.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    DMatrix::from_fn(n, n, |i, j| m[(i, j)] - row_means[i] - col_means[j] + grand)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::SingularInformation)?;
    Ok(chol.inverse())
}
