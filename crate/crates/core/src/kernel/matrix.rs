use nalgebra::DMatrix;

use super::Kernel;
use crate::error::{Error, Result};
use crate::linalg::double_center;

/// The `n × n` matrix `[K(xᵢ, xⱼ)]` of a kernel over a sample.
#[derive(Debug, Clone)]
pub struct EmpiricalKernelMatrix {
    points: Vec<f64>,
    matrix: DMatrix<f64>,
    centered: bool,
}

pub fn build_empirical_matrix<K: Kernel + ?Sized>(k: &K, sample: &[f64]) -> Result<EmpiricalKernelMatrix> {
    EmpiricalKernelMatrix::build(k, sample)
}

impl EmpiricalKernelMatrix {
    pub fn build<K: Kernel + ?Sized>(k: &K, sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { points: sample.to_vec(), matrix: k.gram(sample)?, centered: false })
    }

    /// Wraps an existing symmetric matrix.
    pub fn from_matrix(points: Vec<f64>, matrix: DMatrix<f64>, centered: bool) -> Result<Self> {
        if matrix.nrows() != points.len() || matrix.ncols() != points.len() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for {} points",
                matrix.nrows(),
                matrix.ncols(),
                points.len()
            )));
        }
        Ok(Self { points, matrix, centered })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Empirical centering `(I - P₁) M (I - P₁)` with `P₁ = 11ᵀ/n`.
    /// Centering is a projection, so an already centered matrix is returned as is.
    pub fn empirical_center(&self) -> Self {
        if self.centered {
            return self.clone();
        }
        Self { points: self.points.clone(), matrix: double_center(&self.matrix), centered: true }
    }
}

pub fn empirical_center_matrix(m: &EmpiricalKernelMatrix) -> EmpiricalKernelMatrix {
    m.empirical_center()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::kernel::KernelSpec;

    #[test]
    fn identity_matrix_on_repeated_points() {
        let m = build_empirical_matrix(&KernelSpec::Identity, &[1.0, 1.0, 2.0]).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.matrix(), &expect);
    }

    #[test]
    fn normal_matrix_at_coincident_points() {
        let m = build_empirical_matrix(&KernelSpec::normal(1.0).unwrap(), &[0.0, 0.0]).unwrap();
        let v = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(m.matrix().iter().all(|&x| (x - v).abs() < 1e-15));
    }

    #[test]
    fn two_by_two_centering_by_hand() {
        let (a, b) = (3.0, 1.25);
        let m = EmpiricalKernelMatrix::from_matrix(vec![0.0, 1.0], DMatrix::from_row_slice(2, 2, &[a, b, b, a]), false)
            .unwrap();
        let c = m.empirical_center();
        let d = (a - b) / 2.0;
        let expect = DMatrix::from_row_slice(2, 2, &[d, -d, -d, d]);
        assert!((c.matrix() - expect).norm() < 1e-15);
        assert!(c.is_centered());
    }

    #[test]
    fn constant_matrix_centers_to_zero_and_centering_is_idempotent() {
        let m = EmpiricalKernelMatrix::from_matrix(vec![0.0; 4], DMatrix::from_element(4, 4, 2.0), false).unwrap();
        let c = m.empirical_center();
        assert!(c.matrix().norm() < 1e-15);
        assert_eq!(c.empirical_center().matrix(), c.matrix());
        assert!(matches!(
            EmpiricalKernelMatrix::from_matrix(vec![0.0; 3], DMatrix::zeros(2, 2), false),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(matches!(build_empirical_matrix(&KernelSpec::Cvm, &[]), Err(Error::EmptySample)));
    }

    proptest! {
        #[test]
        fn gram_is_symmetric_with_maximal_diagonal(xs in prop::collection::vec(-5.0f64..5.0, 1..25), h2 in 0.05f64..4.0) {
            let m = build_empirical_matrix(&KernelSpec::normal(h2).unwrap(), &xs).unwrap();
            let g = m.matrix();
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    prop_assert_eq!(g[(i, j)], g[(j, i)]);
                    prop_assert!(g[(i, j)] <= g[(i, i)]);
                }
            }
            let c = m.empirical_center();
            for i in 0..xs.len() {
                prop_assert!(c.matrix().row(i).sum().abs() < 1e-10);
            }
        }
    }
}
