//! The normal kernel under a normal baseline: geometric eigenvalues and
//! damped Hermite eigenfunctions from Mehler's formula.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::hermite::normalized_hermite_all;
use crate::error::{Error, Result};

/// Constants of the Mehler decomposition of `K_{h²}` under `N(μ, σ²)`.
///
/// `a` and `alpha` are the values consistent with the eigen-equation; the
/// `printed_*` fields keep the alternative closed forms for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerParameters {
    pub h2: f64,
    pub mean: f64,
    pub sigma2: f64,
    /// `h² / σ²`.
    pub r: f64,
    /// Root of `r w = (1 - w)²` in `(0, 1)`.
    pub w: f64,
    pub a: f64,
    pub b: f64,
    /// Leading eigenvalue.
    pub alpha: f64,
    /// Eigenvalue ratio, equal to `w`.
    pub beta: f64,
    pub printed_a: f64,
    pub printed_alpha: f64,
}

/// The left root of `w² - (2 + r) w + 1 = 0`, written to avoid cancellation.
pub fn mehler_root(r: f64) -> f64 {
    2.0 / ((2.0 + r) + (r * r + 4.0 * r).sqrt())
}

pub fn mehler_params(h2: f64, sigma2: f64) -> Result<MehlerParameters> {
    MehlerParameters::new(h2, 0.0, sigma2)
}

impl MehlerParameters {
    pub fn new(h2: f64, mean: f64, sigma2: f64) -> Result<Self> {
        if !(h2 > 0.0 && h2.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::param(format!("mehler variances must be positive, got h2={h2}, sigma2={sigma2}")));
        }
        if !mean.is_finite() {
            return Err(Error::param("mehler baseline mean must be finite"));
        }
        let r = h2 / sigma2;
        let w = mehler_root(r);
        let b = ((1.0 - w) / h2).sqrt();
        let a = ((1.0 - w * w) / (2.0 * h2 * w)).sqrt();
        let alpha = (w / (2.0 * PI)).sqrt() / sigma2.sqrt();
        let printed_a = ((1.0 - w) * (1.0 - w) / (2.0 * h2 * w)).sqrt();
        let printed_alpha = (1.0 - w * w).sqrt() / (2.0 * PI.sqrt() * printed_a * sigma2.sqrt());
        Ok(Self { h2, mean, sigma2, r, w, a, b, alpha, beta: w, printed_a, printed_alpha })
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.alpha * self.beta.powi(n as i32)
    }

    /// `Σ_{n ≥ len} α βⁿ`.
    pub fn tail(&self, len: usize) -> f64 {
        self.eigenvalue(len) / (1.0 - self.beta)
    }

    /// `Σ_{n ≥ len} (α βⁿ)²`.
    pub fn tail_sq(&self, len: usize) -> f64 {
        self.eigenvalue(len).powi(2) / (1.0 - self.beta * self.beta)
    }

    /// Eigenfunctions `γ_0..γ_{len-1}` at `x`, orthonormal under `N(μ, σ²)`.
    pub fn eigenfunctions(&self, len: usize, x: f64) -> Vec<f64> {
        let z = x - self.mean;
        let scale = (std::f64::consts::SQRT_2 * self.a * self.sigma2.sqrt()).sqrt() * (-0.5 * self.b * self.b * z * z).exp();
        normalized_hermite_all(len, self.a * z).into_iter().map(|v| v * scale).collect()
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        self.eigenfunctions(n + 1, x)[n]
    }

    /// Number of terms needed for `λ_N / λ_1 < ratio`, capped at `cap`.
    pub fn terms_for_ratio(&self, ratio: f64, cap: usize) -> usize {
        let n = (ratio.ln() / self.beta.ln()).ceil();
        if n.is_finite() && n >= 1.0 {
            (n as usize).clamp(1, cap)
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gaussian;
    use crate::quadrature::QuadratureRule;

    #[test]
    fn root_equation_holds_across_ratios() {
        for &r in &[1e-4, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4] {
            let w = mehler_root(r);
            assert!(w > 0.0 && w < 1.0);
            assert!((r * w - (1.0 - w).powi(2)).abs() < 1e-12, "r={r}");
        }
        assert!((mehler_root(1.0) - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(mehler_root(1e8) < 1e-7);
        assert!(mehler_root(1e-10) > 1.0 - 1e-4);
    }

    #[test]
    fn constraint_and_printed_values() {
        for &(h2, s2) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.4)] {
            let p = mehler_params(h2, s2).unwrap();
            assert!((p.a * p.a - p.b * p.b - 1.0 / (2.0 * s2)).abs() < 1e-12);
            // the printed a² equals a² - b² of the consistent constants
            assert!((p.printed_a.powi(2) - (p.a * p.a - p.b * p.b)).abs() < 1e-12);
            let total = p.alpha / (1.0 - p.beta);
            assert!((total - 1.0 / (2.0 * PI * h2).sqrt()).abs() < 1e-12);
            assert!(p.printed_alpha.is_finite() && p.printed_alpha > 0.0);
        }
        assert!(mehler_params(0.0, 1.0).is_err());
        assert!(mehler_params(1.0, -1.0).is_err());
    }

    #[test]
    fn eigen_equation_holds_under_quadrature() {
        let p = MehlerParameters::new(0.8, 0.5, 1.3).unwrap();
        let rule = QuadratureRule::normal(120, 0.5, 1.3);
        for &x in &[-1.0, 0.2, 1.9] {
            for n in 0..6 {
                let lhs = rule.integrate(|y| gaussian(x - y, 0.8) * p.eigenfunction(n, y));
                let rhs = p.eigenvalue(n) * p.eigenfunction(n, x);
                assert!((lhs - rhs).abs() < 1e-10, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn truncation_policy() {
        let p = mehler_params(1.0, 1.0).unwrap();
        let n = p.terms_for_ratio(1e-12, 512);
        assert!(p.beta.powi(n as i32) < 1e-12);
        assert!(p.beta.powi(n as i32 - 1) >= 1e-12);
        let tiny = mehler_params(1e-6, 1.0).unwrap();
        assert_eq!(tiny.terms_for_ratio(1e-12, 512), 512);
    }
}
