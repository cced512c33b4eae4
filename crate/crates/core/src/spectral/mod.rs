//! Spectral decompositions of kernels with respect to a baseline measure.
//!
//! Closed forms are provided for the Poisson kernel on the circle, the
//! Cramér–von Mises kernel under uniform(0, 1) and the normal kernel under a
//! normal baseline. Any other kernel is decomposed from a matrix: either the
//! empirical `n × n` matrix of a sample or a quadrature (Nyström) matrix.

mod hermite;
mod mehler;
mod numerical;
mod traces;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{BaselineMeasure, PoissonKernel};

pub use hermite::{damped_hermite, hermite, normalized_hermite_all};
pub use mehler::{mehler_params, mehler_root, MehlerParameters};
pub use numerical::{empirical_eigs, empirical_traces, monte_carlo_spectrum, nystrom_spectrum};
pub use traces::{trace_analytic, trace_sq_analytic, traces, TraceTarget};

/// Eigenvalue ratio `λ_N / λ_1` below which closed-form spectra are truncated.
pub const TRUNCATION_RATIO: f64 = 1e-12;
/// Maximum number of terms kept by the truncation policy.
pub const MAX_TERMS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    Analytic,
    Quadrature,
    Empirical,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    Analytic,
    Quadrature,
    Empirical,
}

/// `Σλ` and `Σλ²` of a kernel under a measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimates {
    pub trace: f64,
    pub trace_sq: f64,
    pub method: TraceMethod,
}

impl TraceEstimates {
    /// `(Σλ)² / Σλ²`.
    pub fn dof(&self) -> f64 {
        self.trace * self.trace / self.trace_sq
    }

    /// `Σλ / Σλ²`.
    pub fn scale(&self) -> f64 {
        self.trace / self.trace_sq
    }
}

#[derive(Debug, Clone)]
pub enum Eigenfunctions {
    /// Damped Hermite functions.
    Mehler(MehlerParameters),
    /// `1, √2 cos kθ, √2 sin kθ, ...`; the constant is absent when centered.
    Fourier { kernel: PoissonKernel, centered: bool },
    /// `√2 cos(jπu)`, `j = 1, 2, ...`.
    Cosine,
    /// Values at a finite set of points (column `j` holds `φ_j`).
    Sampled { points: Vec<f64>, values: DMatrix<f64> },
}

/// Eigenvalues in descending order with their eigenfunctions.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenfunctions: Eigenfunctions,
    baseline: BaselineMeasure,
    tail: f64,
    tail_sq: f64,
    method: SpectrumMethod,
}

impl SpectralDecomposition {
    /// Builds a decomposition; eigenvalues are sorted descending and
    /// round-off negatives are set to zero.
    pub fn new(
        mut eigenvalues: Vec<f64>,
        eigenfunctions: Eigenfunctions,
        baseline: BaselineMeasure,
        tail: f64,
        tail_sq: f64,
        method: SpectrumMethod,
    ) -> Result<Self> {
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("eigenvalues must be finite"));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::param("eigenvalues must be sorted in descending order"));
        }
        for v in &mut eigenvalues {
            *v = v.max(0.0);
        }
        Ok(Self { eigenvalues, eigenfunctions, baseline, tail: tail.max(0.0), tail_sq: tail_sq.max(0.0), method })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn baseline(&self) -> &BaselineMeasure {
        &self.baseline
    }

    pub fn eigenfunctions(&self) -> &Eigenfunctions {
        &self.eigenfunctions
    }

    pub fn method(&self) -> SpectrumMethod {
        self.method
    }

    /// `Σ_{j>N} λ_j` for the dropped eigenvalues.
    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    /// `Σ_{j>N} λ_j²`.
    pub fn tail_sq_bound(&self) -> f64 {
        self.tail_sq
    }

    pub fn trace(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.eigenvalues) + self.tail
    }

    pub fn trace_sq(&self) -> f64 {
        let sq: Vec<f64> = self.eigenvalues.iter().map(|v| v * v).collect();
        crate::numeric::pairwise_sum(&sq) + self.tail_sq
    }

    pub fn traces(&self) -> TraceEstimates {
        let method = match self.method {
            SpectrumMethod::Analytic => TraceMethod::Analytic,
            SpectrumMethod::Quadrature | SpectrumMethod::MonteCarlo => TraceMethod::Quadrature,
            SpectrumMethod::Empirical => TraceMethod::Empirical,
        };
        TraceEstimates { trace: self.trace(), trace_sq: self.trace_sq(), method }
    }

    /// `φ_j(x)`. Matrix-based decompositions are only known at their own points.
    pub fn eigenfunction(&self, j: usize, x: f64) -> Result<f64> {
        if j >= self.len() {
            return Err(Error::param(format!("eigenfunction {j} of {} requested", self.len())));
        }
        match &self.eigenfunctions {
            Eigenfunctions::Mehler(p) => Ok(p.eigenfunction(j, x)),
            Eigenfunctions::Fourier { kernel, centered } => {
                let theta = kernel.angle(x)?;
                let idx = if *centered { j + 1 } else { j };
                if idx == 0 {
                    return Ok(1.0);
                }
                let k = (idx + 1) / 2;
                let arg = k as f64 * theta;
                Ok(std::f64::consts::SQRT_2 * if idx % 2 == 1 { arg.cos() } else { arg.sin() })
            }
            Eigenfunctions::Cosine => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Domain { point: x, domain: "[0, 1]" });
                }
                Ok(std::f64::consts::SQRT_2 * ((j + 1) as f64 * PI * x).cos())
            }
            Eigenfunctions::Sampled { points, values } => points
                .iter()
                .position(|&p| p == x)
                .map(|i| values[(i, j)])
                .ok_or_else(|| Error::Unsupported("eigenfunctions of a matrix spectrum are only known at its points".into())),
        }
    }

    /// The leading `n` terms, with the dropped ones moved into the tail.
    pub fn truncated(&self, n: usize) -> Self {
        if n >= self.len() {
            return self.clone();
        }
        let dropped = &self.eigenvalues[n..];
        let mut out = self.clone();
        out.tail += dropped.iter().sum::<f64>();
        out.tail_sq += dropped.iter().map(|v| v * v).sum::<f64>();
        out.eigenvalues.truncate(n);
        if let Eigenfunctions::Sampled { values, .. } = &mut out.eigenfunctions {
            *values = values.columns(0, n).into_owned();
        }
        out
    }
}

/// The Poisson kernel spectrum under the uniform law on its period: `1`
/// (uncentered only) followed by the pairs `ρᵏ, ρᵏ` for `k = 1..=pairs`.
pub fn poisson_spectrum(kernel: &PoissonKernel, pairs: usize, centered: bool) -> Result<SpectralDecomposition> {
    if pairs == 0 {
        return Err(Error::param("poisson spectrum needs at least one harmonic"));
    }
    let rho = kernel.rho();
    let mut values = Vec::with_capacity(2 * pairs + 1);
    if !centered {
        values.push(1.0);
    }
    let mut rk = 1.0;
    for _ in 0..pairs {
        rk *= rho;
        values.push(rk);
        values.push(rk);
    }
    let next = rk * rho;
    let tail = 2.0 * next / (1.0 - rho);
    let tail_sq = 2.0 * next * next / (1.0 - rho * rho);
    let (lo, hi) = kernel.interval();
    let baseline = if kernel.is_canonical() { BaselineMeasure::UniformCircle } else { BaselineMeasure::uniform(lo, hi)? };
    SpectralDecomposition::new(
        values,
        Eigenfunctions::Fourier { kernel: *kernel, centered },
        baseline,
        tail,
        tail_sq,
        SpectrumMethod::Analytic,
    )
}

/// Harmonic count meeting the truncation policy for a Poisson kernel.
pub fn poisson_pairs_for_ratio(rho: f64, ratio: f64, cap: usize) -> usize {
    let k = (ratio.ln() / rho.ln()).ceil();
    if k.is_finite() && k >= 1.0 {
        (k as usize).clamp(1, cap)
    } else {
        1
    }
}

/// Spectrum of the centered Cramér–von Mises kernel under uniform(0, 1):
/// `λ_j = 1 / (jπ)²` with eigenfunctions `√2 cos(jπu)`.
pub fn cvm_spectrum(terms: usize) -> Result<SpectralDecomposition> {
    if terms == 0 {
        return Err(Error::param("cvm spectrum needs at least one term"));
    }
    let values: Vec<f64> = (1..=terms).map(|j| 1.0 / (j as f64 * PI).powi(2)).collect();
    let tail = 1.0 / 6.0 - crate::numeric::pairwise_sum(&values);
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let tail_sq = 1.0 / 90.0 - crate::numeric::pairwise_sum(&sq);
    SpectralDecomposition::new(
        values,
        Eigenfunctions::Cosine,
        BaselineMeasure::uniform01(),
        tail,
        tail_sq,
        SpectrumMethod::Analytic,
    )
}

/// Mehler spectrum of `K_{h²}` under `N(0, σ²)` with `terms` eigenvalues.
pub fn normal_spectrum(h2: f64, sigma2: f64, terms: usize) -> Result<SpectralDecomposition> {
    normal_spectrum_at(h2, 0.0, sigma2, terms)
}

/// As [`normal_spectrum`] under `N(μ, σ²)`.
pub fn normal_spectrum_at(h2: f64, mean: f64, sigma2: f64, terms: usize) -> Result<SpectralDecomposition> {
    if terms == 0 {
        return Err(Error::param("normal spectrum needs at least one term"));
    }
    let p = MehlerParameters::new(h2, mean, sigma2)?;
    let values = (0..terms).map(|n| p.eigenvalue(n)).collect();
    SpectralDecomposition::new(
        values,
        Eigenfunctions::Mehler(p),
        BaselineMeasure::normal(mean, sigma2)?,
        p.tail(terms),
        p.tail_sq(terms),
        SpectrumMethod::Analytic,
    )
}

/// [`normal_spectrum_at`] truncated by the default policy.
pub fn normal_spectrum_auto(h2: f64, mean: f64, sigma2: f64) -> Result<SpectralDecomposition> {
    let p = MehlerParameters::new(h2, mean, sigma2)?;
    normal_spectrum_at(h2, mean, sigma2, p.terms_for_ratio(TRUNCATION_RATIO, MAX_TERMS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gaussian, Kernel, KernelSpec};
    use crate::quadrature::QuadratureRule;

    #[test]
    fn poisson_centered_values_and_traces() {
        let k = PoissonKernel::new(0.5).unwrap();
        let s = poisson_spectrum(&k, 30, true).unwrap();
        assert_eq!(&s.eigenvalues()[..4], &[0.5, 0.5, 0.25, 0.25]);
        assert!((s.trace() - 2.0).abs() < 1e-14);
        assert!((s.trace_sq() - 2.0 / 3.0).abs() < 1e-14);
        let u = poisson_spectrum(&k, 30, false).unwrap();
        assert_eq!(u.eigenvalues()[0], 1.0);
        assert!((u.trace() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_eigenfunctions_orthonormal() {
        let k = PoissonKernel::new(0.3).unwrap();
        let s = poisson_spectrum(&k, 6, false).unwrap();
        let rule = QuadratureRule::circle(256);
        for i in 0..s.len() {
            for j in 0..s.len() {
                let v = rule.integrate(|x| s.eigenfunction(i, x).unwrap() * s.eigenfunction(j, x).unwrap());
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "{i},{j}: {v}");
            }
        }
    }

    #[test]
    fn poisson_mercer_reconstruction() {
        let kernel = PoissonKernel::new(0.6).unwrap();
        let k = KernelSpec::Poisson(kernel);
        let s = poisson_spectrum(&kernel, 60, false).unwrap();
        for &(x, y) in &[(0.1, 0.2), (1.0, 4.0), (6.0, 0.3)] {
            let sum: f64 = (0..s.len())
                .map(|j| s.eigenvalues()[j] * s.eigenfunction(j, x).unwrap() * s.eigenfunction(j, y).unwrap())
                .sum();
            assert!((sum - k.eval(x, y).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn cvm_spectrum_and_tails() {
        let s = cvm_spectrum(50).unwrap();
        assert!((s.eigenvalues()[0] - 1.0 / (PI * PI)).abs() < 1e-16);
        assert!((s.trace() - 1.0 / 6.0).abs() < 1e-9);
        assert!((s.trace_sq() - 1.0 / 90.0).abs() < 1e-12);
        let rule = QuadratureRule::gauss_legendre(200, 0.0, 1.0);
        for i in 0..5 {
            for j in 0..5 {
                let v = rule.integrate(|x| s.eigenfunction(i, x).unwrap() * s.eigenfunction(j, x).unwrap());
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normal_spectrum_reconstruction_and_trace() {
        let s = normal_spectrum(1.0, 1.0, 40).unwrap();
        for &x in &[-2.0, -0.5, 0.0, 1.0, 2.5] {
            for &y in &[-1.0, 0.3, 2.0] {
                let phi_x = match s.eigenfunctions() {
                    Eigenfunctions::Mehler(p) => (p.eigenfunctions(40, x), p.eigenfunctions(40, y)),
                    _ => unreachable!(),
                };
                let sum: f64 = (0..40).map(|n| s.eigenvalues()[n] * phi_x.0[n] * phi_x.1[n]).sum();
                assert!((sum - gaussian(x - y, 1.0)).abs() < 1e-6);
            }
        }
        assert!((s.trace() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn truncation_moves_mass_to_tail() {
        let s = poisson_spectrum(&PoissonKernel::new(0.5).unwrap(), 20, true).unwrap();
        let t = s.truncated(4);
        assert_eq!(t.len(), 4);
        assert!((t.trace() - s.trace()).abs() < 1e-14);
        assert!((t.trace_sq() - s.trace_sq()).abs() < 1e-14);
        assert!(SpectralDecomposition::new(vec![0.1, 0.2], Eigenfunctions::Cosine, BaselineMeasure::uniform01(), 0.0, 0.0, SpectrumMethod::Analytic).is_err());
    }
}
