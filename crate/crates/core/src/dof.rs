//! Pearson scaling, spectral degrees of freedom and cumulant diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{EmpiricalKernelMatrix, Kernel};
use crate::spectral::{empirical_traces, TraceEstimates, TraceMethod};

/// Highest cumulant order reported by default.
pub const DEFAULT_MAX_ORDER: usize = 8;

fn check_sq(trace_sq: f64) -> Result<()> {
    if trace_sq > 0.0 && trace_sq.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("sum of squared eigenvalues must be positive, got {trace_sq}")))
    }
}

/// `α = Σλ / Σλ²`, the scale that brings a kernel closest to the Pearson kernel.
pub fn pearson_scale(trace: f64, trace_sq: f64) -> Result<f64> {
    check_sq(trace_sq)?;
    Ok(trace / trace_sq)
}

/// `(Σλ)² / Σλ²`.
pub fn sdof(trace: f64, trace_sq: f64) -> Result<f64> {
    check_sq(trace_sq)?;
    Ok(trace * trace / trace_sq)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("rho must lie in (0, 1), got {rho}")))
    }
}

/// Degrees of freedom of the centered Poisson kernel, `2(1 + ρ)/(1 - ρ)`.
pub fn poisson_dof(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(2.0 * (1.0 + rho) / (1.0 - rho))
}

/// The `ρ` whose centered Poisson kernel has `dof` degrees of freedom.
pub fn poisson_rho_for_dof(dof: f64) -> Result<f64> {
    if !(dof > 2.0 && dof.is_finite()) {
        return Err(Error::param(format!("poisson degrees of freedom exceed 2, got {dof}")));
    }
    Ok((dof - 2.0) / (dof + 2.0))
}

/// Scaled chi-square `χ²_dof / scale` with the given mean and variance:
/// returns `(scale, dof) = (2 mean / variance, 2 mean² / variance)`.
pub fn satterthwaite_match(mean: f64, variance: f64) -> Result<(f64, f64)> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::param(format!("variance must be positive, got {variance}")));
    }
    Ok((2.0 * mean / variance, 2.0 * mean * mean / variance))
}

fn gammas(lambda: &[f64]) -> Result<Vec<f64>> {
    let ss: f64 = lambda.iter().map(|l| l * l).sum();
    if !(ss > 0.0 && ss.is_finite()) || lambda.iter().any(|l| *l < 0.0) {
        return Err(Error::param("weights must be nonnegative with a positive sum of squares"));
    }
    let norm = ss.sqrt();
    Ok(lambda.iter().map(|l| l / norm).collect())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `r`-th cumulant of the standardized chi-star law `(χ* - Σλ)/√(2Σλ²)`:
/// `2^{r-1} (r-1)! 2^{-r/2} Σγᵢʳ` with `γᵢ = λᵢ/√Σλ²`.
pub fn chi_star_cumulant(lambda: &[f64], r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::param(format!("cumulant order must be at least 2, got {r}")));
    }
    let g = gammas(lambda)?;
    let s: f64 = g.iter().map(|x| x.powi(r as i32)).sum();
    let rf = r as f64;
    Ok(((rf - 1.0) * 2f64.ln() + ln_factorial(r - 1) - 0.5 * rf * 2f64.ln()).exp() * s)
}

/// Ratio of the `r`-th standardized cumulant of `χ*(λ)` to that of the
/// matched chi-square with `R = sdof(λ)`: `Σγᵢʳ R^{r/2 - 1}`. At least one.
pub fn cumulant_ratio(lambda: &[f64], r: usize) -> Result<f64> {
    if r < 3 {
        return Err(Error::param(format!("cumulant ratio needs order at least 3, got {r}")));
    }
    let g = gammas(lambda)?;
    let s1: f64 = g.iter().sum();
    let sr: f64 = g.iter().map(|x| x.powi(r as i32)).sum();
    // R^{r/2-1} with R = (Σγ)² equals (Σγ)^{r-2}
    Ok(sr * s1.powi(r as i32 - 2))
}

/// [`cumulant_ratio`] of the centered Poisson spectrum in closed form:
/// `Σλʳ (Σλ)^{r-2} / (Σλ²)^{r-1}` with geometric sums.
pub fn poisson_cumulant_ratio(rho: f64, r: usize) -> Result<f64> {
    check_rho(rho)?;
    if r < 3 {
        return Err(Error::param(format!("cumulant ratio needs order at least 3, got {r}")));
    }
    let power_sum = |k: i32| 2.0 * rho.powi(k) / (1.0 - rho.powi(k));
    let ri = r as i32;
    Ok(power_sum(ri) * power_sum(1).powi(ri - 2) / power_sum(2).powi(ri - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofSource {
    Analytic,
    Quadrature,
    Empirical,
}

impl From<TraceMethod> for DofSource {
    fn from(m: TraceMethod) -> Self {
        match m {
            TraceMethod::Analytic => DofSource::Analytic,
            TraceMethod::Quadrature => DofSource::Quadrature,
            TraceMethod::Empirical => DofSource::Empirical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofReport {
    pub trace: f64,
    pub trace_sq: f64,
    pub scale: f64,
    pub dof: f64,
    pub source: DofSource,
}

impl DofReport {
    pub fn from_traces(t: &TraceEstimates) -> Result<Self> {
        Ok(Self {
            trace: t.trace,
            trace_sq: t.trace_sq,
            scale: pearson_scale(t.trace, t.trace_sq)?,
            dof: sdof(t.trace, t.trace_sq)?,
            source: t.method.into(),
        })
    }

    /// Degrees of freedom estimated from a sample through the empirically
    /// centered kernel matrix.
    pub fn empirical<K: Kernel + ?Sized>(k: &K, sample: &[f64]) -> Result<Self> {
        let m = EmpiricalKernelMatrix::build(k, sample)?.empirical_center();
        Self::from_traces(&empirical_traces(&m))
    }
}

/// Normed cumulants `Σγᵢʳ` and the standardized third cumulant ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantDiagnostics {
    pub gamma: Vec<f64>,
    /// `(r, Σγᵢʳ)` for `r = 2..=max_order`.
    pub normed_cumulants: Vec<(usize, f64)>,
    pub skewness_ratio: f64,
}

impl CumulantDiagnostics {
    pub fn new(lambda: &[f64], max_order: usize) -> Result<Self> {
        if max_order < 3 {
            return Err(Error::param("cumulant diagnostics need order at least 3"));
        }
        let gamma = gammas(lambda)?;
        let normed_cumulants = (2..=max_order).map(|r| (r, gamma.iter().map(|g| g.powi(r as i32)).sum())).collect();
        Ok(Self { skewness_ratio: cumulant_ratio(lambda, 3)?, gamma, normed_cumulants })
    }
}

/// Advisory range for the degrees of freedom of a test on `n` points in
/// dimension `d`: at least `d(d+1)/2` and at most `n/5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRange {
    pub lower: f64,
    pub upper: f64,
    pub warning: Option<String>,
}

pub fn dof_heuristic_range(n: usize, d: usize) -> Result<HeuristicRange> {
    if n == 0 || d == 0 {
        return Err(Error::param("sample size and dimension must be positive"));
    }
    let lower = (d * (d + 1) / 2) as f64;
    let upper = n as f64 / 5.0;
    let warning = (lower > upper)
        .then(|| format!("range is inverted: {lower} suggested minimum exceeds n/5 = {upper}"));
    Ok(HeuristicRange { lower, upper, warning })
}
