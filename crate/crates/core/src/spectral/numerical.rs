//! Spectra read off finite matrices: empirical, quadrature and Monte Carlo.

use nalgebra::DMatrix;

use super::{Eigenfunctions, SpectralDecomposition, SpectrumMethod, TraceEstimates, TraceMethod};
use crate::error::{Error, Result};
use crate::kernel::{BaselineMeasure, EmpiricalKernelMatrix, Kernel};
use crate::linalg::symmetric_eigen;
use crate::numeric::{pairwise_sum, stream_rng};

/// `tr(M)/n` and `tr(M²)/n²`, the plug-in traces of the `(K, F̂)` spectrum.
pub fn empirical_traces(m: &EmpiricalKernelMatrix) -> TraceEstimates {
    let mat = m.matrix();
    let n = m.n() as f64;
    let diag: Vec<f64> = mat.diagonal().iter().copied().collect();
    let sq: Vec<f64> = mat.iter().map(|v| v * v).collect();
    TraceEstimates { trace: pairwise_sum(&diag) / n, trace_sq: pairwise_sum(&sq) / (n * n), method: TraceMethod::Empirical }
}

/// Eigenvalues of `M/n`, with eigenvectors rescaled so that
/// `(1/n) Σ φ(xᵢ)² = 1`.
pub fn empirical_eigs(m: &EmpiricalKernelMatrix) -> Result<SpectralDecomposition> {
    let n = m.n();
    let pairs = symmetric_eigen(m.matrix() / n as f64)?;
    let values = pairs.vectors * (n as f64).sqrt();
    SpectralDecomposition::new(
        pairs.values,
        Eigenfunctions::Sampled { points: m.points().to_vec(), values },
        BaselineMeasure::empirical(m.points().to_vec())?,
        0.0,
        0.0,
        SpectrumMethod::Empirical,
    )
}

/// Spectrum of the integral operator of `k` under `measure`, discretized with
/// the measure's quadrature rule: eigenpairs of `W^{1/2} K W^{1/2}`.
pub fn nystrom_spectrum<K: Kernel + ?Sized>(k: &K, measure: &BaselineMeasure, nodes: usize) -> Result<SpectralDecomposition> {
    let rule = measure.quadrature_rule(nodes);
    let keep: Vec<usize> = (0..rule.len()).filter(|&i| rule.weights[i] > 0.0).collect();
    let points: Vec<f64> = keep.iter().map(|&i| rule.nodes[i]).collect();
    let root_w: Vec<f64> = keep.iter().map(|&i| rule.weights[i].sqrt()).collect();
    if points.is_empty() {
        return Err(Error::param("quadrature rule has no positive weights"));
    }
    let gram = k.gram(&points)?;
    let m = points.len();
    let a = DMatrix::from_fn(m, m, |i, j| root_w[i] * gram[(i, j)] * root_w[j]);
    let pairs = symmetric_eigen(a)?;
    let values = DMatrix::from_fn(m, m, |i, j| pairs.vectors[(i, j)] / root_w[i]);
    SpectralDecomposition::new(
        pairs.values,
        Eigenfunctions::Sampled { points, values },
        measure.clone(),
        0.0,
        0.0,
        SpectrumMethod::Quadrature,
    )
}

/// Spectrum of `[K(yᵢ, yⱼ)]/m` for `m` seeded draws `yᵢ` from `measure`.
pub fn monte_carlo_spectrum<K: Kernel + ?Sized>(
    k: &K,
    measure: &BaselineMeasure,
    m: usize,
    seed: u64,
) -> Result<SpectralDecomposition> {
    if m < 2 {
        return Err(Error::SampleTooSmall { need: 2, got: m });
    }
    let mut rng = stream_rng(seed, 0);
    let points = measure.sample(&mut rng, m);
    let matrix = EmpiricalKernelMatrix::build(k, &points)?;
    let mut s = empirical_eigs(&matrix)?;
    s = SpectralDecomposition::new(
        s.eigenvalues().to_vec(),
        s.eigenfunctions().clone(),
        measure.clone(),
        0.0,
        0.0,
        SpectrumMethod::MonteCarlo,
    )?;
    Ok(s)
}
