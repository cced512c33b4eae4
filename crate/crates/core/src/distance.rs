//! Quadratic distances and their V- and U-statistic estimators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{center_kernel, gaussian, sqrt_kernel, BaselineMeasure, Kernel, KernelSpec, Pmf};
use crate::numeric::pairwise_sum;
use crate::quadrature::adaptive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    VStat,
    UStat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub estimator: Estimator,
    pub n: usize,
    pub kernel: String,
    pub null: Option<String>,
}

/// Sums of a kernel over a sample: all ordered pairs and the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSums {
    pub n: usize,
    pub total: f64,
    pub diagonal: f64,
}

impl PairSums {
    pub fn compute<K: Kernel + ?Sized>(k: &K, sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let gram = k.gram(sample)?;
        let n = sample.len();
        let diag: Vec<f64> = (0..n).map(|i| gram[(i, i)]).collect();
        let rows: Vec<f64> = (0..n)
            .map(|i| {
                let off: Vec<f64> = (i + 1..n).map(|j| gram[(i, j)]).collect();
                pairwise_sum(&off)
            })
            .collect();
        let diagonal = pairwise_sum(&diag);
        Ok(Self { n, total: 2.0 * pairwise_sum(&rows) + diagonal, diagonal })
    }

    /// `(1/n²) Σᵢⱼ K(xᵢ, xⱼ)`.
    pub fn v(&self) -> f64 {
        self.total / (self.n * self.n) as f64
    }

    /// `(1/(n(n-1))) Σ_{i≠j} K(xᵢ, xⱼ)`.
    pub fn u(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::SampleTooSmall { need: 2, got: self.n });
        }
        Ok((self.total - self.diagonal) / (self.n * (self.n - 1)) as f64)
    }
}

/// `∬K d(F - G) d(F - G)` for finitely supported `F` and `G`, by the four-term
/// expansion `K(F, F) - K(F, G) - K(G, F) + K(G, G)`.
pub fn quadratic_distance<K: Kernel + ?Sized>(f: &Pmf, g: &Pmf, k: &K) -> Result<f64> {
    let cross = |a: &Pmf, b: &Pmf| -> Result<f64> {
        let mut terms = Vec::with_capacity(a.len() * b.len());
        for (&s, &ws) in a.support().iter().zip(a.probs()) {
            for (&t, &wt) in b.support().iter().zip(b.probs()) {
                if ws > 0.0 && wt > 0.0 {
                    terms.push(ws * wt * k.eval(s, t)?);
                }
            }
        }
        Ok(pairwise_sum(&terms))
    };
    Ok(cross(f, f)? - cross(f, g)? - cross(g, f)? + cross(g, g)?)
}

/// `d_K(F̂, G)`: the mean of the G-centered kernel over all sample pairs.
pub fn v_stat(sample: &[f64], g: &BaselineMeasure, k: &KernelSpec) -> Result<DistanceEstimate> {
    let c = center_kernel(k, g)?;
    let mut est = v_stat_with(&c, sample)?;
    est.null = Some(g.label());
    Ok(est)
}

/// The V-statistic of an already centered kernel.
pub fn v_stat_with<K: Kernel + ?Sized>(k: &K, sample: &[f64]) -> Result<DistanceEstimate> {
    let sums = PairSums::compute(k, sample)?;
    Ok(DistanceEstimate { value: sums.v(), estimator: Estimator::VStat, n: sums.n, kernel: k.label(), null: None })
}

/// The U-statistic: the mean of the G-centered kernel over distinct pairs.
pub fn u_stat(sample: &[f64], g: &BaselineMeasure, k: &KernelSpec) -> Result<DistanceEstimate> {
    let c = center_kernel(k, g)?;
    let mut est = u_stat_with(&c, sample)?;
    est.null = Some(g.label());
    Ok(est)
}

pub fn u_stat_with<K: Kernel + ?Sized>(k: &K, sample: &[f64]) -> Result<DistanceEstimate> {
    if sample.len() < 2 {
        return Err(Error::SampleTooSmall { need: 2, got: sample.len() });
    }
    let sums = PairSums::compute(k, sample)?;
    Ok(DistanceEstimate { value: sums.u()?, estimator: Estimator::UStat, n: sums.n, kernel: k.label(), null: None })
}

/// `d_K(F̂, N(μ, σ²))` for the normal kernel without any integration:
/// `K_{h²}(F̂, F̂) - (2/n) Σ K_{h²+σ²}(xᵢ, μ) + K_{h²+2σ²}(μ, μ)`.
pub fn normal_model_distance(sample: &[f64], mu: f64, sigma2: f64, h2: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && h2 > 0.0) {
        return Err(Error::param(format!("variances must be positive, got sigma2={sigma2}, h2={h2}")));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len() as f64;
    let ff = PairSums::compute(&KernelSpec::normal(h2)?, sample)?.v();
    let fg: Vec<f64> = sample.iter().map(|&x| gaussian(x - mu, h2 + sigma2)).collect();
    Ok(ff - 2.0 * pairwise_sum(&fg) / n + 1.0 / (2.0 * PI * (h2 + 2.0 * sigma2)).sqrt())
}

/// `∫ (f* - g*)² dz` where `f*` and `g*` are `F` and `G` smoothed by the
/// square-root kernel. Equals the quadratic distance for normal kernels.
pub fn smoothed_l2_distance(f: &Pmf, g: &Pmf, k: &KernelSpec) -> Result<f64> {
    let root = sqrt_kernel(k)?;
    let KernelSpec::Normal { h2: half } = root else {
        return Err(Error::Unsupported("smoothed distance needs a normal kernel".into()));
    };
    let smooth = |p: &Pmf, z: f64| -> f64 {
        p.support().iter().zip(p.probs()).map(|(&s, &w)| w * gaussian(z - s, half)).sum()
    };
    let lo = f.support()[0].min(g.support()[0]) - 40.0 * half.sqrt();
    let hi = f.support()[f.len() - 1].max(g.support()[g.len() - 1]) + 40.0 * half.sqrt();
    // split at every atom so the integrand is smooth on each piece
    let mut cuts: Vec<f64> = f.support().iter().chain(g.support()).copied().collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pieces = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        pieces.push(adaptive(|z| Ok((smooth(f, z) - smooth(g, z)).powi(2)), w[0], w[1], 1e-14)?);
    }
    Ok(pairwise_sum(&pieces))
}
