//! The weighted chi-square law `χ*(λ) = Σλᵢ Zᵢ²` and its approximations.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::stream_rng;
use crate::special::{chi_square_sf, normal_sf};
use crate::spectral::SpectralDecomposition;

/// Default number of Monte Carlo draws for tail probabilities.
pub const DEFAULT_DRAWS: usize = 200_000;
/// Draws per independently seeded chunk.
const CHUNK: usize = 8192;
/// Weights are dropped once the remaining `Σλ²` falls below this fraction of
/// the total; their mean is kept as a constant.
const RESIDUAL_FRACTION: f64 = 1e-8;

/// A Monte Carlo tail probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p: f64,
    pub se: f64,
    pub draws: usize,
}

impl TailEstimate {
    pub fn from_count(exceed: usize, draws: usize) -> Self {
        let p = exceed as f64 / draws as f64;
        Self { p, se: (p * (1.0 - p) / draws as f64).sqrt(), draws }
    }
}

/// `Σλᵢ Zᵢ² + tail_mean`, or `Σλᵢ (Zᵢ² - 1)` when centered.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiStarDistribution {
    weights: Vec<f64>,
    tail_mean: f64,
    centered: bool,
}

impl ChiStarDistribution {
    pub fn new(mut weights: Vec<f64>, tail_mean: f64, centered: bool) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("chi-star law needs at least one weight"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !(tail_mean.is_finite() && tail_mean >= 0.0) {
            return Err(Error::param("chi-star weights must be finite and nonnegative"));
        }
        weights.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { weights, tail_mean, centered })
    }

    /// The law of a spectrum; negligible trailing weights are folded into the
    /// constant tail mean.
    pub fn from_spectrum(s: &SpectralDecomposition, centered: bool) -> Result<Self> {
        let w = s.eigenvalues();
        let total: f64 = w.iter().map(|v| v * v).sum::<f64>() + s.tail_sq_bound();
        let mut keep = w.len();
        let mut residual = s.tail_sq_bound();
        while keep > 1 {
            let next = residual + w[keep - 1] * w[keep - 1];
            if next >= RESIDUAL_FRACTION * total {
                break;
            }
            residual = next;
            keep -= 1;
        }
        let dropped: f64 = w[keep..].iter().sum();
        Self::new(w[..keep].to_vec(), dropped + s.tail_bound(), centered)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_mean(&self) -> f64 {
        self.tail_mean
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn mean(&self) -> f64 {
        if self.centered {
            0.0
        } else {
            self.weights.iter().sum::<f64>() + self.tail_mean
        }
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// `draws` independent draws. Chunk `c` uses the stream derived from
    /// `(seed, c)`, so the output does not depend on the thread count.
    pub fn sample(&self, draws: usize, seed: u64) -> Result<Vec<f64>> {
        if draws == 0 {
            return Err(Error::param("need at least one draw"));
        }
        let chunks = draws.div_ceil(CHUNK);
        let parts: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let len = CHUNK.min(draws - c * CHUNK);
                let mut rng = stream_rng(seed, c as u64);
                (0..len)
                    .map(|_| {
                        let mut acc = 0.0;
                        for &w in &self.weights {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            acc += if self.centered { w * (z * z - 1.0) } else { w * z * z };
                        }
                        if self.centered {
                            acc
                        } else {
                            acc + self.tail_mean
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(parts.concat())
    }

    /// Monte Carlo `P(χ* > x)`.
    pub fn tail(&self, x: f64, draws: usize, seed: u64) -> Result<TailEstimate> {
        if draws < 1000 {
            return Err(Error::param(format!("tail estimates need at least 1000 draws, got {draws}")));
        }
        let s = self.sample(draws, seed)?;
        Ok(TailEstimate::from_count(s.iter().filter(|&&v| v > x).count(), draws))
    }

    /// Sorted draws, for evaluating many tail probabilities against one sample.
    pub fn reference(&self, draws: usize, seed: u64) -> Result<ChiStarReference> {
        if draws < 1000 {
            return Err(Error::param(format!("a reference sample needs at least 1000 draws, got {draws}")));
        }
        let mut s = self.sample(draws, seed)?;
        s.sort_by(f64::total_cmp);
        Ok(ChiStarReference { sorted: s })
    }

    /// The matched scaled chi-square tail `P(χ²_dof > α(x + shift))`, with
    /// `shift = Σλ` for the centered law.
    pub fn satterthwaite(&self, x: f64) -> Result<f64> {
        let sq: f64 = self.weights.iter().map(|w| w * w).sum();
        let total = self.weights.iter().sum::<f64>() + self.tail_mean;
        let shift = if self.centered { total } else { 0.0 };
        satterthwaite_tail(x + shift, total / sq, total * total / sq)
    }

    /// The matched normal tail.
    pub fn normal(&self, x: f64) -> Result<f64> {
        normal_tail(x, self.mean(), self.variance())
    }
}

/// Sorted reference draws of a chi-star law.
#[derive(Debug, Clone)]
pub struct ChiStarReference {
    sorted: Vec<f64>,
}

impl ChiStarReference {
    pub fn draws(&self) -> usize {
        self.sorted.len()
    }

    pub fn tail(&self, x: f64) -> TailEstimate {
        let below = self.sorted.partition_point(|&v| v <= x);
        TailEstimate::from_count(self.sorted.len() - below, self.sorted.len())
    }

    /// Empirical quantile (lower order statistic).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// `P(χ²_dof > scale · x)` for real `dof > 0`.
pub fn satterthwaite_tail(x: f64, scale: f64, dof: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite() && dof > 0.0 && dof.is_finite()) {
        return Err(Error::param(format!("satterthwaite needs positive scale and dof, got {scale}, {dof}")));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(chi_square_sf(scale * x, dof))
}

/// Upper tail of `N(mean, variance)` at `x`.
pub fn normal_tail(x: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::param(format!("normal tail needs positive variance, got {variance}")));
    }
    Ok(normal_sf((x - mean) / variance.sqrt()))
}
