//! Parametric bootstrap p-values.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chistar::TailEstimate;
use crate::error::{Error, Result};
use crate::numeric::stream_rng;

/// Fewest bootstrap replicates accepted.
pub const MIN_REPLICATES: usize = 50;
/// Default number of bootstrap replicates.
pub const DEFAULT_REPLICATES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOutcome {
    pub p: f64,
    pub se: f64,
    pub replicates: usize,
    pub discarded: usize,
}

impl BootstrapOutcome {
    pub fn as_tail(&self) -> TailEstimate {
        TailEstimate { p: self.p, se: self.se, draws: self.replicates }
    }
}

/// `(1 + #{T* ≥ T}) / (B + 1)` over the replicates that succeed. Replicate
/// `b` draws from the stream derived from `(seed, b)`. Failed replicates are
/// discarded; more than 5% failures abort.
pub fn bootstrap_pvalue<F>(observed: f64, replicates: usize, seed: u64, statistic: F) -> Result<BootstrapOutcome>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if replicates < MIN_REPLICATES {
        return Err(Error::param(format!("bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}")));
    }
    let stats: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            statistic(&mut rng).ok().filter(|t| t.is_finite())
        })
        .collect();
    let discarded = stats.iter().filter(|s| s.is_none()).count();
    if discarded * 20 > replicates {
        return Err(Error::BootstrapAborted { discarded, total: replicates });
    }
    let kept = replicates - discarded;
    let exceed = stats.iter().flatten().filter(|&&t| t >= observed).count();
    let p = (1 + exceed) as f64 / (kept + 1) as f64;
    Ok(BootstrapOutcome { p, se: (p * (1.0 - p) / kept as f64).sqrt(), replicates: kept, discarded })
}
