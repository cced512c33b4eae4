use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, stream_rng};
use crate::quadrature::{adaptive, adaptive_semi_infinite, QuadratureRule};

/// Gauss–Hermite nodes used for integrals under Gaussian baselines.
pub const HERMITE_NODES: usize = 64;
/// Trapezoid nodes used for integrals over the circle.
pub const CIRCLE_NODES: usize = 256;
/// Absolute tolerance of adaptive interval quadrature.
pub const INTERVAL_TOL: f64 = 1e-9;

const PMF_TOL: f64 = 1e-12;

/// A probability mass function on finitely many real support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::param("pmf needs equally many (nonzero count) support points and masses"));
        }
        if support.iter().chain(&probs).any(|v| !v.is_finite()) || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::param("pmf masses must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::param(format!("pmf sums to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::param("pmf support points must be distinct"));
        }
        let (support, probs) = pairs.into_iter().unzip();
        Ok(Self { support, probs })
    }

    /// Normalizes nonnegative weights (e.g. counts) into a pmf.
    pub fn from_weights(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("pmf weights must have positive total"));
        }
        Self::new(support, weights.into_iter().map(|w| w / total).collect())
    }

    /// The empirical pmf of a sample.
    pub fn empirical(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut support: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for x in sorted {
            if support.last() == Some(&x) {
                *counts.last_mut().unwrap() += 1.0;
            } else {
                support.push(x);
                counts.push(1.0);
            }
        }
        Self::from_weights(support, counts)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Mass at `x`; zero off the support.
    pub fn mass(&self, x: f64) -> f64 {
        match self.support.binary_search_by(|s| s.total_cmp(&x)) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.support.binary_search_by(|s| s.total_cmp(&x)).ok()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (s, p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *s;
            }
        }
        // rounding left u above the final cumulative mass
        *self.support.iter().zip(&self.probs).rev().find(|(_, &p)| p > 0.0).unwrap().0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalComponent {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

/// The measure against which centering, traces and spectra are taken.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineMeasure {
    Normal { mean: f64, var: f64 },
    NormalMixture(Vec<NormalComponent>),
    Exponential { rate: f64 },
    Discrete(Pmf),
    UniformInterval { lo: f64, hi: f64 },
    /// Uniform on `[0, 2π)`.
    UniformCircle,
    Empirical(Vec<f64>),
}

impl BaselineMeasure {
    pub fn normal(mean: f64, var: f64) -> Result<Self> {
        if !(mean.is_finite() && var > 0.0 && var.is_finite()) {
            return Err(Error::param(format!("normal baseline needs finite mean and positive variance, got ({mean}, {var})")));
        }
        Ok(Self::Normal { mean, var })
    }

    pub fn normal_mixture(components: Vec<NormalComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| !(c.weight >= 0.0 && c.var > 0.0 && c.mean.is_finite()))
            || (total - 1.0).abs() > PMF_TOL
        {
            return Err(Error::param("mixture weights must be nonnegative and sum to 1 with positive variances"));
        }
        Ok(Self::NormalMixture(components))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::param(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param(format!("uniform interval needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::UniformInterval { lo, hi })
    }

    pub fn uniform01() -> Self {
        Self::UniformInterval { lo: 0.0, hi: 1.0 }
    }

    pub fn empirical(sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("empirical sample contains non-finite values"));
        }
        Ok(Self::Empirical(sample))
    }

    pub fn is_parametric(&self) -> bool {
        matches!(self, Self::Normal { .. } | Self::NormalMixture(_) | Self::Exponential { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Normal { mean, var } => format!("normal:mu={mean},sigma2={var}"),
            Self::NormalMixture(c) => format!("normal-mixture({} components)", c.len()),
            Self::Exponential { rate } => format!("exponential:rate={rate}"),
            Self::Discrete(p) => format!("pmf({} points)", p.len()),
            Self::UniformInterval { lo, hi } if *lo == 0.0 && *hi == 1.0 => "uniform01".into(),
            Self::UniformInterval { lo, hi } => format!("uniform:lo={lo},hi={hi}"),
            Self::UniformCircle => "circle".into(),
            Self::Empirical(s) => format!("sample({} points)", s.len()),
        }
    }

    /// Components of a Gaussian (mixture) baseline.
    pub fn gaussian_components(&self) -> Option<Vec<NormalComponent>> {
        match self {
            Self::Normal { mean, var } => Some(vec![NormalComponent { weight: 1.0, mean: *mean, var: *var }]),
            Self::NormalMixture(c) => Some(c.clone()),
            _ => None,
        }
    }

    /// `∫ f dM`: exact for discrete and empirical measures, Gauss–Hermite
    /// for Gaussian ones, trapezoid on the circle, adaptive otherwise.
    pub fn integrate(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        match self {
            Self::Normal { mean, var } => QuadratureRule::normal(HERMITE_NODES, *mean, *var).try_integrate(f),
            Self::NormalMixture(comps) => {
                let mut acc = 0.0;
                for c in comps {
                    acc += c.weight * QuadratureRule::normal(HERMITE_NODES, c.mean, c.var).try_integrate(&f)?;
                }
                Ok(acc)
            }
            Self::Exponential { rate } => adaptive_semi_infinite(
                |x| {
                    let density = rate * (-rate * x).exp();
                    Ok(if density == 0.0 { 0.0 } else { density * f(x)? })
                },
                0.0,
                INTERVAL_TOL,
            ),
            Self::Discrete(p) => {
                let mut acc = 0.0;
                for (&s, &w) in p.support().iter().zip(p.probs()) {
                    if w > 0.0 {
                        acc += w * f(s)?;
                    }
                }
                Ok(acc)
            }
            Self::UniformInterval { lo, hi } => {
                let len = hi - lo;
                Ok(adaptive(&f, *lo, *hi, INTERVAL_TOL * len)? / len)
            }
            Self::UniformCircle => QuadratureRule::circle(CIRCLE_NODES).try_integrate(f),
            Self::Empirical(sample) => {
                let vals = sample.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
                Ok(pairwise_sum(&vals) / vals.len() as f64)
            }
        }
    }

    /// Seeded Monte Carlo estimate of `∫ f dM`.
    pub fn integrate_monte_carlo(&self, f: impl Fn(f64) -> Result<f64>, draws: usize, seed: u64) -> Result<f64> {
        if draws == 0 {
            return Err(Error::param("monte carlo integration needs at least one draw"));
        }
        let mut rng = stream_rng(seed, 0);
        let pts = self.sample(&mut rng, draws);
        let vals = pts.into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&vals) / draws as f64)
    }

    /// A fixed quadrature rule with (about) `n` nodes; exact for discrete and
    /// empirical measures, whose own atoms are returned.
    pub fn quadrature_rule(&self, n: usize) -> QuadratureRule {
        match self {
            Self::Normal { mean, var } => QuadratureRule::normal(n, *mean, *var),
            Self::NormalMixture(comps) => {
                let mut rule = QuadratureRule { nodes: Vec::new(), weights: Vec::new() };
                for c in comps.iter().filter(|c| c.weight > 0.0) {
                    let r = QuadratureRule::normal(n, c.mean, c.var);
                    rule.nodes.extend(r.nodes);
                    rule.weights.extend(r.weights.iter().map(|w| w * c.weight));
                }
                rule
            }
            Self::Exponential { rate } => QuadratureRule::exponential(n, *rate),
            Self::Discrete(p) => {
                let (nodes, weights) = p
                    .support()
                    .iter()
                    .zip(p.probs())
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(&s, &w)| (s, w))
                    .unzip();
                QuadratureRule { nodes, weights }
            }
            Self::UniformInterval { lo, hi } => QuadratureRule::uniform(n, *lo, *hi),
            Self::UniformCircle => QuadratureRule::circle(n),
            Self::Empirical(s) => QuadratureRule { nodes: s.clone(), weights: vec![1.0 / s.len() as f64; s.len()] },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match self {
            Self::Normal { mean, var } => {
                let d = Normal::new(*mean, var.sqrt()).expect("validated normal");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Self::NormalMixture(comps) => (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut chosen = comps.last().unwrap();
                    for c in comps {
                        acc += c.weight;
                        if u < acc {
                            chosen = c;
                            break;
                        }
                    }
                    let z: f64 = StandardNormal.sample(rng);
                    chosen.mean + chosen.var.sqrt() * z
                })
                .collect(),
            Self::Exponential { rate } => {
                let d = Exp::new(*rate).expect("validated rate");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Self::Discrete(p) => (0..n).map(|_| p.draw(rng)).collect(),
            Self::UniformInterval { lo, hi } => (0..n).map(|_| rng.random_range(*lo..*hi)).collect(),
            Self::UniformCircle => (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect(),
            Self::Empirical(s) => (0..n).map(|_| s[rng.random_range(0..s.len())]).collect(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Self::Normal { .. } | Self::NormalMixture(_) => x.is_finite(),
            Self::Exponential { .. } => x >= 0.0 && x.is_finite(),
            Self::Discrete(p) => p.mass(x) > 0.0,
            Self::UniformInterval { lo, hi } => x >= *lo && x <= *hi,
            Self::UniformCircle => (0.0..2.0 * PI).contains(&x),
            Self::Empirical(s) => s.contains(&x),
        }
    }
}
