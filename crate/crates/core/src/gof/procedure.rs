//! Simple- and composite-null test procedures.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_pvalue, BootstrapOutcome};
use super::model::ParametricModel;
use super::score::ScoreCenteredKernel;
use crate::chistar::{normal_tail, satterthwaite_tail, ChiStarDistribution, ChiStarReference, TailEstimate, DEFAULT_DRAWS};
use crate::distance::{Estimator, PairSums};
use crate::dof::{dof_heuristic_range, pearson_scale, sdof, HeuristicRange};
use crate::error::{Error, Result};
use crate::kernel::{BaselineMeasure, CenteredKernel, EmpiricalKernelMatrix, KernelSpec};
use crate::numeric::derive_seed;
use crate::spectral::{
    cvm_spectrum, empirical_eigs, monte_carlo_spectrum, nystrom_spectrum, poisson_pairs_for_ratio, poisson_spectrum,
    traces, SpectralDecomposition, SpectrumMethod, TraceEstimates, TraceMethod, MAX_TERMS, TRUNCATION_RATIO,
};

/// Default number of quadrature nodes for matrix spectra.
pub const DEFAULT_NODES: usize = 64;

/// How the null spectrum is obtained when no closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumRoute {
    /// Closed form when available, otherwise a quadrature matrix.
    Auto { nodes: usize },
    /// A matrix on `points` seeded draws from the null.
    MonteCarlo { points: usize },
}

impl Default for SpectrumRoute {
    fn default() -> Self {
        SpectrumRoute::Auto { nodes: DEFAULT_NODES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub estimator: Estimator,
    pub spectral: bool,
    pub satterthwaite: bool,
    /// Bootstrap replicates, if a bootstrap p-value is wanted.
    pub bootstrap: Option<usize>,
    /// Monte Carlo draws for the chi-star tail.
    pub draws: usize,
    pub seed: u64,
    pub spectrum: SpectrumRoute,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            estimator: Estimator::VStat,
            spectral: true,
            satterthwaite: true,
            bootstrap: None,
            draws: DEFAULT_DRAWS,
            seed: 0,
            spectrum: SpectrumRoute::default(),
        }
    }
}

impl TestOptions {
    fn check(&self) -> Result<()> {
        if self.estimator == Estimator::Exact {
            return Err(Error::param("tests use the v or u estimator"));
        }
        if self.spectral && self.draws < 1000 {
            return Err(Error::param(format!("chi-star tails need at least 1000 draws, got {}", self.draws)));
        }
        Ok(())
    }

    fn centered_law(&self) -> bool {
        self.estimator == Estimator::UStat
    }

    fn spectral_seed(&self) -> u64 {
        derive_seed(self.seed, 0)
    }

    fn bootstrap_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }

    fn spectrum_seed(&self) -> u64 {
        derive_seed(self.seed, 2)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PValues {
    pub spectral: Option<TailEstimate>,
    pub satterthwaite: Option<f64>,
    pub bootstrap: Option<BootstrapOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofTestResult {
    pub n: usize,
    pub estimator: Estimator,
    /// `n V_n` or `√(n(n-1)) U_n`, whichever the estimator selects.
    pub statistic: f64,
    pub v_stat: f64,
    pub u_stat: Option<f64>,
    pub trace: f64,
    pub trace_sq: f64,
    pub scale: f64,
    pub dof: f64,
    pub trace_method: TraceMethod,
    pub p_values: PValues,
    pub spectrum: Vec<f64>,
    pub tail_bound: f64,
    pub spectrum_method: SpectrumMethod,
    pub heuristic_range: HeuristicRange,
    /// Fitted parameters of a composite null.
    pub theta: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

fn scaled_statistic(sums: &PairSums, estimator: Estimator) -> Result<f64> {
    let n = sums.n as f64;
    match estimator {
        Estimator::UStat => Ok((n * (n - 1.0)).sqrt() * sums.u()?),
        _ => Ok(n * sums.v()),
    }
}

fn satterthwaite_p(statistic: f64, t: &TraceEstimates, estimator: Estimator) -> Result<f64> {
    let scale = pearson_scale(t.trace, t.trace_sq)?;
    let dof = sdof(t.trace, t.trace_sq)?;
    match estimator {
        Estimator::UStat => satterthwaite_tail(statistic + t.trace, scale, dof),
        _ => satterthwaite_tail(statistic, scale, dof),
    }
}

/// A simple-null test with its null spectrum and reference draws prepared
/// once, for running against many samples.
#[derive(Debug, Clone)]
pub struct SimpleNullTest {
    kernel: CenteredKernel,
    spectrum: Option<SpectralDecomposition>,
    traces: Option<TraceEstimates>,
    /// `Σλ²` when `Σλ` diverges.
    trace_sq_only: Option<f64>,
    reference: Option<ChiStarReference>,
    options: TestOptions,
}

/// Spectrum of a G-centered kernel under its centering measure: closed form
/// for the Poisson and Cramér–von Mises kernels under their uniform laws,
/// the empirical matrix for a sample baseline, otherwise the route in
/// `options`.
pub fn null_spectrum(c: &CenteredKernel, options: &TestOptions) -> Result<SpectralDecomposition> {
    let g = c.center();
    let nodes = match options.spectrum {
        SpectrumRoute::MonteCarlo { points } => return monte_carlo_spectrum(c, g, points, options.spectrum_seed()),
        SpectrumRoute::Auto { nodes } => nodes,
    };
    match (c.base(), g) {
        (KernelSpec::Poisson(p), BaselineMeasure::UniformCircle | BaselineMeasure::UniformInterval { .. })
            if c.is_closed_form() =>
        {
            poisson_spectrum(p, poisson_pairs_for_ratio(p.rho(), TRUNCATION_RATIO, MAX_TERMS), true)
        }
        (KernelSpec::Cvm, BaselineMeasure::UniformInterval { .. }) if c.is_closed_form() => cvm_spectrum(MAX_TERMS),
        (_, BaselineMeasure::Empirical(points)) => empirical_eigs(&EmpiricalKernelMatrix::build(c, points)?),
        _ => nystrom_spectrum(c, g, nodes),
    }
}

impl SimpleNullTest {
    pub fn new(g: BaselineMeasure, k: KernelSpec, options: TestOptions) -> Result<Self> {
        options.check()?;
        let kernel = CenteredKernel::new(k, g.clone())?;
        let (tr, trace_sq_only) = match traces(&kernel, &g) {
            Ok(t) => (Some(t), None),
            Err(Error::DivergentTrace) if options.estimator == Estimator::UStat => {
                (None, Some(crate::spectral::trace_sq_analytic(&kernel, &g)?))
            }
            Err(e) => return Err(e),
        };
        let spectrum = if tr.is_some() { Some(null_spectrum(&kernel, &options)?) } else { None };
        let reference = match (&spectrum, options.spectral) {
            (Some(s), true) => {
                let law = ChiStarDistribution::from_spectrum(s, options.centered_law())?;
                Some(law.reference(options.draws, options.spectral_seed())?)
            }
            _ => None,
        };
        Ok(Self { kernel, spectrum, traces: tr, trace_sq_only, reference, options })
    }

    pub fn kernel(&self) -> &CenteredKernel {
        &self.kernel
    }

    pub fn spectrum(&self) -> Option<&SpectralDecomposition> {
        self.spectrum.as_ref()
    }

    pub fn traces(&self) -> Option<&TraceEstimates> {
        self.traces.as_ref()
    }

    pub fn reference(&self) -> Option<&ChiStarReference> {
        self.reference.as_ref()
    }

    /// The estimator-scaled statistic of a sample.
    pub fn statistic(&self, sample: &[f64]) -> Result<f64> {
        scaled_statistic(&PairSums::compute(&self.kernel, sample)?, self.options.estimator)
    }

    pub fn run(&self, sample: &[f64]) -> Result<GofTestResult> {
        let sums = PairSums::compute(&self.kernel, sample)?;
        let n = sums.n;
        let statistic = scaled_statistic(&sums, self.options.estimator)?;
        let mut notes = Vec::new();
        let mut p = PValues::default();
        if let Some(r) = &self.reference {
            p.spectral = Some(r.tail(statistic));
        }
        if self.options.satterthwaite {
            p.satterthwaite = Some(match (&self.traces, self.trace_sq_only) {
                (Some(t), _) => satterthwaite_p(statistic, t, self.options.estimator)?,
                (None, Some(sq)) => {
                    notes.push("trace diverges: satterthwaite tail taken in its normal limit".into());
                    normal_tail(statistic, 0.0, 2.0 * sq)?
                }
                (None, None) => unreachable!("traces or the squared trace are always set"),
            });
        }
        if self.traces.is_none() {
            notes.push("trace diverges: spectral route refused".into());
        }
        if let Some(b) = self.options.bootstrap {
            let g = self.kernel.center();
            let est = self.options.estimator;
            p.bootstrap = Some(bootstrap_pvalue(statistic, b, self.options.bootstrap_seed(), |rng| {
                let xs = g.sample(rng, n);
                scaled_statistic(&PairSums::compute(&self.kernel, &xs)?, est)
            })?);
        }
        let (trace, trace_sq, method) = match &self.traces {
            Some(t) => (t.trace, t.trace_sq, t.method),
            None => (f64::INFINITY, self.trace_sq_only.unwrap_or(f64::NAN), TraceMethod::Quadrature),
        };
        Ok(GofTestResult {
            n,
            estimator: self.options.estimator,
            statistic,
            v_stat: sums.v(),
            u_stat: sums.u().ok(),
            trace,
            trace_sq,
            scale: trace / trace_sq,
            dof: trace * trace / trace_sq,
            trace_method: method,
            p_values: p,
            spectrum: self.spectrum.as_ref().map(|s| s.eigenvalues().to_vec()).unwrap_or_default(),
            tail_bound: self.spectrum.as_ref().map_or(0.0, |s| s.tail_bound()),
            spectrum_method: self.spectrum.as_ref().map_or(SpectrumMethod::Quadrature, |s| s.method()),
            heuristic_range: dof_heuristic_range(n, 1)?,
            theta: None,
            notes,
        })
    }
}

pub fn simple_null_test(sample: &[f64], g: &BaselineMeasure, k: &KernelSpec, options: &TestOptions) -> Result<GofTestResult> {
    SimpleNullTest::new(g.clone(), k.clone(), options.clone())?.run(sample)
}

/// The kernel of a composite test. The Pearson kernel is rebuilt from each
/// fitted model.
#[derive(Debug, Clone)]
pub enum CompositeKernel {
    Fixed(KernelSpec),
    Pearson,
}

impl CompositeKernel {
    pub fn resolve(&self, model: &dyn ParametricModel, theta: &[f64]) -> Result<KernelSpec> {
        match self {
            CompositeKernel::Fixed(k) => Ok(k.clone()),
            CompositeKernel::Pearson => match model.baseline(theta)? {
                BaselineMeasure::Discrete(pmf) => Ok(KernelSpec::pearson(pmf)),
                _ => Err(Error::Unsupported("the pearson kernel needs a discrete model".into())),
            },
        }
    }
}

/// A test of fit to a parametric family with parameters estimated by
/// maximum likelihood.
#[derive(Debug, Clone)]
pub struct CompositeNullTest {
    model: Arc<dyn ParametricModel>,
    kernel: CompositeKernel,
    options: TestOptions,
}

impl CompositeNullTest {
    pub fn new(model: Arc<dyn ParametricModel>, kernel: CompositeKernel, options: TestOptions) -> Result<Self> {
        options.check()?;
        Ok(Self { model, kernel, options })
    }

    /// The score-centered kernel at the fitted parameters.
    pub fn fitted_kernel(&self, sample: &[f64]) -> Result<ScoreCenteredKernel> {
        let theta = self.model.fit(sample)?;
        let base = self.kernel.resolve(self.model.as_ref(), &theta)?;
        ScoreCenteredKernel::new(base, Arc::clone(&self.model), theta)
    }

    /// `n ∬K_scen dF̂ dF̂` (or the scaled U-statistic) at the fitted parameters.
    pub fn statistic(&self, sample: &[f64]) -> Result<f64> {
        let k = self.fitted_kernel(sample)?;
        scaled_statistic(&k.pair_sums(sample)?, self.options.estimator)
    }

    /// Spectrum of the score-centered kernel under the fitted model.
    pub fn spectrum(&self, k: &ScoreCenteredKernel) -> Result<SpectralDecomposition> {
        let g = k.baseline();
        match self.options.spectrum {
            SpectrumRoute::MonteCarlo { points } if !self.model.is_discrete() => {
                monte_carlo_spectrum(k, g, points, self.options.spectrum_seed())
            }
            SpectrumRoute::MonteCarlo { .. } => nystrom_spectrum(k, g, 0),
            SpectrumRoute::Auto { nodes } => nystrom_spectrum(k, g, nodes),
        }
    }

    pub fn run(&self, sample: &[f64]) -> Result<GofTestResult> {
        let k = self.fitted_kernel(sample)?;
        let sums = k.pair_sums(sample)?;
        let n = sums.n;
        let statistic = scaled_statistic(&sums, self.options.estimator)?;
        let spectrum = self.spectrum(&k)?;
        let t = spectrum.traces();
        let mut p = PValues::default();
        if self.options.spectral {
            let law = ChiStarDistribution::from_spectrum(&spectrum, self.options.centered_law())?;
            p.spectral = Some(law.tail(statistic, self.options.draws, self.options.spectral_seed())?);
        }
        if self.options.satterthwaite {
            p.satterthwaite = Some(satterthwaite_p(statistic, &t, self.options.estimator)?);
        }
        if let Some(b) = self.options.bootstrap {
            let theta = k.theta().to_vec();
            p.bootstrap = Some(bootstrap_pvalue(statistic, b, self.options.bootstrap_seed(), |rng| {
                let xs = self.model.sample(&theta, rng, n)?;
                self.statistic(&xs)
            })?);
        }
        let mut notes = Vec::new();
        if self.options.estimator == Estimator::UStat {
            notes.push("with estimated parameters the U-statistic is no longer an unbiased estimator".into());
        }
        Ok(GofTestResult {
            n,
            estimator: self.options.estimator,
            statistic,
            v_stat: sums.v(),
            u_stat: sums.u().ok(),
            trace: t.trace,
            trace_sq: t.trace_sq,
            scale: pearson_scale(t.trace, t.trace_sq)?,
            dof: sdof(t.trace, t.trace_sq)?,
            trace_method: t.method,
            p_values: p,
            spectrum: spectrum.eigenvalues().to_vec(),
            tail_bound: spectrum.tail_bound(),
            spectrum_method: spectrum.method(),
            heuristic_range: dof_heuristic_range(n, 1)?,
            theta: Some(k.theta().to_vec()),
            notes,
        })
    }
}

pub fn composite_null_test(
    sample: &[f64],
    model: Arc<dyn ParametricModel>,
    kernel: CompositeKernel,
    options: &TestOptions,
) -> Result<GofTestResult> {
    CompositeNullTest::new(model, kernel, options.clone())?.run(sample)
}
