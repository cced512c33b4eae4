//! Argument types and the three subcommands.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quadfit_core::chistar::DEFAULT_DRAWS;
use quadfit_core::dof::{dof_heuristic_range, DEFAULT_MAX_ORDER};
use quadfit_core::gof::{
    model_from_name, null_spectrum, CompositeKernel, CompositeNullTest, ParametricModel, SimpleNullTest, TestOptions,
    DEFAULT_REPLICATES,
};
use quadfit_core::kernel::grammar::{KernelChoice, MeasureChoice};
use quadfit_core::spectral::{
    empirical_eigs, nystrom_spectrum, poisson_pairs_for_ratio, poisson_spectrum, traces, MAX_TERMS, TRUNCATION_RATIO,
};
use quadfit_core::{
    BaselineMeasure, CenteredKernel, CumulantDiagnostics, DofReport, EmpiricalKernelMatrix, Estimator, KernelSpec,
    MehlerParameters, SpectralDecomposition,
};

use crate::error::{CliError, Result};
use crate::ingest::{ingest, ingest_pmf};
use crate::report::{estimator_name, ConfigEcho, CumulantSection, DofSection, RangeSection, Report, SpectrumSection};

/// Quadrature nodes for spectra without a closed form.
const NODES: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "quadfit", version, about = "Quadratic-distance goodness-of-fit tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a sample against a fixed null measure or a parametric model.
    Test(TestArgs),
    /// Eigenvalues of a kernel under a measure.
    Spectrum(SpectrumArgs),
    /// Traces, Pearson scale and spectral degrees of freedom.
    Dof(DofArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    V,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PValueMethod {
    Spectral,
    Satterthwaite,
    Bootstrap,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Observations, one per line.
    #[arg(long)]
    pub data: PathBuf,
    /// Kernel, e.g. `normal:h2=1`, `poisson:rho=0.5`, `cvm`, `pearson`.
    #[arg(long)]
    pub kernel: KernelChoice,
    /// A fully specified null measure, e.g. `uniform01`, `circle`, `pmf:<path>`.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub null: Option<MeasureChoice>,
    /// A parametric null fitted by maximum likelihood, e.g. `normal`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_enum, default_value = "v")]
    pub estimator: EstimatorArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "spectral,satterthwaite")]
    pub pvalue: Vec<PValueMethod>,
    /// Monte Carlo draws for the spectral p-value.
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    pub draws: usize,
    /// Bootstrap replicates; implies the bootstrap p-value.
    #[arg(long)]
    pub boot: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub full_spectrum: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub kernel: KernelChoice,
    /// Measure the kernel is decomposed under; `sample:<path>` gives the
    /// empirical eigenvalues.
    #[arg(long)]
    pub null: MeasureChoice,
    /// Decompose the kernel centered at the measure.
    #[arg(long)]
    pub centered: bool,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub full_spectrum: bool,
}

#[derive(Debug, Args)]
pub struct DofArgs {
    #[arg(long)]
    pub kernel: KernelChoice,
    /// Null measure for the exact traces.
    #[arg(long, required_unless_present = "data")]
    pub null: Option<MeasureChoice>,
    /// A sample; alone, its empirically centered kernel matrix is used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_measure(m: &MeasureChoice) -> Result<BaselineMeasure> {
    match m {
        MeasureChoice::Pmf(path) => Ok(BaselineMeasure::Discrete(ingest_pmf(path)?)),
        MeasureChoice::Sample(path) => Ok(BaselineMeasure::empirical(ingest(path)?)?),
        other => Ok(other.resolve()?),
    }
}

fn emit(report: &mut Report, started: Instant, out: Option<&PathBuf>) -> Result<()> {
    report.wall_time_s = started.elapsed().as_secs_f64();
    let text = report.to_json()?;
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Test(a) => run_test(a),
        Command::Spectrum(a) => run_spectrum(a),
        Command::Dof(a) => run_dof(a),
    }
}

fn run_test(a: TestArgs) -> Result<()> {
    let started = Instant::now();
    let sample = ingest(&a.data)?;
    let bootstrap = a.boot.is_some() || a.pvalue.contains(&PValueMethod::Bootstrap);
    let options = TestOptions {
        estimator: match a.estimator {
            EstimatorArg::V => Estimator::VStat,
            EstimatorArg::U => Estimator::UStat,
        },
        spectral: a.pvalue.contains(&PValueMethod::Spectral),
        satterthwaite: a.pvalue.contains(&PValueMethod::Satterthwaite),
        bootstrap: bootstrap.then(|| a.boot.unwrap_or(DEFAULT_REPLICATES)),
        draws: a.draws,
        seed: a.seed,
        ..TestOptions::default()
    };
    let mut methods: Vec<String> = a.pvalue.iter().map(|m| format!("{m:?}").to_lowercase()).collect();
    if bootstrap && !a.pvalue.contains(&PValueMethod::Bootstrap) {
        methods.push("bootstrap".into());
    }
    let config = ConfigEcho {
        data: Some(a.data.display().to_string()),
        kernel: a.kernel.to_string(),
        null: a.null.as_ref().map(ToString::to_string),
        model: a.model.clone(),
        estimator: Some(estimator_name(options.estimator).into()),
        pvalue: methods,
        draws: Some(a.draws),
        boot: options.bootstrap,
        seed: Some(a.seed),
        full_spectrum: a.full_spectrum,
        ..ConfigEcho::default()
    };
    let result = match (&a.null, &a.model) {
        (Some(m), None) => {
            let g = load_measure(m)?;
            let k = a.kernel.resolve(Some(&g))?;
            SimpleNullTest::new(g, k, options)?.run(&sample)?
        }
        (None, Some(name)) => {
            let model: Arc<dyn ParametricModel> = Arc::from(model_from_name(name)?);
            let kernel = match a.kernel {
                KernelChoice::Pearson => CompositeKernel::Pearson,
                ref other => CompositeKernel::Fixed(other.resolve(None)?),
            };
            CompositeNullTest::new(model, kernel, options)?.run(&sample)?
        }
        _ => return Err(CliError::Config("give exactly one of --null or --model".into())),
    };
    let mut report = Report::new("test", config).with_test_result(&result, a.full_spectrum);
    emit(&mut report, started, a.out.as_ref())
}

/// The spectrum of `k` (centered at `g` if asked) and the Mehler constants
/// when the decomposition is the closed-form normal one.
fn spectrum_of(
    k: &KernelSpec,
    g: &BaselineMeasure,
    centered: bool,
) -> Result<(SpectralDecomposition, Option<MehlerParameters>)> {
    if centered {
        let c = CenteredKernel::new(k.clone(), g.clone())?;
        return Ok((null_spectrum(&c, &TestOptions::default())?, None));
    }
    match (k, g) {
        (KernelSpec::Normal { h2 }, BaselineMeasure::Normal { mean, var }) => {
            let p = MehlerParameters::new(*h2, *mean, *var)?;
            Ok((quadfit_core::spectral::normal_spectrum_auto(*h2, *mean, *var)?, Some(p)))
        }
        (KernelSpec::Poisson(p), BaselineMeasure::UniformCircle) if p.is_canonical() => {
            Ok((poisson_spectrum(p, poisson_pairs_for_ratio(p.rho(), TRUNCATION_RATIO, MAX_TERMS), false)?, None))
        }
        (_, BaselineMeasure::Empirical(points)) => Ok((empirical_eigs(&EmpiricalKernelMatrix::build(k, points)?)?, None)),
        _ => Ok((nystrom_spectrum(k, g, NODES)?, None)),
    }
}

fn run_spectrum(a: SpectrumArgs) -> Result<()> {
    let started = Instant::now();
    let g = load_measure(&a.null)?;
    let k = a.kernel.resolve(Some(&g))?;
    let (mut s, mehler) = spectrum_of(&k, &g, a.centered)?;
    if let Some(n) = a.max_terms {
        if n == 0 {
            return Err(CliError::Config("--max-terms must be positive".into()));
        }
        s = s.truncated(n);
    }
    let config = ConfigEcho {
        kernel: a.kernel.to_string(),
        null: Some(a.null.to_string()),
        centered: Some(a.centered),
        max_terms: a.max_terms,
        full_spectrum: a.full_spectrum,
        ..ConfigEcho::default()
    };
    let mut report = Report::new("spectrum", config);
    report.spectrum = Some(SpectrumSection::from_decomposition(&s, a.full_spectrum));
    report.mehler = mehler.as_ref().map(Into::into);
    if mehler.is_some() {
        report.notes.push("mehler: a and alpha satisfy the eigen-equation; printed_* are the alternative closed forms".into());
    }
    emit(&mut report, started, a.out.as_ref())
}

fn run_dof(a: DofArgs) -> Result<()> {
    let started = Instant::now();
    let sample = a.data.as_ref().map(|p| ingest(p)).transpose()?;
    let config = ConfigEcho {
        data: a.data.as_ref().map(|p| p.display().to_string()),
        kernel: a.kernel.to_string(),
        null: a.null.as_ref().map(ToString::to_string),
        ..ConfigEcho::default()
    };
    let mut report = Report::new("dof", config);
    let spectrum = match (&a.null, &sample) {
        (Some(m), _) => {
            let g = load_measure(m)?;
            let k = a.kernel.resolve(Some(&g))?;
            let c = CenteredKernel::new(k, g.clone())?;
            report.dof = Some(DofSection::from(&DofReport::from_traces(&traces(&c, &g)?)?));
            null_spectrum(&c, &TestOptions::default())?
        }
        (None, Some(xs)) => {
            let k = a.kernel.resolve(None)?;
            let m = EmpiricalKernelMatrix::build(&k, xs)?.empirical_center();
            report.dof = Some(DofSection::from(&DofReport::empirical(&k, xs)?));
            empirical_eigs(&m)?
        }
        (None, None) => return Err(CliError::Config("give --null, --data or both".into())),
    };
    let positive: Vec<f64> = spectrum.eigenvalues().iter().copied().filter(|v| *v > 0.0).collect();
    if !positive.is_empty() {
        report.cumulants = Some(CumulantSection::from(&CumulantDiagnostics::new(&positive, DEFAULT_MAX_ORDER)?));
    }
    if let Some(xs) = &sample {
        report.n = Some(xs.len());
        report.heuristic_range = Some(RangeSection::from(&dof_heuristic_range(xs.len(), 1)?));
    }
    emit(&mut report, started, a.out.as_ref())
}
