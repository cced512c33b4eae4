//! Quadratic-distance goodness-of-fit testing.
//!
//! A quadratic distance between probability measures `F` and `G` is
//! `d_K(F, G) = ∬ K(s, t) d(F - G)(s) d(F - G)(t)` for a conditionally
//! nonnegative definite kernel `K`. The crate covers the full pipeline:
//!
//! - [`kernel`]: kernels, baseline measures, G-centering and empirical matrices.
//! - [`spectral`]: exact Poisson / Mehler / Cramér–von Mises spectra, Hermite
//!   machinery, traces and empirical or quadrature (Nyström) eigendecompositions.
//! - [`distance`]: exact distances and their V- and U-statistic estimators.
//! - [`dof`]: Pearson scaling, spectral degrees of freedom and cumulant diagnostics.
//! - [`chistar`]: the weighted chi-square limit law and its reference approximations.
//! - [`gof`]: simple- and composite-null tests with score centering and bootstrap.

pub mod chistar;
pub mod distance;
pub mod dof;
pub mod error;
pub mod gof;
pub mod kernel;
pub mod linalg;
pub mod numeric;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use chistar::{normal_tail, satterthwaite_tail, ChiStarDistribution, ChiStarReference, TailEstimate};
pub use distance::{DistanceEstimate, Estimator};
pub use dof::{CumulantDiagnostics, DofReport, HeuristicRange};
pub use error::{Error, Result};
pub use gof::{
    CompositeNullTest, GofTestResult, ParametricModel, ScoreCenteredKernel, SimpleNullTest,
    TestOptions,
};
pub use kernel::{
    BaselineMeasure, CenteredKernel, EmpiricalKernelMatrix, Kernel, KernelSpec, Pmf,
};
pub use spectral::{MehlerParameters, SpectralDecomposition, TraceEstimates};
