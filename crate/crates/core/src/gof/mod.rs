//! Goodness-of-fit tests against simple and composite nulls.

mod bootstrap;
pub mod model;
mod procedure;
mod score;

pub use bootstrap::{bootstrap_pvalue, BootstrapOutcome, DEFAULT_REPLICATES, MIN_REPLICATES};
pub use model::{
    extended_information, extended_projection, extended_score, model_from_name, ExponentialModel, Independence,
    Multinomial, NormalModel, ParametricModel,
};
pub use procedure::{
    composite_null_test, null_spectrum, simple_null_test, CompositeKernel, CompositeNullTest, GofTestResult, PValues, SimpleNullTest,
    SpectrumRoute, TestOptions, DEFAULT_NODES,
};
pub use score::{
    score_center_kernel, score_subspace_eigenvalues, ScoreCenteredKernel, ScoreProjectedKernel, PROJECTION_NODES,
};
