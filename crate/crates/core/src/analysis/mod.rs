//! Statistical checks on simulated ensembles.

pub mod bracket;
pub mod convergence;
pub mod fp;
pub mod generator;
pub mod kde;
pub mod law;
pub mod martingale;

pub use bracket::{bracket, bracket_paths, BracketEstimate};
pub use convergence::{convergence_study, ConvergenceStudy};
pub use generator::{compose_with_map, conjugation_error, ConjugationError};
pub use fp::{fp_residual, FpResidual, TestFunctionBank};
pub use kde::{kde_density, silverman_bandwidth};
pub use law::{fourth_moment_fit, geometric_lags, ks_statistic, normal_cdf, wasserstein1, MomentFit};
pub use martingale::{forward_integral_gap, increment_correlations, ito_residual, IncrementCorrelation, ItoResidual};
