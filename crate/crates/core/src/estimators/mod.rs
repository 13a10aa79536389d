//! Closed-form Bayesian learners for the hierarchical Fourier prior.
//!
//! Each class `F_m` is a Gaussian linear model on `phi_m` with coefficient
//! prior `N(0, v_m I)`. Under [`PriorScaling::Matched`], `v_m = sigma_w^2 / (m+1)`,
//! which folds the generative `1/sqrt(m+1)` normalizer into the coefficients
//! and makes the ridge penalty `lambda_m = sigma_eps^2 (m+1) / sigma_w^2`.

mod baselines;
mod hierarchy;
mod posterior;
mod selectors;

pub use baselines::{run_baselines, run_task_baselines, Baseline};
pub use hierarchy::{class_posterior_weights, HierarchicalPosterior, PosteriorSweep, PredictiveMixture};
pub use posterior::{fit_class, log_evidence_kernel, ClassPosterior, ClassStats, PriorScaling};
pub use selectors::SelectorKind;
