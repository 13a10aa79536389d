//! Sample complexity and the performance measures built on it.
//!
//! `N_b(r)` is the first `t` at which learner `b`'s Monte-Carlo MSE is at
//! most `r`. Performance ratios divide it by the best `N` in a comparison
//! set; requirements come from pooled reference curves via a reversed
//! quantile so that a higher `Q` asks for a lower error.

mod complexity;
mod curve;
mod profile;

pub use complexity::{reference_quantile, sample_complexity, Ratio, SampleComplexity};
pub use curve::{error_curve, squared_prediction_difference, ErrorCurve};
pub use profile::{
    default_q_grid, default_tau_grid, mean_performance_ratio, performance_profile, performance_ratio, CurveSet,
    ProfileResult, QuantileSpec,
};
