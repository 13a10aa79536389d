//! Information-theoretic suboptimality analysis.
//!
//! The reducible loss of a learner splits into the Bayes risk (KL from the
//! oracle predictive to the Bayesian posterior predictive) and the excess
//! risk (expected log ratio of the posterior predictive to the learner's
//! predictive). Both are estimated in nats by log-density Monte Carlo.
//! Differences of the Bayes risk curve estimate conditional mutual
//! information, which in turn bounds how many extra demonstrations a
//! learner with a non-vanishing excess risk needs.

mod bounds;
mod curves;

pub use bounds::{
    crude_bound_check, first_exceedance, lower_bound, n_bma, mutual_information, necessary_conditions, suboptimality, Count, CrudeBoundRow,
    ExcessFloor, MiEstimate, SubOptReport, DEFAULT_T_BAR,
};
pub use curves::{
    bayes_risk_curve, excess_risk_curve, probe_points, ExcessCurve, ProbeSet, RiskCurve, RiskOptions, Series,
};
