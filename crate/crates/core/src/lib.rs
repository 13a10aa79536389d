//! Sample-complexity benchmarking of in-context learners.
//!
//! The crate is organised around the pipeline a benchmark run follows:
//!
//! * [`environment`] samples regression tasks from a hierarchical Fourier
//!   prior with replayable seeding.
//! * [`estimators`] holds the closed-form Bayesian learners (per-class ridge
//!   posteriors, model averaging, AIC/BIC/BMC selectors, the equal-weight
//!   ensemble) and the sweep that turns them into predictions.
//! * [`ingest`] defines the prediction record wire format that external
//!   learners use to enter the benchmark.
//! * [`metrics`] reduces records to error curves, sample complexities,
//!   performance ratios and performance profiles.
//! * [`riskinfo`] estimates Bayes and excess risk in nats and evaluates the
//!   suboptimality lower bound machinery built on them.

pub mod environment;
pub mod error;
pub mod estimators;
pub mod ingest;
pub mod metrics;
pub mod riskinfo;
pub mod stats;

pub use environment::{FeatureMap, Scenario, ScenarioGrid, SeedPolicy, TaskInstance};
pub use error::{Error, Result};
pub use estimators::{
    ClassPosterior, HierarchicalPosterior, PredictiveMixture, PriorScaling, SelectorKind,
};
pub use ingest::{Dataset, PredictionRecord};
pub use metrics::{CurveSet, ErrorCurve, ProfileResult, QuantileSpec, Ratio, SampleComplexity};
pub use riskinfo::{Count, ExcessFloor, RiskCurve, SubOptReport};


