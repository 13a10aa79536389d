//! Hierarchical Fourier-regression task distribution.
//!
//! A task is drawn in three steps: an implicit dimension `m ~ U{1..M}`, a
//! weight vector `w ~ N(0, sigma_w^2 I_{2m+1})`, and a stream of `T + 1`
//! uniform inputs with noisy outputs `y = w'phi_m(x) / sqrt(m+1) + eps`.

mod features;
mod scenario;
mod seeding;
mod task;

pub use features::FeatureMap;
pub use scenario::{Scenario, ScenarioGrid};
pub use seeding::{SeedPolicy, Stream};
pub use task::{sample_task, TaskInstance};
