//! Fixtures shared by the benchmarks.

use iclbench_core::environment::sample_task;
use iclbench_core::metrics::ErrorCurve;
use iclbench_core::{CurveSet, Scenario, ScenarioGrid, SeedPolicy, TaskInstance};

/// A mid-SNR default-grid scenario.
pub fn scenario() -> Scenario {
    ScenarioGrid::default9()
        .get("sw1_se0.03")
        .expect("default grid has sw1_se0.03")
        .clone()
}

pub fn task(replication: usize) -> TaskInstance {
    sample_task(&scenario(), replication, &SeedPolicy::new(0)).expect("default scenario samples")
}

/// `learners x scenarios` power-law curves `c_b / t^a_s` with horizon `horizon`.
pub fn synthetic_curves(learners: usize, scenarios: usize, horizon: usize) -> CurveSet {
    let mut set = CurveSet::new();
    for b in 0..learners {
        for s in 0..scenarios {
            let c = 1.0 + 0.1 * b as f64;
            let a = 0.5 + 0.05 * s as f64;
            let mse = (1..=horizon).map(|t| c / (t as f64).powf(a)).collect();
            set.insert(ErrorCurve::new(format!("L{b}"), format!("S{s}"), mse, vec![0.0; horizon], 1));
        }
    }
    set
}
