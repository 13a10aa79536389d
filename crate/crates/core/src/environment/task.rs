use rand::Rng;
use rand_distr::StandardNormal;

use super::features::FeatureMap;
use super::scenario::Scenario;
use super::seeding::{SeedPolicy, Stream};
use crate::error::{Error, Result};

/// One sampled task: the latent target plus its `T + 1` observations.
///
/// `xs[k]`, `ys[k]` hold `X_{k+1}`, `Y_{k+1}`; a learner conditioned on `t`
/// demonstrations sees `xs[..t]`, `ys[..t]` and is queried at `xs[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskInstance {
    pub scenario_id: String,
    pub replication: usize,
    pub m: usize,
    pub period: f64,
    pub weights: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys_clean: Vec<f64>,
    pub ys: Vec<f64>,
}

impl TaskInstance {
    pub fn feature_map(&self) -> FeatureMap {
        FeatureMap::new(self.m, self.period)
    }

    /// `f*(x) = w' phi_m(x) / sqrt(m + 1)`.
    pub fn target(&self, x: f64) -> f64 {
        target_value(&self.weights, &self.feature_map().eval(x), self.m)
    }

    pub fn horizon(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn demos(&self, t: usize) -> (&[f64], &[f64]) {
        (&self.xs[..t], &self.ys[..t])
    }

    /// Test point `(X_{t+1}, Y_{t+1})` after `t` demonstrations.
    pub fn query(&self, t: usize) -> (f64, f64) {
        (self.xs[t], self.ys[t])
    }
}

fn target_value(weights: &[f64], phi: &[f64], m: usize) -> f64 {
    let dot: f64 = weights.iter().zip(phi).map(|(w, p)| w * p).sum();
    dot / ((m + 1) as f64).sqrt()
}

/// Draws task `replication` of scenario `s`.
///
/// Draw order on the task stream: `m`, the `2m+1` weights, the `T+1` inputs,
/// then the `T+1` noise terms.
pub fn sample_task(s: &Scenario, replication: usize, seeds: &SeedPolicy) -> Result<TaskInstance> {
    if replication >= s.replications {
        return Err(Error::config(
            "replication",
            format!("{replication} out of range for scenario {} ({} replications)", s.id, s.replications),
        ));
    }
    let mut rng = seeds.rng(Stream::Task, &s.id, replication);
    let m = rng.random_range(1..=s.max_dim);
    let sigma_w = s.sigma_w_sq.sqrt();
    let weights: Vec<f64> = (0..2 * m + 1)
        .map(|_| sigma_w * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let n = s.horizon + 1;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(s.x_min..=s.x_max)).collect();
    let fm = FeatureMap::new(m, s.period);
    let mut phi = vec![0.0; fm.dim()];
    let ys_clean: Vec<f64> = xs
        .iter()
        .map(|&x| {
            fm.eval_into(x, &mut phi);
            target_value(&weights, &phi, m)
        })
        .collect();
    let sigma_eps = s.sigma_eps_sq.sqrt();
    let ys = ys_clean
        .iter()
        .map(|f| f + sigma_eps * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(TaskInstance {
        scenario_id: s.id.clone(),
        replication,
        m,
        period: s.period,
        weights,
        xs,
        ys_clean,
        ys,
    })
}
