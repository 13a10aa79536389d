use std::collections::BTreeMap;

use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::ingest::PredictionRecord;
use crate::stats::mean_stderr;

/// Per-`t` Monte-Carlo mean loss of one learner on one scenario.
///
/// `mse[k]` and `stderr[k]` belong to `t = k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub learner_id: String,
    pub scenario_id: String,
    pub mse: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_reps: usize,
}

impl ErrorCurve {
    pub fn new(learner_id: impl Into<String>, scenario_id: impl Into<String>, mse: Vec<f64>, stderr: Vec<f64>, n_reps: usize) -> Self {
        assert_eq!(mse.len(), stderr.len());
        Self {
            learner_id: learner_id.into(),
            scenario_id: scenario_id.into(),
            mse,
            stderr,
            n_reps,
        }
    }

    pub fn horizon(&self) -> usize {
        self.mse.len()
    }

    /// MSE after `t` demonstrations, `1 <= t <= T`.
    pub fn at(&self, t: usize) -> f64 {
        self.mse[t - 1]
    }

    pub fn stderr_at(&self, t: usize) -> f64 {
        self.stderr[t - 1]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mse: self.mse.iter().map(|v| v * c).collect(),
            stderr: self.stderr.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Reduces per-`(replication, t)` values on a complete `replications x T` grid.
fn reduce_grid(
    learner_id: &str,
    scenario: &Scenario,
    values: impl IntoIterator<Item = (usize, usize, f64)>,
) -> Result<ErrorCurve> {
    let (reps, horizon) = (scenario.replications, scenario.horizon);
    let mut grid: Vec<Option<f64>> = vec![None; reps * horizon];
    for (rep, t, v) in values {
        if rep >= reps || t < 1 || t > horizon {
            return Err(Error::data(format!(
                "{learner_id}/{}: cell (rep {rep}, t {t}) outside the scenario grid",
                scenario.id
            )));
        }
        grid[rep * horizon + t - 1] = Some(v);
    }
    let gaps: Vec<String> = grid
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(k, _)| format!("(rep {}, t {})", k / horizon, k % horizon + 1))
        .collect();
    if !gaps.is_empty() {
        let shown: Vec<&str> = gaps.iter().take(20).map(String::as_str).collect();
        return Err(Error::data(format!(
            "{learner_id}/{}: {} missing cells: {}{}",
            scenario.id,
            gaps.len(),
            shown.join(", "),
            if gaps.len() > 20 { ", ..." } else { "" }
        )));
    }
    let mut mse = Vec::with_capacity(horizon);
    let mut stderr = Vec::with_capacity(horizon);
    let mut column = vec![0.0; reps];
    for t in 0..horizon {
        for (rep, slot) in column.iter_mut().enumerate() {
            *slot = grid[rep * horizon + t].expect("grid is complete");
        }
        let ms = mean_stderr(&column);
        mse.push(ms.mean);
        stderr.push(ms.stderr);
    }
    Ok(ErrorCurve::new(learner_id, &scenario.id, mse, stderr, reps))
}

fn single_learner<'a>(records: &[&'a PredictionRecord], scenario: &Scenario) -> Result<&'a str> {
    let first = records
        .first()
        .ok_or_else(|| Error::data(format!("no records for scenario {}", scenario.id)))?;
    if let Some(r) = records
        .iter()
        .find(|r| r.learner_id != first.learner_id || r.scenario_id != scenario.id)
    {
        return Err(Error::data(format!(
            "records mix ({}, {}) with ({}, {})",
            first.learner_id, scenario.id, r.learner_id, r.scenario_id
        )));
    }
    Ok(&first.learner_id)
}

/// Squared-error curve against the noisy `Y_{t+1}`.
pub fn error_curve(records: &[&PredictionRecord], scenario: &Scenario) -> Result<ErrorCurve> {
    let learner = single_learner(records, scenario)?;
    reduce_grid(
        learner,
        scenario,
        records.iter().map(|r| (r.replication, r.t, r.squared_error())),
    )
}

/// Per-`t` mean of `(y_pred_b - y_pred_ref)^2` on aligned record grids.
pub fn squared_prediction_difference(
    records_b: &[&PredictionRecord],
    records_ref: &[&PredictionRecord],
    scenario: &Scenario,
) -> Result<ErrorCurve> {
    let learner = single_learner(records_b, scenario)?;
    single_learner(records_ref, scenario)?;
    let reference: BTreeMap<(usize, usize), &PredictionRecord> =
        records_ref.iter().map(|r| ((r.replication, r.t), *r)).collect();
    if reference.len() != records_b.len() {
        return Err(Error::data(format!(
            "misaligned grids: {} reference cells vs {} cells for {learner}",
            reference.len(),
            records_b.len()
        )));
    }
    let mut values = Vec::with_capacity(records_b.len());
    for r in records_b {
        let other = reference.get(&(r.replication, r.t)).ok_or_else(|| {
            Error::data(format!("misaligned grids: no reference cell (rep {}, t {})", r.replication, r.t))
        })?;
        if other.x_query.to_bits() != r.x_query.to_bits() {
            return Err(Error::data(format!(
                "misaligned grids: x_query differs at (rep {}, t {})",
                r.replication, r.t
            )));
        }
        let d = r.y_pred - other.y_pred;
        values.push((r.replication, r.t, d * d));
    }
    reduce_grid(learner, scenario, values)
}
