use std::collections::BTreeMap;

use rayon::prelude::*;

use super::records::Dataset;
use crate::environment::{sample_task, ScenarioGrid, SeedPolicy};
use crate::error::{Error, Result};

/// Allowed deviation of `x_query` / `y_true` from the replayed task.
pub const REPLAY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub line: usize,
    pub learner_id: String,
    pub scenario_id: String,
    pub replication: usize,
    pub t: usize,
    pub field: &'static str,
    pub expected: f64,
    pub found: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioReport {
    pub checked: usize,
    pub mismatches: usize,
}

/// Replay check result, keyed and ordered independently of record order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub per_scenario: BTreeMap<String, ScenarioReport>,
    pub mismatches: Vec<Mismatch>,
}

impl ValidationReport {
    pub fn total_mismatches(&self) -> usize {
        self.mismatches.len()
    }

    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_clean() {
            return Ok(());
        }
        let mut msg: Vec<String> = self
            .mismatches
            .iter()
            .take(20)
            .map(|m| {
                format!(
                    "line {}: {} mismatch for ({}, {}, rep {}, t {}): expected {}, found {}",
                    m.line, m.field, m.learner_id, m.scenario_id, m.replication, m.t, m.expected, m.found
                )
            })
            .collect();
        if self.mismatches.len() > 20 {
            msg.push(format!("... and {} more", self.mismatches.len() - 20));
        }
        Err(Error::data(msg.join("\n")))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REPLAY_TOLERANCE * a.abs().max(1.0)
}

/// Regenerates every referenced task and compares `x_query` / `y_true`.
///
/// Records whose scenario is not in `grid` or whose indices fall outside the
/// scenario are reported as mismatches of field `key`.
pub fn validate_against_environment(dataset: &Dataset, grid: &ScenarioGrid, seeds: &SeedPolicy) -> ValidationReport {
    // (scenario, replication) -> record indices
    let mut by_task: BTreeMap<(&str, usize), Vec<usize>> = BTreeMap::new();
    for (k, r) in dataset.records.iter().enumerate() {
        by_task.entry((&r.scenario_id, r.replication)).or_default().push(k);
    }
    let groups: Vec<_> = by_task.into_iter().collect();
    let results: Vec<(String, usize, Vec<Mismatch>)> = groups
        .par_iter()
        .map(|((scenario_id, replication), idx)| {
            let mut out = Vec::new();
            let mismatch = |k: usize, field, expected, found| {
                let r = &dataset.records[k];
                Mismatch {
                    line: dataset.lines[k],
                    learner_id: r.learner_id.clone(),
                    scenario_id: r.scenario_id.clone(),
                    replication: r.replication,
                    t: r.t,
                    field,
                    expected,
                    found,
                }
            };
            let task = grid
                .get(scenario_id)
                .and_then(|s| sample_task(s, *replication, seeds).ok());
            match task {
                None => {
                    for &k in idx {
                        out.push(mismatch(k, "key", f64::NAN, f64::NAN));
                    }
                }
                Some(task) => {
                    for &k in idx {
                        let r = &dataset.records[k];
                        if r.t < 1 || r.t > task.horizon() {
                            out.push(mismatch(k, "key", f64::NAN, r.t as f64));
                            continue;
                        }
                        let (x, y) = task.query(r.t);
                        if !close(x, r.x_query) {
                            out.push(mismatch(k, "x_query", x, r.x_query));
                        }
                        if !close(y, r.y_true) {
                            out.push(mismatch(k, "y_true", y, r.y_true));
                        }
                    }
                }
            }
            (scenario_id.to_string(), idx.len(), out)
        })
        .collect();

    let mut report = ValidationReport::default();
    for (scenario_id, checked, mismatches) in results {
        let entry = report.per_scenario.entry(scenario_id).or_default();
        entry.checked += checked;
        entry.mismatches += mismatches.len();
        report.mismatches.extend(mismatches);
    }
    report.mismatches.sort_by(|a, b| {
        (&a.learner_id, &a.scenario_id, a.replication, a.t, a.field)
            .cmp(&(&b.learner_id, &b.scenario_id, b.replication, b.t, b.field))
    });
    report
}
