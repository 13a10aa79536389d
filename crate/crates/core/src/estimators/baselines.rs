use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::hierarchy::PosteriorSweep;
use super::posterior::PriorScaling;
use super::selectors::SelectorKind;
use crate::environment::{sample_task, Scenario, SeedPolicy, TaskInstance};
use crate::error::Result;
use crate::ingest::{Dataset, PredictionRecord};

/// A learner the suite can run internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Baseline {
    Selector(SelectorKind),
    /// Predicts the clean target `f*(X_{t+1})`; its loss is the noise floor.
    Oracle,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Selector(k) => k.name(),
            Baseline::Oracle => "ORACLE",
        }
    }

    pub fn selectors() -> Vec<Baseline> {
        SelectorKind::ALL.iter().map(|&k| Baseline::Selector(k)).collect()
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("ORACLE") {
            Ok(Baseline::Oracle)
        } else {
            s.parse().map(Baseline::Selector)
        }
    }
}

/// Predictions of `baselines` on one task for every `t = 1..=T`.
pub fn run_task_baselines(
    task: &TaskInstance,
    s: &Scenario,
    scaling: PriorScaling,
    baselines: &[Baseline],
) -> Result<Vec<PredictionRecord>> {
    let horizon = task.horizon();
    let mut out = Vec::with_capacity(horizon * baselines.len());
    let mut sweep = PosteriorSweep::new(s, scaling);
    for t in 1..=horizon {
        sweep.push(task.xs[t - 1], task.ys[t - 1])?;
        let post = sweep.posterior()?;
        let (x, y) = task.query(t);
        let means = post.class_means(x);
        for &b in baselines {
            let y_pred = match b {
                Baseline::Selector(kind) => post.predict_from_means(kind, &means),
                Baseline::Oracle => task.ys_clean[t],
            };
            out.push(PredictionRecord {
                learner_id: b.name().to_string(),
                scenario_id: s.id.clone(),
                replication: task.replication,
                t,
                x_query: x,
                y_true: y,
                y_pred,
            });
        }
    }
    Ok(out)
}

/// Runs `baselines` on every replication of `s` in parallel; output is key-sorted.
pub fn run_baselines(
    s: &Scenario,
    seeds: &SeedPolicy,
    scaling: PriorScaling,
    baselines: &[Baseline],
) -> Result<Dataset> {
    let parts = (0..s.replications)
        .into_par_iter()
        .map(|r| {
            let task = sample_task(s, r, seeds)?;
            run_task_baselines(&task, s, scaling, baselines)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ds = Dataset::new(parts.into_iter().flatten().collect())?;
    ds.sort();
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::HierarchicalPosterior;

    #[test]
    fn names_parse() {
        assert_eq!("oracle".parse::<Baseline>().unwrap(), Baseline::Oracle);
        assert_eq!("BMA".parse::<Baseline>().unwrap(), Baseline::Selector(SelectorKind::Bma));
    }

    #[test]
    fn sweep_predictions_match_batch_fits() {
        let s = Scenario::new("b", 4, 1.0, 0.05).with_horizon(12).with_replications(3);
        let seeds = SeedPolicy::new(5);
        let task = sample_task(&s, 2, &seeds).unwrap();
        let recs = run_task_baselines(&task, &s, PriorScaling::Matched, &Baseline::selectors()).unwrap();
        assert_eq!(recs.len(), 12 * 5);
        for r in &recs {
            let post = HierarchicalPosterior::fit(&task.xs[..r.t], &task.ys[..r.t], &s, PriorScaling::Matched).unwrap();
            let kind: SelectorKind = r.learner_id.parse().unwrap();
            assert_eq!(post.predict(kind, r.x_query), r.y_pred);
            assert_eq!(r.x_query, task.xs[r.t]);
        }
    }

    #[test]
    fn dataset_is_sorted_and_complete() {
        let s = Scenario::new("b", 3, 1.0, 0.05).with_horizon(5).with_replications(4);
        let ds = run_baselines(&s, &SeedPolicy::new(1), PriorScaling::Matched, &[Baseline::Oracle]).unwrap();
        assert_eq!(ds.len(), 20);
        assert!(ds.records.windows(2).all(|w| w[0].key() < w[1].key()));
    }
}
