use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::environment::{sample_task, Scenario, SeedPolicy, Stream, TaskInstance};
use crate::error::{Error, Result};
use crate::estimators::{PosteriorSweep, PriorScaling};
use crate::ingest::PredictionRecord;
use crate::stats::{mean_stderr, normal_log_density};

/// Per-`t` Monte-Carlo means on `t = start, start + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub start: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Series {
    pub fn new(start: usize, mean: Vec<f64>, stderr: Vec<f64>) -> Self {
        assert_eq!(mean.len(), stderr.len());
        Self { start, mean, stderr }
    }

    /// Last covered `t`; `None` when empty.
    pub fn end(&self) -> Option<usize> {
        (!self.mean.is_empty()).then(|| self.start + self.mean.len() - 1)
    }

    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.start).and_then(|k| self.mean.get(k).copied())
    }

    pub fn stderr_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.start).and_then(|k| self.stderr.get(k).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.mean
            .iter()
            .zip(&self.stderr)
            .enumerate()
            .map(move |(k, (&m, &s))| (self.start + k, m, s))
    }

    /// Reduces `samples[rep][k]`, skipping non-finite entries; returns the
    /// series and the number of skipped entries.
    fn reduce(start: usize, samples: &[Vec<f64>]) -> (Self, usize) {
        let width = samples.first().map_or(0, Vec::len);
        let mut mean = Vec::with_capacity(width);
        let mut stderr = Vec::with_capacity(width);
        let mut skipped = 0;
        let mut column = Vec::with_capacity(samples.len());
        for k in 0..width {
            column.clear();
            for row in samples {
                let v = row[k];
                if v.is_finite() {
                    column.push(v);
                } else {
                    skipped += 1;
                }
            }
            let ms = mean_stderr(&column);
            mean.push(ms.mean);
            stderr.push(ms.stderr);
        }
        (Self::new(start, mean, stderr), skipped)
    }
}

/// Monte-Carlo options shared by the risk estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskOptions {
    /// Held-out probe points per replication for the Bayes risk.
    pub probes: usize,
    pub scaling: PriorScaling,
}

impl Default for RiskOptions {
    fn default() -> Self {
        Self {
            probes: 32,
            scaling: PriorScaling::Matched,
        }
    }
}

/// Held-out `(X, Y)` pairs from the probe stream of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    pub xs: Vec<f64>,
    pub ys_clean: Vec<f64>,
    pub ys: Vec<f64>,
}

/// Draws `k` probe inputs then `k` noise terms, independent of the task stream.
pub fn probe_points(task: &TaskInstance, s: &Scenario, k: usize, seeds: &SeedPolicy) -> ProbeSet {
    let mut rng = seeds.rng(Stream::Probe, &s.id, task.replication);
    let xs: Vec<f64> = (0..k).map(|_| rng.random_range(s.x_min..=s.x_max)).collect();
    let ys_clean: Vec<f64> = xs.iter().map(|&x| task.target(x)).collect();
    let sigma = s.sigma_eps_sq.sqrt();
    let ys = ys_clean
        .iter()
        .map(|f| f + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    ProbeSet { xs, ys_clean, ys }
}

/// Excess-risk estimate of one learner on one scenario, with the on-sample
/// Bayes term and their sum, all on `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessCurve {
    pub learner_id: String,
    pub scenario_id: String,
    pub n_reps: usize,
    /// `log P_hat(Y) - log Normal(Y; y_pred, sigma^2)`.
    pub excess: Series,
    /// `log Normal(Y; f*, sigma^2) - log P_hat(Y)` on the same samples.
    pub bayes_on_sample: Series,
    /// `log Normal(Y; f*, sigma^2) - log Normal(Y; y_pred, sigma^2)`.
    pub total: Series,
    pub excluded: usize,
}

/// Bayes risk on `t = 0..=T` and optionally one learner's excess risk.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub scenario_id: String,
    pub n_reps: usize,
    pub bayes: Series,
    /// Per-replication samples `[rep][t]`; empty for synthetic curves.
    pub bayes_samples: Vec<Vec<f64>>,
    pub excess: Option<ExcessCurve>,
    /// Non-finite samples left out of the Bayes-risk means.
    pub excluded: usize,
}

impl RiskCurve {
    /// Deterministic curves with zero standard error, for analytic checks.
    ///
    /// `bayes(t)` is evaluated on `t = 0..=T`, `excess(t)` on `t = 1..=T`.
    pub fn synthetic(horizon: usize, bayes: impl Fn(usize) -> f64, excess: impl Fn(usize) -> f64) -> Self {
        let b: Vec<f64> = (0..=horizon).map(bayes).collect();
        let x: Vec<f64> = (1..=horizon).map(excess).collect();
        let zeros = |n| vec![0.0; n];
        let ex = ExcessCurve {
            learner_id: "synthetic".into(),
            scenario_id: "synthetic".into(),
            n_reps: 0,
            bayes_on_sample: Series::new(1, b[1..].to_vec(), zeros(horizon)),
            total: Series::new(1, b[1..].iter().zip(&x).map(|(p, q)| p + q).collect(), zeros(horizon)),
            excess: Series::new(1, x, zeros(horizon)),
            excluded: 0,
        };
        Self {
            scenario_id: "synthetic".into(),
            n_reps: 0,
            bayes: Series::new(0, b, zeros(horizon + 1)),
            bayes_samples: Vec::new(),
            excess: Some(ex),
            excluded: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.bayes.end().unwrap_or(0)
    }

    pub fn with_excess(mut self, excess: ExcessCurve) -> Result<Self> {
        if excess.scenario_id != self.scenario_id {
            return Err(Error::data(format!(
                "excess curve for {} attached to Bayes curve for {}",
                excess.scenario_id, self.scenario_id
            )));
        }
        self.excess = Some(excess);
        Ok(self)
    }
}

/// Bayes-risk curve `t = 0..=T` over `n_reps` replications.
///
/// Each replication scores the posterior predictive after `t`
/// demonstrations against the oracle on one fixed set of probe points, so
/// the samples at different `t` share their random numbers.
pub fn bayes_risk_curve(s: &Scenario, n_reps: usize, seeds: &SeedPolicy, opts: &RiskOptions) -> Result<RiskCurve> {
    if n_reps == 0 || n_reps > s.replications {
        return Err(Error::config(
            "n_reps",
            format!("{n_reps} outside 1..={} for scenario {}", s.replications, s.id),
        ));
    }
    if opts.probes == 0 {
        return Err(Error::config("probes", "must be at least 1"));
    }
    let samples = (0..n_reps)
        .into_par_iter()
        .map(|rep| bayes_samples_one(s, rep, seeds, opts))
        .collect::<Result<Vec<_>>>()?;
    let (bayes, excluded) = Series::reduce(0, &samples);
    Ok(RiskCurve {
        scenario_id: s.id.clone(),
        n_reps,
        bayes,
        bayes_samples: samples,
        excess: None,
        excluded,
    })
}

fn bayes_samples_one(s: &Scenario, rep: usize, seeds: &SeedPolicy, opts: &RiskOptions) -> Result<Vec<f64>> {
    let task = sample_task(s, rep, seeds)?;
    let probes = probe_points(&task, s, opts.probes, seeds);
    let oracle: Vec<f64> = probes
        .ys
        .iter()
        .zip(&probes.ys_clean)
        .map(|(&y, &f)| normal_log_density(y, f, s.sigma_eps_sq))
        .collect();
    let mut sweep = PosteriorSweep::new(s, opts.scaling);
    let mut out = Vec::with_capacity(s.horizon + 1);
    for t in 0..=s.horizon {
        if t > 0 {
            sweep.push(task.xs[t - 1], task.ys[t - 1])?;
        }
        let post = sweep.posterior()?;
        let mut acc = 0.0;
        let mut n = 0usize;
        for ((&x, &y), &lo) in probes.xs.iter().zip(&probes.ys).zip(&oracle) {
            let v = lo - post.predictive_mixture(x).log_density(y);
            if v.is_finite() {
                acc += v;
                n += 1;
            }
        }
        out.push(if n > 0 { acc / n as f64 } else { f64::NAN });
    }
    Ok(out)
}

/// Excess risk of a point-prediction learner, lifted to `Normal(y_pred, sigma^2)`.
///
/// Tasks are replayed from `seeds`; every record's `x_query` must match the
/// replayed input, and each replication must cover `t = 1..=T`.
pub fn excess_risk_curve(
    records: &[&PredictionRecord],
    s: &Scenario,
    seeds: &SeedPolicy,
    scaling: PriorScaling,
) -> Result<ExcessCurve> {
    let first = records
        .first()
        .ok_or_else(|| Error::data(format!("no records for scenario {}", s.id)))?;
    let learner = first.learner_id.clone();
    let mut by_rep: BTreeMap<usize, Vec<&PredictionRecord>> = BTreeMap::new();
    for r in records {
        if r.learner_id != learner || r.scenario_id != s.id {
            return Err(Error::data(format!(
                "records mix ({learner}, {}) with ({}, {})",
                s.id, r.learner_id, r.scenario_id
            )));
        }
        by_rep.entry(r.replication).or_default().push(r);
    }
    let mut reps = Vec::with_capacity(by_rep.len());
    for (rep, mut rows) in by_rep {
        rows.sort_by_key(|r| r.t);
        let ts: Vec<usize> = rows.iter().map(|r| r.t).collect();
        if ts.len() != s.horizon || ts.iter().enumerate().any(|(k, &t)| t != k + 1) {
            return Err(Error::data(format!(
                "{learner}/{} rep {rep}: expected t = 1..={} exactly once each",
                s.id, s.horizon
            )));
        }
        reps.push((rep, rows));
    }
    let rows = reps
        .par_iter()
        .map(|(rep, rows)| excess_samples_one(s, *rep, rows, seeds, scaling))
        .collect::<Result<Vec<_>>>()?;
    let pick = |k: usize| -> Vec<Vec<f64>> { rows.iter().map(|r| r.iter().map(|v| v[k]).collect()).collect() };
    let (excess, e1) = Series::reduce(1, &pick(0));
    let (bayes_on_sample, e2) = Series::reduce(1, &pick(1));
    let (total, e3) = Series::reduce(1, &pick(2));
    Ok(ExcessCurve {
        learner_id: learner,
        scenario_id: s.id.clone(),
        n_reps: rows.len(),
        excess,
        bayes_on_sample,
        total,
        excluded: e1.max(e2).max(e3),
    })
}

fn excess_samples_one(
    s: &Scenario,
    rep: usize,
    rows: &[&PredictionRecord],
    seeds: &SeedPolicy,
    scaling: PriorScaling,
) -> Result<Vec<[f64; 3]>> {
    let task = sample_task(s, rep, seeds)?;
    let mut sweep = PosteriorSweep::new(s, scaling);
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let t = r.t;
        sweep.push(task.xs[t - 1], task.ys[t - 1])?;
        let x = task.xs[t];
        if (r.x_query - x).abs() > 1e-9 * (1.0 + x.abs()) {
            return Err(Error::data(format!(
                "{}/{} rep {rep} t {t}: x_query {} does not match replayed input {x}",
                r.learner_id, s.id, r.x_query
            )));
        }
        let y = r.y_true;
        let log_post = sweep.posterior()?.predictive_mixture(x).log_density(y);
        let log_learner = normal_log_density(y, r.y_pred, s.sigma_eps_sq);
        let log_oracle = normal_log_density(y, task.ys_clean[t], s.sigma_eps_sq);
        out.push([log_post - log_learner, log_oracle - log_post, log_oracle - log_learner]);
    }
    Ok(out)
}
