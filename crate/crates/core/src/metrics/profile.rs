use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::complexity::{reference_quantile, sample_complexity, Ratio, SampleComplexity};
use super::curve::ErrorCurve;
use crate::error::{Error, Result};

/// Requirement recipe: pool the reference learners' curves on a scenario
/// and take the reversed quantile at level `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSpec {
    pub reference: Vec<String>,
    pub q: f64,
}

impl QuantileSpec {
    pub fn new<S: Into<String>>(reference: impl IntoIterator<Item = S>, q: f64) -> Self {
        Self {
            reference: reference.into_iter().map(Into::into).collect(),
            q,
        }
    }
}

/// Error curves keyed by `(learner_id, scenario_id)`.
#[derive(Debug, Clone, Default)]
pub struct CurveSet {
    curves: BTreeMap<(String, String), ErrorCurve>,
}

impl CurveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, curve: ErrorCurve) {
        self.curves
            .insert((curve.learner_id.clone(), curve.scenario_id.clone()), curve);
    }

    pub fn get(&self, learner: &str, scenario: &str) -> Result<&ErrorCurve> {
        self.curves
            .get(&(learner.to_string(), scenario.to_string()))
            .ok_or_else(|| Error::data(format!("no error curve for ({learner}, {scenario})")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ErrorCurve> {
        self.curves.values()
    }

    pub fn learners(&self) -> Vec<String> {
        let mut v: Vec<String> = self.curves.keys().map(|(l, _)| l.clone()).collect();
        v.dedup();
        v.sort();
        v.dedup();
        v
    }

    pub fn scenarios(&self) -> Vec<String> {
        let mut v: Vec<String> = self.curves.keys().map(|(_, s)| s.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Every curve multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            curves: self
                .curves
                .iter()
                .map(|(k, v)| (k.clone(), v.scaled(c)))
                .collect(),
        }
    }

    pub fn requirement(&self, scenario: &str, spec: &QuantileSpec) -> Result<f64> {
        let refs = spec
            .reference
            .iter()
            .map(|l| self.get(l, scenario))
            .collect::<Result<Vec<_>>>()?;
        reference_quantile(&refs, spec.q)
    }
}

impl FromIterator<ErrorCurve> for CurveSet {
    fn from_iter<I: IntoIterator<Item = ErrorCurve>>(iter: I) -> Self {
        let mut set = CurveSet::new();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

/// `N_b(r) / min_{b'} N_{b'}(r)` over the comparison set.
///
/// Errors when no comparison member meets `r` within the horizon.
pub fn performance_ratio(
    curves: &CurveSet,
    learner: &str,
    scenario: &str,
    r: f64,
    comparison: &[String],
) -> Result<Ratio> {
    let n_b = sample_complexity(curves.get(learner, scenario)?, r);
    let mut best: Option<usize> = None;
    for other in comparison {
        if let SampleComplexity::Finite(n) = sample_complexity(curves.get(other, scenario)?, r) {
            best = Some(best.map_or(n, |b| b.min(n)));
        }
    }
    let best = best.ok_or_else(|| {
        Error::data(format!(
            "no comparison learner reaches requirement {r} on {scenario}"
        ))
    })?;
    Ok(match n_b {
        SampleComplexity::Finite(n) => Ratio::Finite(n as f64 / best as f64),
        SampleComplexity::Infinite => Ratio::Infinite,
    })
}

/// Ratios of one learner across scenarios, with the profile `rho(tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileResult {
    pub learner_id: String,
    pub q: f64,
    /// Scenarios with a defined ratio.
    pub ratios: BTreeMap<String, Ratio>,
    /// Scenarios dropped because no comparison learner met the requirement.
    pub excluded: Vec<String>,
    /// Mean of finite ratios; `None` when there are none.
    pub mpr: Option<f64>,
    /// Number of finite ratios entering the mean.
    pub mpr_coverage: usize,
    /// `(tau, rho(tau))` pairs.
    pub profile: Vec<(f64, f64)>,
}

impl ProfileResult {
    pub fn rho(&self, tau: f64) -> f64 {
        rho(&self.ratios, tau)
    }
}

fn rho(ratios: &BTreeMap<String, Ratio>, tau: f64) -> f64 {
    if ratios.is_empty() {
        return 0.0;
    }
    let hits = ratios
        .values()
        .filter(|r| matches!(r, Ratio::Finite(v) if *v <= tau))
        .count();
    hits as f64 / ratios.len() as f64
}

/// Ratios, mean ratio and profile for `learner` over `scenarios`.
pub fn performance_profile(
    curves: &CurveSet,
    learner: &str,
    spec: &QuantileSpec,
    comparison: &[String],
    scenarios: &[String],
    tau_grid: &[f64],
) -> Result<ProfileResult> {
    let mut ratios = BTreeMap::new();
    let mut excluded = Vec::new();
    for s in scenarios {
        let r = curves.requirement(s, spec)?;
        curves.get(learner, s)?;
        for c in comparison {
            curves.get(c, s)?;
        }
        match performance_ratio(curves, learner, s, r, comparison) {
            Ok(ratio) => {
                ratios.insert(s.clone(), ratio);
            }
            Err(_) => excluded.push(s.clone()),
        }
    }
    let finite: Vec<f64> = ratios.values().filter_map(|r| r.finite()).collect();
    let mpr = (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
    let profile = tau_grid.iter().map(|&tau| (tau, rho(&ratios, tau))).collect();
    Ok(ProfileResult {
        learner_id: learner.to_string(),
        q: spec.q,
        mpr_coverage: finite.len(),
        ratios,
        excluded,
        mpr,
        profile,
    })
}

/// Mean performance ratio; errors when no scenario yields a finite ratio.
pub fn mean_performance_ratio(
    curves: &CurveSet,
    learner: &str,
    spec: &QuantileSpec,
    comparison: &[String],
    scenarios: &[String],
) -> Result<(f64, usize)> {
    let res = performance_profile(curves, learner, spec, comparison, scenarios, &[])?;
    res.mpr.map(|m| (m, res.mpr_coverage)).ok_or_else(|| {
        Error::data(format!(
            "{learner}: no scenario has a finite performance ratio at Q = {}",
            spec.q
        ))
    })
}

/// 60 log-spaced points from 1 to 3, endpoints exact.
pub fn default_tau_grid() -> Vec<f64> {
    let n = 60;
    let ln3 = 3f64.ln();
    (0..n)
        .map(|k| match k {
            0 => 1.0,
            k if k == n - 1 => 3.0,
            k => (ln3 * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `{0.01, 0.1, 0.2, ..., 0.9, 0.99}`.
pub fn default_q_grid() -> Vec<f64> {
    let mut q = vec![0.01];
    q.extend((1..=9).map(|k| k as f64 / 10.0));
    q.push(0.99);
    q
}
