use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::hierarchy::HierarchicalPosterior;

/// The principled baselines built on the per-class posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SelectorKind {
    Aic,
    Bic,
    Bmc,
    Ensemble,
    Bma,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 5] = [
        SelectorKind::Bma,
        SelectorKind::Aic,
        SelectorKind::Bic,
        SelectorKind::Bmc,
        SelectorKind::Ensemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectorKind::Aic => "AIC",
            SelectorKind::Bic => "BIC",
            SelectorKind::Bmc => "BMC",
            SelectorKind::Ensemble => "ENSEMBLE",
            SelectorKind::Bma => "BMA",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AIC" => Ok(SelectorKind::Aic),
            "BIC" => Ok(SelectorKind::Bic),
            "BMC" => Ok(SelectorKind::Bmc),
            "ENSEMBLE" => Ok(SelectorKind::Ensemble),
            "BMA" => Ok(SelectorKind::Bma),
            other => Err(format!("unknown selector `{other}`")),
        }
    }
}

/// Index of the smallest score; ties go to the smallest class.
fn argmin(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (k, s) in scores.enumerate() {
        if s < best.1 {
            best = (k, s);
        }
    }
    best.0
}

impl HierarchicalPosterior {
    /// AIC score `2k - 2 l_hat` of every class.
    pub fn aic_scores(&self) -> Vec<f64> {
        self.classes
            .iter()
            .map(|c| 2.0 * c.n_params() as f64 - 2.0 * c.log_likelihood)
            .collect()
    }

    /// BIC score `k ln t - 2 l_hat` of every class (`ln t` taken as 0 for `t <= 1`).
    pub fn bic_scores(&self) -> Vec<f64> {
        let log_t = if self.n_obs() > 1 { (self.n_obs() as f64).ln() } else { 0.0 };
        self.classes
            .iter()
            .map(|c| c.n_params() as f64 * log_t - 2.0 * c.log_likelihood)
            .collect()
    }

    /// Zero-based index (class `m = index + 1`) chosen by a single-model
    /// selector, `None` for BMA and ENSEMBLE.
    /// AIC and BIC fall back to the smallest class with no demonstrations.
    pub fn selected_class(&self, kind: SelectorKind) -> Option<usize> {
        let empty = self.n_obs() == 0;
        match kind {
            SelectorKind::Aic if empty => Some(0),
            SelectorKind::Bic if empty => Some(0),
            SelectorKind::Aic => Some(argmin(self.aic_scores().into_iter())),
            SelectorKind::Bic => Some(argmin(self.bic_scores().into_iter())),
            SelectorKind::Bmc => Some(argmin(self.log_weights.iter().map(|l| -l))),
            SelectorKind::Ensemble | SelectorKind::Bma => None,
        }
    }

    /// Point prediction of `kind` at `x`.
    pub fn predict(&self, kind: SelectorKind, x: f64) -> f64 {
        let means = self.class_means(x);
        self.predict_from_means(kind, &means)
    }

    /// Same as [`predict`](Self::predict) with per-class means already evaluated.
    pub fn predict_from_means(&self, kind: SelectorKind, means: &[f64]) -> f64 {
        match kind {
            SelectorKind::Bma => self.weights.iter().zip(means).map(|(w, m)| w * m).sum(),
            SelectorKind::Ensemble => means.iter().sum::<f64>() / means.len() as f64,
            _ => means[self.selected_class(kind).expect("single-model selector")],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_task, Scenario, SeedPolicy};
    use crate::estimators::{fit_class, class_posterior_weights, PriorScaling};
    use crate::environment::FeatureMap;

    #[test]
    fn names_round_trip() {
        for k in SelectorKind::ALL {
            assert_eq!(k.name().parse::<SelectorKind>().unwrap(), k);
        }
        assert!("ICL".parse::<SelectorKind>().is_err());
    }

    #[test]
    fn empty_context_predictions() {
        let s = Scenario::new("e", 10, 1.0, 0.1);
        let post = HierarchicalPosterior::fit(&[], &[], &s, PriorScaling::Matched).unwrap();
        for k in SelectorKind::ALL {
            assert_eq!(post.predict(k, 1.234), 0.0);
        }
        assert_eq!(post.selected_class(SelectorKind::Aic), Some(0));
        assert_eq!(post.selected_class(SelectorKind::Bic), Some(0));
        // Uniform weights tie; smallest class wins.
        assert_eq!(post.selected_class(SelectorKind::Bmc), Some(0));
    }

    #[test]
    fn single_class_collapses_selectors() {
        let s = Scenario::new("one", 1, 1.0, 0.1);
        let task = sample_task(&s, 0, &SeedPolicy::new(1)).unwrap();
        let post = HierarchicalPosterior::fit(&task.xs[..7], &task.ys[..7], &s, PriorScaling::Matched).unwrap();
        let x = task.xs[7];
        let bma = post.predict(SelectorKind::Bma, x);
        assert_eq!(bma, post.predict(SelectorKind::Bmc, x));
        assert_eq!(bma, post.predict(SelectorKind::Ensemble, x));
    }

    #[test]
    fn bma_is_posterior_weighted_average_of_independent_fits() {
        let s = Scenario::new("small", 3, 1.0, 0.1);
        let task = sample_task(&s, 9, &SeedPolicy::new(12)).unwrap();
        let (xs, ys) = task.demos(5);
        let post = HierarchicalPosterior::fit(xs, ys, &s, PriorScaling::Matched).unwrap();
        let x = task.xs[5];
        // Oracle: refit each class on its own and normalize.
        let fits: Vec<_> = (1..=3)
            .map(|m| fit_class(xs, ys, m, &s, PriorScaling::Matched).unwrap())
            .collect();
        let w = class_posterior_weights(&fits.iter().map(|f| f.log_evidence).collect::<Vec<_>>());
        let oracle: f64 = fits
            .iter()
            .zip(&w)
            .map(|(f, w)| w * f.predict_mean(&FeatureMap::new(f.m, s.period).eval(x)))
            .sum();
        assert!((post.predict(SelectorKind::Bma, x) - oracle).abs() < 1e-12);
        assert_eq!(post.predictive_mixture(x).mean(), post.predict(SelectorKind::Bma, x));
    }

    #[test]
    fn information_criteria_follow_their_formulas() {
        let s = Scenario::new("ic", 4, 1.0, 0.05);
        let task = sample_task(&s, 1, &SeedPolicy::new(2)).unwrap();
        let post = HierarchicalPosterior::fit(&task.xs[..20], &task.ys[..20], &s, PriorScaling::Matched).unwrap();
        for (k, c) in post.classes.iter().enumerate() {
            let d = (2 * c.m + 1) as f64;
            assert_eq!(post.aic_scores()[k], 2.0 * d - 2.0 * c.log_likelihood);
            assert_eq!(post.bic_scores()[k], d * 20f64.ln() - 2.0 * c.log_likelihood);
        }
        let aic = post.aic_scores();
        let chosen = post.selected_class(SelectorKind::Aic).unwrap();
        assert!(aic.iter().all(|&v| v >= aic[chosen]));
    }

    #[test]
    fn ties_break_toward_smaller_class() {
        assert_eq!(argmin([1.0, 0.5, 0.5, 2.0].into_iter()), 1);
    }
}
