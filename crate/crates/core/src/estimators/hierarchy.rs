use crate::environment::{FeatureMap, Scenario};
use crate::error::{Error, Result};
use crate::stats::{log_sum_exp, normal_log_density};

use super::posterior::{fit_class, log_evidence_kernel, ClassPosterior, ClassStats, PriorScaling};

/// Posterior class probabilities under a uniform prior over `1..=M`:
/// a max-shifted softmax of the log evidences.
pub fn class_posterior_weights(log_evidences: &[f64]) -> Vec<f64> {
    log_class_weights(log_evidences).into_iter().map(f64::exp).collect()
}

fn log_class_weights(log_evidences: &[f64]) -> Vec<f64> {
    let norm = log_sum_exp(log_evidences);
    log_evidences.iter().map(|l| l - norm).collect()
}

/// Per-class posteriors for `m = 1..=M` plus their posterior probabilities.
#[derive(Debug, Clone)]
pub struct HierarchicalPosterior {
    pub classes: Vec<ClassPosterior>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub period: f64,
    pub noise_var: f64,
}

impl HierarchicalPosterior {
    fn from_classes(classes: Vec<ClassPosterior>, s: &Scenario) -> Self {
        let evidences: Vec<f64> = classes.iter().map(|c| c.log_evidence).collect();
        let log_weights = log_class_weights(&evidences);
        let weights = log_weights.iter().map(|l| l.exp()).collect();
        Self {
            classes,
            weights,
            log_weights,
            period: s.period,
            noise_var: s.sigma_eps_sq,
        }
    }

    /// Batch fit of every class on `(xs, ys)`.
    pub fn fit(xs: &[f64], ys: &[f64], s: &Scenario, scaling: PriorScaling) -> Result<Self> {
        let classes = (1..=s.max_dim)
            .map(|m| fit_class(xs, ys, m, s, scaling))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_classes(classes, s))
    }

    pub fn max_dim(&self) -> usize {
        self.classes.len()
    }

    pub fn n_obs(&self) -> usize {
        self.classes[0].n_obs
    }

    /// Features of order `M` at `x`; every class reads its own prefix.
    pub fn features(&self, x: f64) -> Vec<f64> {
        FeatureMap::new(self.max_dim(), self.period).eval(x)
    }

    /// Ridge prediction of every class at `x`.
    pub fn class_means(&self, x: f64) -> Vec<f64> {
        let phi = self.features(x);
        self.classes.iter().map(|c| c.predict_mean(&phi)).collect()
    }

    pub fn predictive_mixture(&self, x: f64) -> PredictiveMixture {
        let phi = self.features(x);
        PredictiveMixture {
            means: self.classes.iter().map(|c| c.predict_mean(&phi)).collect(),
            variances: self.classes.iter().map(|c| c.predictive_variance(&phi)).collect(),
            weights: self.weights.clone(),
            log_weights: self.log_weights.clone(),
        }
    }
}

/// Posterior predictive of `Y_{t+1}` at one query: a Gaussian mixture over classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveMixture {
    pub means: Vec<f64>,
    /// Per-class predictive variances; each includes the noise variance.
    pub variances: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl PredictiveMixture {
    /// Mixture mean; identical to the model-averaged point prediction.
    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// `log sum_k w_k N(y; mu_k, v_k)` evaluated in log space.
    pub fn log_density(&self, y: f64) -> f64 {
        let terms: Vec<f64> = self
            .log_weights
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(lw, (&mu, &v))| lw + normal_log_density(y, mu, v))
            .collect();
        log_sum_exp(&terms)
    }
}

/// Incremental posterior over a growing demonstration prefix.
///
/// Statistics are accumulated once at order `M` in arrival order, so the
/// posterior after `t` pushes is bit-identical to a batch refit on the same
/// `t` demonstrations; each step re-factorizes from those statistics.
#[derive(Debug, Clone)]
pub struct PosteriorSweep {
    scenario: Scenario,
    scaling: PriorScaling,
    feature_map: FeatureMap,
    stats: ClassStats,
    rows: Vec<Vec<f64>>,
    ys: Vec<f64>,
}

impl PosteriorSweep {
    pub fn new(s: &Scenario, scaling: PriorScaling) -> Self {
        Self {
            scenario: s.clone(),
            scaling,
            feature_map: FeatureMap::new(s.max_dim, s.period),
            stats: ClassStats::new(s.max_dim),
            rows: Vec::new(),
            ys: Vec::new(),
        }
    }

    pub fn n_obs(&self) -> usize {
        self.ys.len()
    }

    pub fn push(&mut self, x: f64, y: f64) -> Result<()> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::numerical(format!("non-finite demonstration ({x}, {y})")));
        }
        let phi = self.feature_map.eval(x);
        self.stats.push(&phi, y);
        self.rows.push(phi);
        self.ys.push(y);
        Ok(())
    }

    pub fn posterior(&self) -> Result<HierarchicalPosterior> {
        let s = &self.scenario;
        let classes = (1..=s.max_dim)
            .map(|m| {
                let stats = self.stats.truncated(m);
                let v = self.scaling.coef_variance(s.sigma_w_sq, m);
                let mut post = ClassPosterior::from_stats(&stats, s.sigma_eps_sq, v)?;
                if self.ys.len() <= stats.dim() {
                    post.log_evidence =
                        log_evidence_kernel(&self.rows, stats.dim(), &self.ys, v, s.sigma_eps_sq)?;
                }
                Ok(post)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HierarchicalPosterior::from_classes(classes, s))
    }
}
