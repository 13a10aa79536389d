use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::environment::{FeatureMap, Scenario};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// How the per-class coefficient prior variance is derived from `sigma_w^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorScaling {
    /// `v_m = sigma_w^2 / (m + 1)`: matches the generative normalizer.
    #[default]
    Matched,
    /// `v_m = sigma_w^2`: the unscaled penalty `sigma_eps^2 / sigma_w^2`.
    Literal,
}

impl PriorScaling {
    pub fn coef_variance(self, sigma_w_sq: f64, m: usize) -> f64 {
        match self {
            PriorScaling::Matched => sigma_w_sq / (m + 1) as f64,
            PriorScaling::Literal => sigma_w_sq,
        }
    }
}

/// Sufficient statistics `(Phi'Phi, Phi'Y, Y'Y, t)` of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub m: usize,
    pub gram: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub yty: f64,
    pub n_obs: usize,
}

impl ClassStats {
    pub fn new(m: usize) -> Self {
        let d = 2 * m + 1;
        Self {
            m,
            gram: DMatrix::zeros(d, d),
            rhs: DVector::zeros(d),
            yty: 0.0,
            n_obs: 0,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    /// Adds one row; `phi` may be longer than the class dimension (prefix is used).
    pub fn push(&mut self, phi: &[f64], y: f64) {
        let d = self.dim();
        for j in 0..d {
            for i in 0..d {
                self.gram[(i, j)] += phi[i] * phi[j];
            }
            self.rhs[j] += phi[j] * y;
        }
        self.yty += y * y;
        self.n_obs += 1;
    }

    /// Leading `(2m+1)`-block of statistics accumulated at a larger order.
    pub fn truncated(&self, m: usize) -> Self {
        assert!(m <= self.m);
        let d = 2 * m + 1;
        Self {
            m,
            gram: self.gram.view((0, 0), (d, d)).into_owned(),
            rhs: self.rhs.rows(0, d).into_owned(),
            yty: self.yty,
            n_obs: self.n_obs,
        }
    }
}

/// Gaussian posterior over the coefficients of class `F_m`.
#[derive(Debug, Clone)]
pub struct ClassPosterior {
    pub m: usize,
    pub n_obs: usize,
    /// Posterior mean, equal to the ridge estimate with penalty `lambda`.
    pub mean: DVector<f64>,
    /// Log marginal likelihood of the observed outputs under `F_m`.
    pub log_evidence: f64,
    /// Gaussian log-likelihood of the demonstrations at `mean`, noise known.
    pub log_likelihood: f64,
    pub noise_var: f64,
    pub coef_prior_var: f64,
    /// Cholesky factor of `Phi'Phi + lambda I`.
    precision_factor: Cholesky<f64, Dyn>,
}

impl ClassPosterior {
    /// Posterior from sufficient statistics; evidence in the weight-space form.
    pub fn from_stats(stats: &ClassStats, noise_var: f64, coef_prior_var: f64) -> Result<Self> {
        let d = stats.dim();
        let lambda = noise_var / coef_prior_var;
        let mut a = stats.gram.clone();
        for i in 0..d {
            a[(i, i)] += lambda;
        }
        if a.iter().any(|v| !v.is_finite()) || !stats.yty.is_finite() {
            return Err(Error::numerical(format!(
                "non-finite statistics for class m={}",
                stats.m
            )));
        }
        let chol = Cholesky::new(a).ok_or_else(|| {
            Error::numerical(format!(
                "regularized Gram matrix of class m={} is not positive definite",
                stats.m
            ))
        })?;
        let mean = chol.solve(&stats.rhs);
        let t = stats.n_obs as f64;

        // Y'Y - b'A^{-1}b = Y'Y - b'mean.
        let fit_term = (stats.yty - stats.rhs.dot(&mean)).max(0.0);
        let log_det_a = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let log_evidence = if stats.n_obs == 0 {
            0.0
        } else {
            -0.5 * t * (LN_2PI + noise_var.ln())
                - 0.5 * (log_det_a - d as f64 * lambda.ln())
                - 0.5 * fit_term / noise_var
        };

        // RSS = Y'Y - 2 mean'b + mean' G mean
        let rss = (stats.yty - 2.0 * mean.dot(&stats.rhs) + mean.dot(&(&stats.gram * &mean))).max(0.0);
        let log_likelihood = if stats.n_obs == 0 {
            0.0
        } else {
            -0.5 * t * (LN_2PI + noise_var.ln()) - 0.5 * rss / noise_var
        };

        Ok(Self {
            m: stats.m,
            n_obs: stats.n_obs,
            mean,
            log_evidence,
            log_likelihood,
            noise_var,
            coef_prior_var,
            precision_factor: chol,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    pub fn lambda(&self) -> f64 {
        self.noise_var / self.coef_prior_var
    }

    /// Number of coefficients counted by AIC/BIC.
    pub fn n_params(&self) -> usize {
        self.dim()
    }

    /// Posterior mean of `theta' phi_m(x)`; `phi` may be longer than the class dimension.
    pub fn predict_mean(&self, phi: &[f64]) -> f64 {
        self.mean.iter().zip(phi).map(|(a, b)| a * b).sum()
    }

    /// Posterior variance of `theta' phi_m(x)` (noise excluded).
    pub fn function_variance(&self, phi: &[f64]) -> f64 {
        let d = self.dim();
        let p = DVector::from_column_slice(&phi[..d]);
        let z = self
            .precision_factor
            .l_dirty()
            .solve_lower_triangular(&p)
            .expect("cholesky factor has positive diagonal");
        self.noise_var * z.norm_squared()
    }

    /// Predictive variance of a new observation at `phi`, noise included.
    pub fn predictive_variance(&self, phi: &[f64]) -> f64 {
        self.noise_var + self.function_variance(phi)
    }

    /// Posterior covariance `sigma_eps^2 (Phi'Phi + lambda I)^{-1}`.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.precision_factor.inverse() * self.noise_var
    }

    /// Lower-triangular `S` with `S S' = covariance()`.
    pub fn covariance_factor(&self) -> DMatrix<f64> {
        let cov = self.covariance();
        let cov = (&cov + cov.transpose()) * 0.5;
        Cholesky::new(cov)
            .expect("posterior covariance is positive definite")
            .unpack()
    }

    /// Cholesky factor of the precision-scaled Gram matrix `Phi'Phi + lambda I`.
    pub fn precision_factor(&self) -> DMatrix<f64> {
        self.precision_factor.l()
    }
}

/// Log density of `ys` under `N(0, v Phi Phi' + sigma^2 I)`, via a `t x t` Cholesky factor.
/// Only the first `dim` entries of each feature row are used.
pub fn log_evidence_kernel(
    rows: &[Vec<f64>],
    dim: usize,
    ys: &[f64],
    coef_prior_var: f64,
    noise_var: f64,
) -> Result<f64> {
    let t = ys.len();
    if t == 0 {
        return Ok(0.0);
    }
    let mut k = DMatrix::<f64>::zeros(t, t);
    for i in 0..t {
        for j in 0..=i {
            let dot: f64 = rows[i][..dim].iter().zip(&rows[j][..dim]).map(|(a, b)| a * b).sum();
            k[(i, j)] = coef_prior_var * dot;
            k[(j, i)] = k[(i, j)];
        }
        k[(i, i)] += noise_var;
    }
    let chol = Cholesky::new(k).ok_or_else(|| Error::numerical("kernel matrix is not positive definite"))?;
    let y = DVector::from_column_slice(ys);
    let z = chol
        .l_dirty()
        .solve_lower_triangular(&y)
        .expect("cholesky factor has positive diagonal");
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(-0.5 * (t as f64 * LN_2PI + log_det + z.norm_squared()))
}

/// Fits class `m` to the demonstrations `(xs, ys)`.
///
/// The evidence is computed through the smaller of the two factorizations:
/// the `t x t` kernel form when `t <= 2m+1`, the `(2m+1)`-dimensional
/// weight-space form otherwise.
pub fn fit_class(xs: &[f64], ys: &[f64], m: usize, s: &Scenario, scaling: PriorScaling) -> Result<ClassPosterior> {
    if xs.len() != ys.len() {
        return Err(Error::data("xs and ys differ in length"));
    }
    if m < 1 || m > s.max_dim {
        return Err(Error::config("m", format!("{m} outside 1..={}", s.max_dim)));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::numerical(format!("non-finite demonstration value {bad}")));
    }
    let fm = FeatureMap::new(m, s.period);
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| fm.eval(x)).collect();
    let mut stats = ClassStats::new(m);
    for (phi, &y) in rows.iter().zip(ys) {
        stats.push(phi, y);
    }
    let v = scaling.coef_variance(s.sigma_w_sq, m);
    let mut post = ClassPosterior::from_stats(&stats, s.sigma_eps_sq, v)?;
    if xs.len() <= fm.dim() {
        post.log_evidence = log_evidence_kernel(&rows, fm.dim(), ys, v, s.sigma_eps_sq)?;
    }
    Ok(post)
}
