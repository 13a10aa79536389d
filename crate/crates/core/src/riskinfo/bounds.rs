use std::fmt;

use super::curves::{RiskCurve, Series};
use crate::error::{Error, Result};
use crate::stats::mean_stderr;

/// Default onset `t_bar` of the excess-risk floor, clipped to the horizon.
pub const DEFAULT_T_BAR: usize = 100;

/// Relative slack on threshold comparisons so that values equal up to
/// rounding, such as `0.2 + 0.1` against `0.3`, compare as equal.
const REL_TOL: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs()
}

fn gt(a: f64, b: f64) -> bool {
    a > b + REL_TOL * b.abs()
}

/// A demonstration count that may be unattained within the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Count {
    Finite(i64),
    Infinite,
}

impl Count {
    pub fn finite(self) -> Option<i64> {
        match self {
            Count::Finite(n) => Some(n),
            Count::Infinite => None,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => f.write_str("inf"),
        }
    }
}

/// Mutual-information estimate with its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `I(Y_N; D~_{t+1} | H_{N-1}) = eps_Bayes^{N-1} - eps_Bayes^{N+t}`.
///
/// The standard error is paired across replications when per-replication
/// samples are available and combined in quadrature otherwise.
pub fn mutual_information(curve: &RiskCurve, n: usize, t: usize) -> Result<MiEstimate> {
    let horizon = curve.horizon();
    if n == 0 || n + t > horizon {
        return Err(Error::config(
            "N",
            format!("need 1 <= N and N + t <= {horizon}, got N = {n}, t = {t}"),
        ));
    }
    let (u, v) = (n - 1, n + t);
    let b = &curve.bayes;
    let value = b.mean[u] - b.mean[v];
    let stderr = if curve.bayes_samples.is_empty() {
        b.stderr[u].hypot(b.stderr[v])
    } else {
        let diffs: Vec<f64> = curve
            .bayes_samples
            .iter()
            .map(|row| row[u] - row[v])
            .filter(|d| d.is_finite())
            .collect();
        mean_stderr(&diffs).stderr
    };
    Ok(MiEstimate { value, stderr })
}

/// `(t_bar, Delta_XS)`: the excess risk stays at or above `Delta_XS` from `t_bar` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessFloor {
    pub t_bar: usize,
    pub delta_xs: f64,
}

impl ExcessFloor {
    pub fn new(t_bar: usize, delta_xs: f64) -> Result<Self> {
        if !(delta_xs >= 0.0 && delta_xs.is_finite()) {
            return Err(Error::config("delta_xs", format!("{delta_xs} is not a finite nonnegative real")));
        }
        Ok(Self { t_bar, delta_xs })
    }

    /// Floor from an excess-risk series.
    ///
    /// `t_bar` defaults to [`DEFAULT_T_BAR`] and is clipped into the series'
    /// range. `Delta_XS` is the minimum over `t >= t_bar` of the window-5
    /// running median, capped by the raw minimum there and by zero below.
    pub fn fit(excess: &Series, t_bar: Option<usize>) -> Result<Self> {
        let end = excess
            .end()
            .ok_or_else(|| Error::data("empty excess-risk series"))?;
        if excess.mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("excess-risk series has non-finite entries"));
        }
        let t_bar = t_bar.unwrap_or(DEFAULT_T_BAR).clamp(excess.start, end);
        let smooth = median5(&excess.mean);
        let from = t_bar - excess.start;
        let smooth_min = smooth[from..].iter().copied().fold(f64::INFINITY, f64::min);
        let raw_min = excess.mean[from..].iter().copied().fold(f64::INFINITY, f64::min);
        Self::new(t_bar, smooth_min.min(raw_min).max(0.0))
    }
}

/// Centered running median with window 5, truncated at the ends.
fn median5(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let mut w: Vec<f64> = values[k.saturating_sub(2)..(k + 3).min(n)].to_vec();
            w.sort_by(f64::total_cmp);
            let h = w.len() / 2;
            if w.len() % 2 == 1 {
                w[h]
            } else {
                0.5 * (w[h - 1] + w[h])
            }
        })
        .collect()
}

/// `N_BMA(q)`: first `t` with `eps_Bayes^t <= q`.
pub fn n_bma(curve: &RiskCurve, q: f64) -> Count {
    curve
        .bayes
        .iter()
        .find(|&(_, v, _)| le(v, q))
        .map_or(Count::Infinite, |(t, _, _)| Count::Finite(t as i64))
}

/// Index of the first entry strictly above `delta`.
pub fn first_exceedance(values: &[f64], delta: f64) -> Count {
    values
        .iter()
        .position(|&v| gt(v, delta))
        .map_or(Count::Infinite, |k| Count::Finite(k as i64))
}

/// Suboptimality at one requirement, with the lower bound and the
/// necessary-condition checks when a floor is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SubOptReport {
    pub q: f64,
    pub n_bma: Count,
    pub subopt: Count,
    pub lower_bound: Option<Count>,
    pub condition1_holds: Option<bool>,
    pub condition2_holds: Option<bool>,
    /// Whether `N_BMA(q) >= t_bar`.
    pub precondition_holds: Option<bool>,
    pub diagnostics: Vec<String>,
}

impl SubOptReport {
    /// Full report: suboptimality, lower bound and both conditions.
    pub fn analyze(q: f64, floor: &ExcessFloor, curve: &RiskCurve) -> Result<Self> {
        let mut report = suboptimality(q, curve)?;
        if let Count::Finite(n) = report.n_bma {
            let ok = n >= floor.t_bar as i64;
            report.precondition_holds = Some(ok);
            if !ok {
                report
                    .diagnostics
                    .push(format!("N_BMA({q}) = {n} is below t_bar = {}", floor.t_bar));
            }
        }
        match lower_bound(q, floor, curve) {
            Ok(lb) => {
                if lb == Count::Infinite {
                    report.diagnostics.push(format!(
                        "mutual information never exceeds Delta_XS = {} within the horizon",
                        floor.delta_xs
                    ));
                }
                report.lower_bound = Some(lb);
            }
            Err(e) => report.diagnostics.push(e.to_string()),
        }
        let (c1, c2) = necessary_conditions(q, floor, curve)?;
        report.condition1_holds = Some(c1);
        report.condition2_holds = Some(c2);
        Ok(report)
    }
}

/// `N_BMA(q)` and `SubOpt(q) = min{t : eps_Bayes^t + eps_XS^t <= q} - N_BMA(q)`.
pub fn suboptimality(q: f64, curve: &RiskCurve) -> Result<SubOptReport> {
    if !(q > 0.0) {
        return Err(Error::config("q", format!("{q} must be positive")));
    }
    let excess = curve
        .excess
        .as_ref()
        .ok_or_else(|| Error::data("suboptimality needs an excess-risk curve"))?;
    let n = n_bma(curve, q);
    let reached = excess.excess.iter().find(|&(t, x, _)| match curve.bayes.at(t) {
        Some(b) => le(b + x, q),
        None => false,
    });
    let subopt = match (n, reached) {
        (Count::Finite(n), Some((t, _, _))) => Count::Finite(t as i64 - n),
        _ => Count::Infinite,
    };
    Ok(SubOptReport {
        q,
        n_bma: n,
        subopt,
        lower_bound: None,
        condition1_holds: None,
        condition2_holds: None,
        precondition_holds: None,
        diagnostics: Vec::new(),
    })
}

/// `LB(q) = min{t >= 0 : I(Y_N; D~_{t+1} | H_{N-1}) > Delta_XS}` with `N = N_BMA(q)`.
///
/// Infinite when `N_BMA(q)` is unattained or the information never exceeds
/// the floor within the horizon. `N_BMA(q) = 0` leaves the bound undefined.
pub fn lower_bound(q: f64, floor: &ExcessFloor, curve: &RiskCurve) -> Result<Count> {
    let n = match n_bma(curve, q) {
        Count::Infinite => return Ok(Count::Infinite),
        Count::Finite(n) => n as usize,
    };
    if n == 0 {
        return Err(Error::data(format!(
            "N_BMA({q}) = 0: the requirement is met before any demonstration"
        )));
    }
    let horizon = curve.horizon();
    let mi = (0..=horizon - n)
        .map(|t| mutual_information(curve, n, t).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(first_exceedance(&mi, floor.delta_xs))
}

/// The two necessary conditions for `LB` to stay flat below `q`.
///
/// Condition 1 asks `Delta_XS <= I(Y_t; D~_1 | H_{t-1})` for every
/// `t >= N_BMA(q)` together with `LB(q) = 0`. Condition 2 asks
/// `I(Y_s; D~_1 | H_{s-1}) < (1 + 1/LB(q)) I(Y_t; D~_1 | H_{t-1})` for every
/// `t >= N_BMA(q)`, with `s = N_BMA(q) + LB(q)` and `LB(q) > 0`. Both are
/// false when the bound is infinite or undefined.
pub fn necessary_conditions(q: f64, floor: &ExcessFloor, curve: &RiskCurve) -> Result<(bool, bool)> {
    let lb = match lower_bound(q, floor, curve) {
        Ok(Count::Finite(lb)) => lb as usize,
        _ => return Ok((false, false)),
    };
    let n = n_bma(curve, q).finite().expect("finite bound implies finite N_BMA") as usize;
    let horizon = curve.horizon();
    let one_step = |t: usize| mutual_information(curve, t, 0).map(|e| e.value);
    let steps = (n..=horizon).map(one_step).collect::<Result<Vec<_>>>()?;
    let c1 = lb == 0 && steps.iter().all(|&i| le(floor.delta_xs, i));
    let s = n + lb;
    let c2 = lb > 0 && s <= horizon && {
        let i_s = one_step(s)?;
        let factor = 1.0 + 1.0 / lb as f64;
        steps.iter().all(|&i| i_s < factor * i)
    };
    Ok((c1, c2))
}

/// One row of the crude-approximation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrudeBoundRow {
    pub q: f64,
    pub n_bma: Count,
    pub subopt: Count,
    /// `C1^2 eps_xs / (q^2 (q - eps_xs))`.
    pub bound: f64,
    /// `subopt >= bound - 1`, allowing one step of integer rounding.
    pub holds: bool,
}

/// Evaluates `SubOpt(q)` under `eps_Bayes^t = C1/sqrt(t)` and `eps_XS^t = eps_xs`.
pub fn crude_bound_check(c1: f64, eps_xs: f64, q_grid: &[f64]) -> Result<Vec<CrudeBoundRow>> {
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::config("C1", format!("{c1} must be positive")));
    }
    if !(eps_xs >= 0.0 && eps_xs.is_finite()) {
        return Err(Error::config("eps_xs", format!("{eps_xs} must be nonnegative")));
    }
    q_grid
        .iter()
        .map(|&q| {
            if !(q > eps_xs) {
                return Err(Error::config("q", format!("{q} must exceed eps_xs = {eps_xs}")));
            }
            let reach = (c1 / (q - eps_xs)).powi(2).ceil();
            if reach > 1e8 {
                return Err(Error::config("q", format!("{q} needs about {reach} demonstrations")));
            }
            let horizon = reach as usize + 2;
            let curve = RiskCurve::synthetic(horizon, |t| c1 / (t as f64).sqrt(), |_| eps_xs);
            let report = suboptimality(q, &curve)?;
            let bound = c1 * c1 * eps_xs / (q * q * (q - eps_xs));
            let holds = match report.subopt {
                Count::Finite(s) => s as f64 >= bound - 1.0,
                Count::Infinite => false,
            };
            Ok(CrudeBoundRow {
                q,
                n_bma: report.n_bma,
                subopt: report.subopt,
                bound,
                holds,
            })
        })
        .collect()
}
