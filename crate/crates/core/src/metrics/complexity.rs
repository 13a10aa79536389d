use std::fmt;

use super::curve::ErrorCurve;
use crate::error::{Error, Result};

/// `N_b(r)`: first `t` with `mse[t] <= r`, or never within the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SampleComplexity {
    Finite(usize),
    Infinite,
}

impl SampleComplexity {
    pub fn finite(self) -> Option<usize> {
        match self {
            SampleComplexity::Finite(n) => Some(n),
            SampleComplexity::Infinite => None,
        }
    }
}

impl fmt::Display for SampleComplexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleComplexity::Finite(n) => write!(f, "{n}"),
            SampleComplexity::Infinite => f.write_str("inf"),
        }
    }
}

pub fn sample_complexity(curve: &ErrorCurve, r: f64) -> SampleComplexity {
    curve
        .mse
        .iter()
        .position(|&v| v <= r)
        .map_or(SampleComplexity::Infinite, |k| SampleComplexity::Finite(k + 1))
}

/// A performance ratio; infinite when the learner never meets the requirement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Infinite => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

/// Requirement at quantile level `Q` of the pooled reference errors.
///
/// The pool `{mse[t] : curves, t}` is sorted ascending and linearly
/// interpolated at position `(1 - Q)(n - 1)`, so `Q -> 1` approaches the
/// smallest pooled error.
pub fn reference_quantile(curves: &[&ErrorCurve], q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::config("Q", format!("{q} outside (0, 1)")));
    }
    let mut pool: Vec<f64> = curves.iter().flat_map(|c| c.mse.iter().copied()).collect();
    if pool.is_empty() {
        return Err(Error::data("empty reference pool"));
    }
    if pool.iter().any(|v| v.is_nan()) {
        return Err(Error::data("reference pool contains NaN"));
    }
    pool.sort_by(f64::total_cmp);
    let pos = (1.0 - q) * (pool.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(if lo == hi || frac == 0.0 {
        pool[lo]
    } else {
        pool[lo] + frac * (pool[hi] - pool[lo])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(mse: Vec<f64>) -> ErrorCurve {
        let n = mse.len();
        ErrorCurve::new("L", "s", mse, vec![0.0; n], 1)
    }

    #[test]
    fn sample_complexity_examples() {
        let c = curve((1..=100).map(|t| 1.0 / t as f64).collect());
        assert_eq!(sample_complexity(&c, 1.0), SampleComplexity::Finite(1));
        assert_eq!(sample_complexity(&c, 5.0), SampleComplexity::Finite(1));
        assert_eq!(sample_complexity(&c, 0.1), SampleComplexity::Finite(10));
        assert_eq!(sample_complexity(&c, 0.001), SampleComplexity::Infinite);
    }

    #[test]
    fn quantile_hand_checks() {
        let c = curve(vec![4.0, 2.0, 3.0, 1.0]);
        assert_eq!(reference_quantile(&[&c], 0.5).unwrap(), 2.5);
        assert_eq!(reference_quantile(&[&c], 0.75).unwrap(), 1.75);
        assert_eq!(reference_quantile(&[&c], 0.25).unwrap(), 3.25);
        // near the minimum for Q close to 1
        let v = reference_quantile(&[&c], 0.99).unwrap();
        assert!((v - 1.03).abs() < 1e-12);
        // pooled across curves
        let d = curve(vec![10.0, 0.0]);
        assert_eq!(reference_quantile(&[&c, &d], 0.5).unwrap(), 2.5);
        assert!(reference_quantile(&[], 0.5).is_err());
        assert!(reference_quantile(&[&c], 1.0).is_err());
    }
}
