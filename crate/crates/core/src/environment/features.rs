use std::f64::consts::PI;

/// Trigonometric feature map `[1, cos(pi x/P), sin(pi x/P), ..., cos(m pi x/P), sin(m pi x/P)]`.
///
/// The map for order `m` is the length-`2m+1` prefix of the map for any
/// larger order, which lets a single Gram matrix serve every class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureMap {
    m: usize,
    period: f64,
}

impl FeatureMap {
    pub fn new(m: usize, period: f64) -> Self {
        assert!(m >= 1, "feature order must be at least 1");
        assert!(period > 0.0, "period must be positive");
        Self { m, period }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    /// Writes the features of `x` into `out[..dim]`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        out[0] = 1.0;
        let base = PI * x / self.period;
        for j in 1..=self.m {
            let (s, c) = (j as f64 * base).sin_cos();
            out[2 * j - 1] = c;
            out[2 * j] = s;
        }
    }
}
