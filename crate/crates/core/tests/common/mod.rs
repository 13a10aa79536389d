#![allow(dead_code)]

use iclbench_core::FeatureMap;
use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Hermite rule for expectations under `Normal(0, 1)` via Golub-Welsch.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `E_theta[prod_i Normal(y_i; theta . phi(x_i), noise_var)]` under
/// `theta ~ Normal(0, prior_var I)`, by a tensor Gauss-Hermite rule.
pub fn brute_marginal(xs: &[f64], ys: &[f64], m: usize, period: f64, prior_var: f64, noise_var: f64, nodes: usize) -> f64 {
    let fm = FeatureMap::new(m, period);
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| fm.eval(x)).collect();
    let d = fm.dim();
    let (z, w) = gauss_hermite(nodes);
    let scale = prior_var.sqrt();
    let norm = (2.0 * std::f64::consts::PI * noise_var).powf(-0.5 * ys.len() as f64);
    let mut idx = vec![0usize; d];
    let mut theta = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for k in 0..d {
            theta[k] = scale * z[idx[k]];
            weight *= w[idx[k]];
        }
        let mut ss = 0.0;
        for (row, y) in rows.iter().zip(ys) {
            let pred: f64 = row.iter().zip(&theta).map(|(a, b)| a * b).sum();
            ss += (y - pred) * (y - pred);
        }
        total += weight * (-0.5 * ss / noise_var).exp();
        let mut k = 0;
        loop {
            if k == d {
                return norm * total;
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
