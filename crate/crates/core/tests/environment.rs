use iclbench_core::environment::{sample_task, FeatureMap, Scenario, ScenarioGrid, SeedPolicy};
use iclbench_core::stats::mean_stderr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

#[test]
fn distinct_features_are_orthogonal_on_average() {
    let fm = FeatureMap::new(3, 5.0);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..100_000)
        .map(|_| fm.eval(rng.random_range(-5.0..=5.0)))
        .collect();
    for a in 1..fm.dim() {
        for b in a + 1..fm.dim() {
            let prods: Vec<f64> = rows.iter().map(|r| r[a] * r[b]).collect();
            let ms = mean_stderr(&prods);
            assert!(ms.mean.abs() <= 3.0 * ms.stderr, "({a}, {b}): {} +- {}", ms.mean, ms.stderr);
        }
    }
}

#[test]
fn target_variance_is_equal_across_dimensions() {
    let s = Scenario::new("var", 10, 1.0, 0.1)
        .with_horizon(1)
        .with_replications(1_000_000);
    let seeds = SeedPolicy::new(2024);
    let by_m: Vec<(usize, [f64; 2])> = (0..s.replications)
        .into_par_iter()
        .map(|rep| {
            let task = sample_task(&s, rep, &seeds).unwrap();
            (task.m, [task.ys_clean[0], task.ys_clean[1]])
        })
        .collect();
    let var = |m: usize| {
        let v: Vec<f64> = by_m
            .iter()
            .filter(|(k, _)| *k == m)
            .flat_map(|(_, f)| f.iter().map(|x| x * x))
            .collect();
        mean_stderr(&v).mean
    };
    let vars: Vec<f64> = [1, 5, 10].iter().map(|&m| var(m)).collect();
    let hi = vars.iter().copied().fold(f64::MIN, f64::max);
    let lo = vars.iter().copied().fold(f64::MAX, f64::min);
    assert!((hi - lo) / lo < 0.05, "{vars:?}");
    for v in vars {
        assert!((v - 1.0).abs() < 0.05, "{v}");
    }
}

#[test]
fn dimension_is_uniform_over_classes() {
    let s = Scenario::new("u", 4, 1.0, 0.1).with_horizon(1).with_replications(40_000);
    let seeds = SeedPolicy::new(9);
    let mut counts = [0usize; 4];
    for rep in 0..s.replications {
        counts[sample_task(&s, rep, &seeds).unwrap().m - 1] += 1;
    }
    // each count is Binomial(40000, 1/4): sd ~ 86.6
    for c in counts {
        assert!((c as f64 - 10_000.0).abs() < 4.0 * 86.6, "{counts:?}");
    }
}

#[test]
fn replications_are_order_independent() {
    let grid = ScenarioGrid::default9();
    let s = grid.get("sw1_se0.03").unwrap();
    let seeds = SeedPolicy::new(77);
    let forward: Vec<_> = (0..8).map(|r| sample_task(s, r, &seeds).unwrap()).collect();
    let backward: Vec<_> = (0..8).rev().map(|r| sample_task(s, r, &seeds).unwrap()).collect();
    for (a, b) in forward.iter().zip(backward.iter().rev()) {
        assert_eq!(a, b);
    }
    let other = sample_task(s, 0, &SeedPolicy::new(78)).unwrap();
    assert_ne!(forward[0].xs, other.xs);
}

#[test]
fn inputs_stay_in_range_and_targets_match_weights() {
    let s = Scenario::new("r", 6, 2.0, 0.3).with_replications(20);
    let seeds = SeedPolicy::new(1);
    for rep in 0..20 {
        let task = sample_task(&s, rep, &seeds).unwrap();
        assert_eq!(task.weights.len(), 2 * task.m + 1);
        assert_eq!(task.xs.len(), s.horizon + 1);
        let fm = FeatureMap::new(task.m, s.period);
        for (x, f) in task.xs.iter().zip(&task.ys_clean) {
            assert!((s.x_min..=s.x_max).contains(x));
            let direct: f64 = fm.eval(*x).iter().zip(&task.weights).map(|(p, w)| p * w).sum::<f64>()
                / ((task.m + 1) as f64).sqrt();
            assert!((direct - f).abs() < 1e-12);
        }
    }
}
