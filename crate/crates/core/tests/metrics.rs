use iclbench_core::metrics::{
    default_tau_grid, performance_profile, performance_ratio, sample_complexity, CurveSet, ErrorCurve, QuantileSpec,
    Ratio, SampleComplexity,
};
use proptest::prelude::*;

const LEARNERS: [&str; 3] = ["A", "B", "C"];

fn curve_set(values: &[Vec<f64>], horizon: usize) -> (CurveSet, Vec<String>) {
    let n_scen = values.len() / LEARNERS.len();
    let mut set = CurveSet::new();
    for (k, mse) in values.iter().enumerate() {
        let learner = LEARNERS[k % LEARNERS.len()];
        let scenario = format!("s{}", k / LEARNERS.len());
        set.insert(ErrorCurve::new(learner, scenario, mse[..horizon].to_vec(), vec![0.0; horizon], 1));
    }
    (set, (0..n_scen).map(|k| format!("s{k}")).collect())
}

fn names() -> Vec<String> {
    LEARNERS.iter().map(|s| s.to_string()).collect()
}

fn curves_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, f64)> {
    (1usize..5)
        .prop_flat_map(|n_scen| {
            (
                prop::collection::vec(prop::collection::vec(0.01f64..10.0, 12), n_scen * LEARNERS.len()),
                0.01f64..0.99,
            )
        })
}

proptest! {
    #[test]
    fn profile_is_monotone_in_tau((values, q) in curves_strategy()) {
        let (set, scenarios) = curve_set(&values, 12);
        let spec = QuantileSpec::new(["A", "B"], q);
        for learner in LEARNERS {
            let res = performance_profile(&set, learner, &spec, &names(), &scenarios, &default_tau_grid()).unwrap();
            for w in res.profile.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
            prop_assert!(res.profile.iter().all(|&(_, r)| (0.0..=1.0).contains(&r)));
        }
    }

    #[test]
    fn ratios_are_at_least_one_and_normalized((values, q) in curves_strategy()) {
        let (set, scenarios) = curve_set(&values, 12);
        let spec = QuantileSpec::new(["C"], q);
        for s in &scenarios {
            let r = set.requirement(s, &spec).unwrap();
            let ratios: Vec<Option<Ratio>> = LEARNERS
                .iter()
                .map(|l| performance_ratio(&set, l, s, r, &names()).ok())
                .collect();
            if ratios.iter().all(Option::is_none) {
                continue;
            }
            let finite: Vec<f64> = ratios.iter().flatten().filter_map(|r| r.finite()).collect();
            prop_assert!(finite.iter().all(|&v| v >= 1.0));
            prop_assert_eq!(finite.iter().copied().fold(f64::INFINITY, f64::min), 1.0);
        }
    }

    #[test]
    fn results_are_invariant_to_loss_scale((values, q) in curves_strategy(), k in -20i32..20, c in 1e-3f64..1e3) {
        let (set, scenarios) = curve_set(&values, 12);
        let spec = QuantileSpec::new(["A", "C"], q);
        let tau = default_tau_grid();
        for scale in [2f64.powi(k), c] {
            let scaled = set.scaled(scale);
            for learner in LEARNERS {
                let a = performance_profile(&set, learner, &spec, &names(), &scenarios, &tau).unwrap();
                let b = performance_profile(&scaled, learner, &spec, &names(), &scenarios, &tau).unwrap();
                prop_assert_eq!(&a.ratios, &b.ratios);
                prop_assert_eq!(&a.excluded, &b.excluded);
                prop_assert_eq!(&a.profile, &b.profile);
                prop_assert_eq!(a.mpr, b.mpr);
            }
        }
    }

    #[test]
    fn sample_complexity_is_first_crossing(mse in prop::collection::vec(0.0f64..5.0, 1..40), r in 0.0f64..5.0) {
        let c = ErrorCurve::new("L", "s", mse.clone(), vec![0.0; mse.len()], 1);
        match sample_complexity(&c, r) {
            SampleComplexity::Finite(n) => {
                prop_assert!(mse[n - 1] <= r);
                prop_assert!(mse[..n - 1].iter().all(|&v| v > r));
            }
            SampleComplexity::Infinite => prop_assert!(mse.iter().all(|&v| v > r)),
        }
    }
}

#[test]
fn hand_checked_profile() {
    // requirement from A alone at Q = 0.5: pool {4, 2, 1, 0.5} -> 1.5
    let mut set = CurveSet::new();
    set.insert(ErrorCurve::new("A", "s", vec![4.0, 2.0, 1.0, 0.5], vec![0.0; 4], 1));
    set.insert(ErrorCurve::new("B", "s", vec![4.0, 3.0, 2.0, 1.0], vec![0.0; 4], 1));
    let spec = QuantileSpec::new(["A"], 0.5);
    assert_eq!(set.requirement("s", &spec).unwrap(), 1.5);
    let cmp = vec!["A".to_string(), "B".to_string()];
    let res = performance_profile(&set, "B", &spec, &cmp, &["s".to_string()], &[1.0, 1.33, 1.34, 2.0]).unwrap();
    // A reaches 1.5 at t = 3, B at t = 4
    assert_eq!(res.ratios["s"], Ratio::Finite(4.0 / 3.0));
    assert_eq!(res.profile, vec![(1.0, 0.0), (1.33, 0.0), (1.34, 1.0), (2.0, 1.0)]);
    assert_eq!(res.mpr, Some(4.0 / 3.0));
}
