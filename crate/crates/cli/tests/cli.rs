use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iclbench_core::estimators::{run_baselines, Baseline, PriorScaling, SelectorKind};
use iclbench_core::metrics::squared_prediction_difference;
use iclbench_core::{ScenarioGrid, SeedPolicy};

const GRID: &str = r#"
[[scenario]]
id = "hi"
max_dim = 4
sigma_w_sq = 10.0
sigma_eps_sq = 0.03
horizon = 24
replications = 12

[[scenario]]
id = "lo"
max_dim = 3
sigma_w_sq = 1.0
sigma_eps_sq = 0.3
horizon = 24
replications = 12
"#;

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("grid.toml"), GRID).unwrap();
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn cmd(&self, args: &[&str]) -> Command {
        let mut c = Command::new(env!("CARGO_BIN_EXE_iclbench"));
        c.current_dir(self.dir.path())
            .env_remove("ICLBENCH_OUT")
            .args(["--scenarios", "grid.toml"])
            .args(args);
        c
    }

    fn run(&self, args: &[&str]) -> Output {
        self.cmd(args).output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed with {:?}\n{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn read(&self, rel: &str) -> String {
        std::fs::read_to_string(self.path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|x| x == "csv") {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn baselines_write_one_file_per_learner_and_scenario() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "baselines", "--learners", "BMA,AIC,BIC,BMC,ENSEMBLE"]);
    for s in ["hi", "lo"] {
        for l in ["BMA", "AIC", "BIC", "BMC", "ENSEMBLE"] {
            let text = sb.read(&format!("o/records/{s}/{l}.tsv"));
            assert!(text.starts_with("#fields:\tlearner_id\tscenario_id\treplication\tt\tx_query\ty_true\ty_pred\n"));
            assert!(text.contains("# config_hash: "));
            assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 12 * 24);
        }
    }
    let out = sb.ok(&["--out", "o", "ingest-validate", "--records", "o/records"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 mismatches"));
}

#[test]
fn exit_codes_follow_error_class() {
    let sb = Sandbox::new();
    assert_eq!(code(&sb.run(&["--help"])), 0);
    assert_eq!(code(&sb.run(&["--bogus", "gen"])), 1);
    assert_eq!(code(&sb.run(&["--reps", "0", "gen"])), 1);
    let out = sb.run(&["--select", "nope", "gen"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenarios"));
    std::fs::write(sb.path("bad.toml"), "q_grid = [0.5, 1.5]\n").unwrap();
    let out = sb.run(&["--config", "bad.toml", "gen"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("q_grid"));
    assert_eq!(code(&sb.run(&["--scenarios", "missing.toml", "gen"])), 1);
    assert_eq!(code(&sb.run(&["baselines", "--learners", "ICL"])), 1);

    assert_eq!(code(&sb.run(&["metrics", "--records", "missing.tsv"])), 2);
    std::fs::write(sb.path("garbled.tsv"), "#fields:\tlearner_id\n").unwrap();
    assert_eq!(code(&sb.run(&["metrics", "--records", "garbled.tsv"])), 2);
}

#[test]
fn tampered_records_fail_validation() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "--select", "lo", "baselines", "--learners", "BMC"]);
    let path = sb.path("o/records/lo/BMC.tsv");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let k = lines.iter().position(|l| !l.starts_with('#')).unwrap() + 5;
    let mut f: Vec<String> = lines[k].split('\t').map(str::to_string).collect();
    f[5] = "123.0".into();
    lines[k] = f.join("\t");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = sb.run(&["--out", "o", "--select", "lo", "ingest-validate", "--records", "o/records"]);
    assert_eq!(code(&out), 2);
    let rows = csv_rows(&sb.read("o/validate/mismatches.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][4], "y_true");
}

#[test]
fn numerical_failures_exit_3() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "--select", "lo", "baselines", "--learners", "AIC"]);
    let text = sb.read("o/records/lo/AIC.tsv");
    let blown: String = text
        .lines()
        .map(|l| {
            if l.starts_with('#') {
                l.to_string()
            } else {
                let mut f: Vec<&str> = l.split('\t').collect();
                f[0] = "WILD";
                f[6] = "1e200";
                f.join("\t")
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(sb.path("wild.tsv"), blown + "\n").unwrap();
    let out = sb.run(&["--out", "o", "risk", "--scenario", "lo", "--learner", "WILD", "--records", "wild.tsv", "--n-reps", "4"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "rec", "baselines"]);
    for (out, threads) in [("a", "1"), ("b", "4")] {
        sb.ok(&["--out", out, "--threads", threads, "gen"]);
        sb.ok(&["--out", out, "--threads", threads, "metrics", "--records", "rec/records"]);
        sb.ok(&["--out", out, "--threads", threads, "profile", "--records", "rec/records", "--comparison", "BMA,AIC"]);
        sb.ok(&["--out", out, "--threads", threads, "risk", "--scenario", "hi", "--learner", "BIC", "--n-reps", "6"]);
    }
    let a = csv_files(&sb.path("a"));
    assert_eq!(a.len(), 7);
    for p in &a {
        let rel = p.strip_prefix(sb.path("a")).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("# config_hash: "), "{rel:?}");
        assert_eq!(text, std::fs::read_to_string(sb.path("b").join(rel)).unwrap(), "{rel:?}");
    }
    assert_eq!(sb.read("a/tasks/hi.tsv"), sb.read("b/tasks/hi.tsv"));

    let other_seed = sb.ok(&["--out", "c", "--seed", "9", "gen"]);
    assert!(other_seed.status.success());
    assert_ne!(sb.read("a/tasks/hi.tsv"), sb.read("c/tasks/hi.tsv"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let sb = Sandbox::new();
    let out = sb.cmd(&["--select", "lo", "gen"]).env("ICLBENCH_OUT", "from_env").output().unwrap();
    assert!(out.status.success());
    assert!(sb.path("from_env/tasks/lo.tsv").exists());
}

#[test]
fn profile_emits_the_requested_panel() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "baselines"]);
    sb.ok(&["--out", "o", "--plot", "profile", "--records", "o/records", "--Q", "0.4", "--comparison", "BMA,AIC,BIC,BMC"]);
    let rows = csv_rows(&sb.read("o/profile/profile.csv"));
    assert_eq!(rows[0], ["learner_id", "Q", "tau", "rho"]);
    assert_eq!(rows.len() - 1, 4 * 60);
    for learner in ["BMA", "AIC", "BIC", "BMC"] {
        let rho: Vec<f64> = rows[1..]
            .iter()
            .filter(|r| r[0] == learner)
            .inspect(|r| assert_eq!(r[1], "0.4"))
            .map(|r| r[3].parse().unwrap())
            .collect();
        assert_eq!(rho.len(), 60);
        assert!(rho.windows(2).all(|w| w[0] <= w[1]));
        assert!(rho.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
    let mpr = csv_rows(&sb.read("o/profile/mpr.csv"));
    for r in &mpr[1..] {
        if !r[2].is_empty() {
            assert!(r[2].parse::<f64>().unwrap() >= 1.0);
        }
    }
    assert!(sb.read("o/profile/profile.svg").contains("Q = 0.4"));
}

#[test]
fn risk_writes_curves_and_suboptimality_table() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "risk", "--scenario", "hi", "--learner", "ENSEMBLE", "--n-reps", "8", "--t-bar", "12", "--q", "0.1,0.5,1"]);
    let curve = csv_rows(&sb.read("o/risk/hi_ENSEMBLE_curve.csv"));
    assert_eq!(curve[0], ["t", "bayes_risk", "excess_risk", "bayes_stderr", "excess_stderr"]);
    assert_eq!(curve.len() - 1, 25);
    assert_eq!(curve[1][2], "");
    assert!(curve[2][2].parse::<f64>().unwrap() > 0.0);
    let sub = csv_rows(&sb.read("o/risk/hi_ENSEMBLE_subopt.csv"));
    assert_eq!(sub.len() - 1, 3);
    assert!(sub[1..].iter().all(|r| r[7] == "12"));

    assert_eq!(code(&sb.run(&["risk", "--scenario", "nope"])), 1);
    assert_eq!(code(&sb.run(&["risk", "--scenario", "hi", "--t-bar", "99"])), 1);
    assert_eq!(code(&sb.run(&["risk", "--scenario", "hi", "--learner", "ICL"])), 1);
}

#[test]
fn repro_3b_matches_module_level_spd() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "--plot", "repro", "--figure", "3b"]);
    let rows = csv_rows(&sb.read("o/repro/fig3b/spd.csv"));
    assert_eq!(rows[0], ["learner_id", "scenario_id", "t", "spd", "stderr", "n_reps"]);
    assert!(rows[1..].iter().all(|r| r[0] != "BMA"));
    assert_eq!(rows.len() - 1, 4 * 2 * 24);
    assert!(sb.read("o/repro/fig3b/spd.svg").contains("scenario_id = lo"));

    let grid = ScenarioGrid::from_toml_str(GRID).unwrap();
    let s = grid.get("hi").unwrap();
    let bma = Baseline::Selector(SelectorKind::Bma);
    let bmc = Baseline::Selector(SelectorKind::Bmc);
    let ds = run_baselines(s, &SeedPolicy::new(0), PriorScaling::Matched, &[bma, bmc]).unwrap();
    let expected = squared_prediction_difference(&ds.select("BMC", "hi"), &ds.select("BMA", "hi"), s).unwrap();
    let got: Vec<f64> = rows[1..]
        .iter()
        .filter(|r| r[0] == "BMC" && r[1] == "hi")
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(got, expected.mse);
}

#[test]
fn repro_figure_1_needs_the_subject() {
    let sb = Sandbox::new();
    assert_eq!(code(&sb.run(&["--out", "o", "repro", "--figure", "1"])), 2);

    // An external learner enters through its records, here a relabeled AIC.
    sb.ok(&["--out", "o", "baselines", "--learners", "AIC"]);
    for s in ["hi", "lo"] {
        let text = sb.read(&format!("o/records/{s}/AIC.tsv"));
        let relabeled: String = text
            .lines()
            .map(|l| l.strip_prefix("AIC\t").map_or(l.to_string(), |rest| format!("ICL\t{rest}")) + "\n")
            .collect();
        std::fs::write(sb.path(&format!("icl_{s}.tsv")), relabeled).unwrap();
    }
    sb.ok(&["--out", "o", "repro", "--figure", "1", "--records", "icl_hi.tsv", "icl_lo.tsv"]);
    let mpr = csv_rows(&sb.read("o/repro/fig1/mpr.csv"));
    assert_eq!(mpr[0], ["learner_id", "Q", "mpr", "mpr_coverage", "n_scenarios", "excluded"]);
    assert_eq!(mpr.len() - 1, 11);
    assert!(mpr[1..].iter().all(|r| r[0] == "ICL"));

    sb.ok(&["--out", "o", "repro", "--figure", "2", "--records", "icl_hi.tsv", "icl_lo.tsv"]);
    let learners: std::collections::BTreeSet<String> =
        csv_rows(&sb.read("o/repro/fig2/profile.csv"))[1..].iter().map(|r| r[0].clone()).collect();
    assert_eq!(learners.into_iter().collect::<Vec<_>>(), ["AIC", "BIC", "BMC", "ICL"]);
}

#[test]
fn plot_renders_an_existing_table() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "o", "--select", "lo", "baselines", "--learners", "BMA,BIC"]);
    sb.ok(&["--out", "o", "metrics", "--records", "o/records"]);
    assert!(!sb.path("o/metrics/curves.svg").exists());
    sb.ok(&["plot", "--input", "o/metrics/curves.csv", "--output", "c.svg"]);
    let svg = sb.read("c.svg");
    assert!(svg.contains("<svg") && svg.contains("BIC"));
    std::fs::write(sb.path("odd.csv"), "a,b\n1,2\n").unwrap();
    assert_eq!(code(&sb.run(&["plot", "--input", "odd.csv"])), 2);
}

#[test]
fn literal_prior_scaling_changes_predictions() {
    let sb = Sandbox::new();
    sb.ok(&["--out", "m", "--select", "lo", "baselines", "--learners", "BMA"]);
    sb.ok(&["--out", "l", "--select", "lo", "--prior-scaling", "literal", "baselines", "--learners", "BMA"]);
    let (m, l) = (sb.read("m/records/lo/BMA.tsv"), sb.read("l/records/lo/BMA.tsv"));
    assert!(l.contains("# prior_scaling: literal"));
    assert_ne!(m, l);
}
