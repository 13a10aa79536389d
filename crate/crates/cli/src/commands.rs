use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use iclbench_core::estimators::{run_baselines, Baseline, SelectorKind};
use iclbench_core::ingest::{read_records, validate_against_environment, write_records, write_tasks};
use iclbench_core::metrics::{error_curve, performance_profile, squared_prediction_difference};
use iclbench_core::riskinfo::{bayes_risk_curve, excess_risk_curve, RiskOptions, DEFAULT_T_BAR};
use iclbench_core::environment::sample_task;
use iclbench_core::{
    CurveSet, Dataset, Error, ErrorCurve, ExcessFloor, QuantileSpec, Ratio, Result, Scenario, SubOptReport,
};

use crate::config::Resolved;
use crate::plot::{render, PlotSpec};
use crate::table::{num, opt_num, Table};

pub const BMA: &str = "BMA";

fn comments(res: &Resolved, hash: &str) -> Vec<String> {
    vec![
        format!("config_hash: {hash}"),
        format!("master_seed: {}", res.cfg.master_seed),
        format!("prior_scaling: {}", serde_json::to_value(res.cfg.prior_scaling).unwrap().as_str().unwrap()),
    ]
}

/// Writes `table` under the output directory and, when plotting is on, an SVG beside it.
fn emit(res: &Resolved, table: &Table, rel: &str, hash: &str, spec: Option<PlotSpec>) -> Result<()> {
    let path = res.out(rel);
    table.write(&path, hash)?;
    println!("wrote {}", path.display());
    if let (true, Some(spec)) = (res.cfg.plot, spec) {
        let svg = path.with_extension("svg");
        render(table, &spec, &svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

/// Record files named by `paths`; directories contribute every `*.tsv` below them.
pub fn record_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let mut entries = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(dir, e))?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.extension().is_some_and(|x| x == "tsv") {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            walk(p, &mut out)?;
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(Error::data(format!("{}: no such file or directory", p.display())));
        }
    }
    if out.is_empty() {
        return Err(Error::data("no record files found"));
    }
    Ok(out)
}

fn load_records(res: &Resolved, files: &[PathBuf]) -> Result<Dataset> {
    let parts = files
        .par_iter()
        .map(|f| read_records(f, &res.grid))
        .collect::<Result<Vec<_>>>()?;
    let mut ds = Dataset::merge(parts)?;
    ds.sort();
    Ok(ds)
}

fn scenario<'a>(res: &'a Resolved, id: &str) -> Result<&'a Scenario> {
    res.grid
        .get(id)
        .ok_or_else(|| Error::data(format!("scenario `{id}` is not in the grid")))
}

/// The scenario restricted to the replications a record group covers.
fn covered(res: &Resolved, id: &str, recs: &[&iclbench_core::PredictionRecord]) -> Result<Scenario> {
    let n = recs.iter().map(|r| r.replication).max().map_or(0, |m| m + 1);
    Ok(scenario(res, id)?.clone().with_replications(n.max(1)))
}

fn run_internal(res: &Resolved, baselines: &[Baseline]) -> Result<Dataset> {
    let parts = res
        .grid
        .scenarios()
        .iter()
        .map(|s| run_baselines(s, &res.seeds, res.cfg.prior_scaling, baselines))
        .collect::<Result<Vec<_>>>()?;
    Dataset::merge(parts)
}

pub fn gen(res: &Resolved) -> Result<()> {
    let hash = res.config_hash("gen", json!(null), &[])?;
    for s in res.grid.scenarios() {
        let tasks = (0..s.replications)
            .into_par_iter()
            .map(|r| sample_task(s, r, &res.seeds))
            .collect::<Result<Vec<_>>>()?;
        let path = res.out(format!("tasks/{}.tsv", s.id));
        write_tasks(&tasks, &path, &comments(res, &hash))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn baselines(res: &Resolved) -> Result<()> {
    let baselines = res.cfg.baselines()?;
    let hash = res.config_hash("baselines", json!(null), &[])?;
    for s in res.grid.scenarios() {
        let ds = run_baselines(s, &res.seeds, res.cfg.prior_scaling, &baselines)?;
        for b in &baselines {
            let path = res.out(format!("records/{}/{}.tsv", s.id, b.name()));
            write_records(ds.records.iter().filter(|r| r.learner_id == b.name()), &path, &comments(res, &hash))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub fn ingest_validate(res: &Resolved, paths: &[PathBuf]) -> Result<()> {
    let files = record_files(paths)?;
    let hash = res.config_hash("ingest-validate", json!(null), &files)?;
    let ds = load_records(res, &files)?;
    let report = validate_against_environment(&ds, &res.grid, &res.seeds);
    let mut summary = Table::new(&["scenario_id", "checked", "mismatches"]);
    for (id, r) in &report.per_scenario {
        summary.push(vec![id.clone(), r.checked.to_string(), r.mismatches.to_string()]);
    }
    emit(res, &summary, "validate/summary.csv", &hash, None)?;
    let mut detail = Table::new(&[
        "learner_id", "scenario_id", "replication", "t", "field", "expected", "found",
    ]);
    for m in &report.mismatches {
        detail.push(vec![
            m.learner_id.clone(),
            m.scenario_id.clone(),
            m.replication.to_string(),
            m.t.to_string(),
            m.field.to_string(),
            num(m.expected),
            num(m.found),
        ]);
    }
    emit(res, &detail, "validate/mismatches.csv", &hash, None)?;
    println!(
        "{} records in {} files, {} mismatches",
        ds.len(),
        files.len(),
        report.total_mismatches()
    );
    report.into_result()
}

fn error_curves(res: &Resolved, ds: &Dataset) -> Result<Vec<ErrorCurve>> {
    let groups: Vec<_> = ds.groups().into_iter().collect();
    groups
        .par_iter()
        .map(|((_, s), recs)| error_curve(recs, &covered(res, s, recs)?))
        .collect()
}

fn curve_table(curves: &[ErrorCurve], value: &str) -> Table {
    let mut t = Table::new(&["learner_id", "scenario_id", "t", value, "stderr", "n_reps"]);
    for c in curves {
        for k in 1..=c.horizon() {
            t.push(vec![
                c.learner_id.clone(),
                c.scenario_id.clone(),
                k.to_string(),
                num(c.at(k)),
                num(c.stderr_at(k)),
                c.n_reps.to_string(),
            ]);
        }
    }
    t
}

/// SPD of every other learner against `reference`, scenario by scenario.
fn spd_curves(res: &Resolved, ds: &Dataset, reference: &str) -> Result<Vec<ErrorCurve>> {
    let groups = ds.groups();
    let pairs: Vec<_> = groups
        .iter()
        .filter(|((l, _), _)| l != reference)
        .filter_map(|((_, s), recs)| groups.get(&(reference.to_string(), s.clone())).map(|r| (s, recs, r)))
        .collect();
    pairs
        .par_iter()
        .map(|(s, recs, refs)| squared_prediction_difference(recs, refs, &covered(res, s, recs)?))
        .collect()
}

pub fn metrics(res: &Resolved, paths: &[PathBuf], reference: &str) -> Result<()> {
    let files = record_files(paths)?;
    let hash = res.config_hash("metrics", json!({ "reference": reference }), &files)?;
    let ds = load_records(res, &files)?;
    let curves = error_curves(res, &ds)?;
    let mse_plot = PlotSpec::new("Mean squared error", "t", &["mse"]).panel("scenario_id").series("learner_id").log_y();
    emit(res, &curve_table(&curves, "mse"), "metrics/curves.csv", &hash, Some(mse_plot))?;
    if ds.learners().contains(reference) {
        let spd = spd_curves(res, &ds, reference)?;
        let title = format!("Squared prediction difference to {reference}");
        let spd_plot = PlotSpec::new(title, "t", &["spd"]).panel("scenario_id").series("learner_id").log_y();
        emit(res, &curve_table(&spd, "spd"), "metrics/spd.csv", &hash, Some(spd_plot))?;
    } else {
        println!("no records for reference learner {reference}; skipping squared prediction differences");
    }
    Ok(())
}

/// Who is profiled, against whom, and which curves set the requirement.
pub struct ProfileSetup<'a> {
    pub learners: &'a [String],
    pub reference: &'a [String],
    pub comparison: &'a [String],
}

/// `(profile, mpr, ratios)` tables over the configured Q and tau grids.
fn profile_tables(res: &Resolved, curves: &CurveSet, setup: &ProfileSetup) -> Result<(Table, Table, Table)> {
    let scenarios: Vec<String> = res
        .grid
        .scenarios()
        .iter()
        .map(|s| s.id.clone())
        .filter(|id| curves.scenarios().contains(id))
        .collect();
    if scenarios.is_empty() {
        return Err(Error::data("no records for any scenario of the grid"));
    }
    let mut profile = Table::new(&["learner_id", "Q", "tau", "rho"]);
    let mut mpr = Table::new(&["learner_id", "Q", "mpr", "mpr_coverage", "n_scenarios", "excluded"]);
    let mut ratios = Table::new(&["learner_id", "Q", "scenario_id", "requirement", "ratio"]);
    for learner in setup.learners {
        for &q in &res.cfg.q_grid {
            let spec = QuantileSpec::new(setup.reference.iter().cloned(), q);
            let r = performance_profile(curves, learner, &spec, setup.comparison, &scenarios, &res.cfg.tau_grid)?;
            for &(tau, rho) in &r.profile {
                profile.push(vec![learner.clone(), num(q), num(tau), num(rho)]);
            }
            mpr.push(vec![
                learner.clone(),
                num(q),
                opt_num(r.mpr),
                r.mpr_coverage.to_string(),
                r.ratios.len().to_string(),
                r.excluded.join(";"),
            ]);
            for s in &scenarios {
                let Some(ratio) = r.ratios.get(s) else { continue };
                let ratio = match ratio {
                    Ratio::Finite(v) => num(*v),
                    Ratio::Infinite => num(f64::INFINITY),
                };
                ratios.push(vec![learner.clone(), num(q), s.clone(), num(curves.requirement(s, &spec)?), ratio]);
            }
        }
    }
    Ok((profile, mpr, ratios))
}

fn emit_profiles(res: &Resolved, dir: &str, hash: &str, tables: (Table, Table, Table), title: &str) -> Result<()> {
    let (profile, mpr, ratios) = tables;
    let p = PlotSpec::new(format!("Performance profiles, {title}"), "tau", &["rho"]).panel("Q").series("learner_id");
    emit(res, &profile, &format!("{dir}/profile.csv"), hash, Some(p))?;
    let m = PlotSpec::new(format!("Mean performance ratio, {title}"), "Q", &["mpr"]).series("learner_id");
    emit(res, &mpr, &format!("{dir}/mpr.csv"), hash, Some(m))?;
    emit(res, &ratios, &format!("{dir}/ratios.csv"), hash, None)
}

fn describe(setup: &ProfileSetup) -> String {
    format!("reference {{{}}}, comparison {{{}}}", setup.reference.join(", "), setup.comparison.join(", "))
}

pub fn profile(res: &Resolved, paths: &[PathBuf], setup: &ProfileSetup) -> Result<()> {
    let files = record_files(paths)?;
    let params = json!({
        "learners": setup.learners,
        "reference": setup.reference,
        "comparison": setup.comparison,
    });
    let hash = res.config_hash("profile", params, &files)?;
    let ds = load_records(res, &files)?;
    let curves: CurveSet = error_curves(res, &ds)?.into_iter().collect();
    let tables = profile_tables(res, &curves, setup)?;
    emit_profiles(res, "profile", &hash, tables, &describe(setup))
}

/// Options of the `risk` subcommand.
pub struct RiskArgs {
    pub scenario: String,
    pub learner: String,
    pub n_reps: Option<usize>,
    pub t_bar: Option<usize>,
    pub delta_xs: Option<f64>,
    pub q: Vec<f64>,
    pub probes: usize,
    pub records: Vec<PathBuf>,
}

pub fn risk(res: &Resolved, a: &RiskArgs) -> Result<()> {
    let s = res
        .grid
        .get(&a.scenario)
        .ok_or_else(|| Error::config("scenario", format!("unknown scenario id `{}`", a.scenario)))?;
    if let Some(q) = a.q.iter().find(|&&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::config("q", format!("{q} must be positive and finite")));
    }
    if let Some(t) = a.t_bar.filter(|&t| t < 1 || t > s.horizon) {
        return Err(Error::config("t_bar", format!("{t} outside 1..={}", s.horizon)));
    }
    let n_reps = a.n_reps.unwrap_or(s.replications);
    let files = if a.records.is_empty() { Vec::new() } else { record_files(&a.records)? };
    let params = json!({
        "scenario": a.scenario,
        "learner": a.learner,
        "n_reps": n_reps,
        "t_bar": a.t_bar,
        "delta_xs": a.delta_xs,
        "q": a.q,
        "probes": a.probes,
    });
    let hash = res.config_hash("risk", params, &files)?;

    let opts = RiskOptions {
        probes: a.probes,
        scaling: res.cfg.prior_scaling,
    };
    let bayes = bayes_risk_curve(s, n_reps, &res.seeds, &opts)?;
    let ds = if files.is_empty() {
        let b: Baseline = a.learner.parse().map_err(|e: String| {
            Error::config("learner", format!("{e}; pass --records to analyze an external learner"))
        })?;
        run_baselines(&s.clone().with_replications(n_reps), &res.seeds, res.cfg.prior_scaling, &[b])?
    } else {
        load_records(res, &files)?
    };
    let recs = ds.select(&a.learner, &s.id);
    if recs.is_empty() {
        return Err(Error::data(format!("no records for ({}, {})", a.learner, s.id)));
    }
    let excess = excess_risk_curve(&recs, s, &res.seeds, res.cfg.prior_scaling)?;
    let floor = match a.delta_xs {
        Some(d) => ExcessFloor::new(a.t_bar.unwrap_or(DEFAULT_T_BAR).min(s.horizon), d)?,
        None => ExcessFloor::fit(&excess.excess, a.t_bar)?,
    };
    let curve = bayes.with_excess(excess)?;
    let ex = curve.excess.as_ref().expect("attached above");

    let mut table = Table::new(&["t", "bayes_risk", "excess_risk", "bayes_stderr", "excess_stderr"]);
    for (t, b, b_se) in curve.bayes.iter() {
        table.push(vec![
            t.to_string(),
            num(b),
            opt_num(ex.excess.at(t)),
            num(b_se),
            opt_num(ex.excess.stderr_at(t)),
        ]);
    }
    let stem = format!("risk/{}_{}", s.id, a.learner);
    let spec = PlotSpec::new(format!("Risk decomposition, {} on {}", a.learner, s.id), "t", &["bayes_risk", "excess_risk"]);
    emit(res, &table, &format!("{stem}_curve.csv"), &hash, Some(spec))?;

    let mut subopt = Table::new(&[
        "q", "n_bma", "subopt", "lower_bound", "condition1", "condition2", "precondition", "t_bar", "delta_xs",
    ]);
    let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
    println!("t_bar = {}, Delta_XS = {}", floor.t_bar, floor.delta_xs);
    println!("{:>10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}", "q", "N_BMA", "SubOpt", "LB", "cond1", "cond2", "pre");
    for &q in &a.q {
        let r = SubOptReport::analyze(q, &floor, &curve)?;
        let lb = r.lower_bound.map(|c| c.to_string()).unwrap_or_default();
        println!(
            "{:>10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
            num(q),
            r.n_bma.to_string(),
            r.subopt.to_string(),
            lb,
            flag(r.condition1_holds),
            flag(r.condition2_holds),
            flag(r.precondition_holds)
        );
        for d in &r.diagnostics {
            println!("  q = {}: {d}", num(q));
        }
        subopt.push(vec![
            num(q),
            r.n_bma.to_string(),
            r.subopt.to_string(),
            lb,
            flag(r.condition1_holds),
            flag(r.condition2_holds),
            flag(r.precondition_holds),
            floor.t_bar.to_string(),
            num(floor.delta_xs),
        ]);
    }
    emit(res, &subopt, &format!("{stem}_subopt.csv"), &hash, None)
}

pub fn plot(input: &Path, output: Option<&Path>) -> Result<()> {
    let (table, _) = Table::read(input)?;
    let title = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let spec = PlotSpec::infer(&table, &title)?;
    let out = output.map(Path::to_path_buf).unwrap_or_else(|| input.with_extension("svg"));
    render(&table, &spec, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Mean performance ratio against BMA across Q.
    Mpr,
    /// Performance profiles against the single-model selectors.
    Profiles,
    /// MSE curves.
    Mse,
    /// Squared prediction differences to BMA.
    Spd,
}

impl Figure {
    pub fn tag(self) -> &'static str {
        match self {
            Figure::Mpr => "1",
            Figure::Profiles => "2",
            Figure::Mse => "3a",
            Figure::Spd => "3b",
        }
    }
}

fn dedup(items: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Runs the configured baselines, merges any external records and emits one figure's tables.
pub fn repro(res: &Resolved, figure: Figure, subject: &str, paths: &[PathBuf]) -> Result<()> {
    let files = if paths.is_empty() { Vec::new() } else { record_files(paths)? };
    let hash = res.config_hash("repro", json!({ "figure": figure.tag(), "subject": subject }), &files)?;
    let mut baselines = res.cfg.baselines()?;
    let bma = Baseline::Selector(SelectorKind::Bma);
    if !baselines.contains(&bma) {
        baselines.insert(0, bma);
    }
    if figure == Figure::Profiles {
        for k in [SelectorKind::Aic, SelectorKind::Bic, SelectorKind::Bmc] {
            if !baselines.contains(&Baseline::Selector(k)) {
                baselines.push(Baseline::Selector(k));
            }
        }
    }
    let internal = run_internal(res, &baselines)?;
    let mut ds = if files.is_empty() {
        internal
    } else {
        Dataset::merge([internal, load_records(res, &files)?])?
    };
    ds.sort();
    let needs_subject = matches!(figure, Figure::Mpr | Figure::Profiles);
    if needs_subject && !ds.learners().contains(subject) {
        return Err(Error::data(format!(
            "no records for learner `{subject}`; pass --records with its predictions or choose another --subject"
        )));
    }
    let dir = format!("repro/fig{}", figure.tag());
    match figure {
        Figure::Mpr => {
            let curves: CurveSet = error_curves(res, &ds)?.into_iter().collect();
            let learners = vec![subject.to_string()];
            let comparison = dedup([subject.to_string(), BMA.to_string()]);
            let setup = ProfileSetup { learners: &learners, reference: &learners, comparison: &comparison };
            let tables = profile_tables(res, &curves, &setup)?;
            emit_profiles(res, &dir, &hash, tables, &describe(&setup))
        }
        Figure::Profiles => {
            let curves: CurveSet = error_curves(res, &ds)?.into_iter().collect();
            let reference = dedup([subject.to_string(), "AIC".to_string()]);
            let comparison = dedup([subject, "AIC", "BIC", "BMC"].map(String::from));
            let setup = ProfileSetup { learners: &comparison, reference: &reference, comparison: &comparison };
            let tables = profile_tables(res, &curves, &setup)?;
            emit_profiles(res, &dir, &hash, tables, &describe(&setup))
        }
        Figure::Mse => {
            let curves = error_curves(res, &ds)?;
            let spec = PlotSpec::new("Mean squared error", "t", &["mse"]).panel("scenario_id").series("learner_id").log_y();
            emit(res, &curve_table(&curves, "mse"), &format!("{dir}/curves.csv"), &hash, Some(spec))
        }
        Figure::Spd => {
            let spd = spd_curves(res, &ds, BMA)?;
            let spec = PlotSpec::new("Squared prediction difference to BMA", "t", &["spd"])
                .panel("scenario_id")
                .series("learner_id")
                .log_y();
            emit(res, &curve_table(&spd, "spd"), &format!("{dir}/spd.csv"), &hash, Some(spec))
        }
    }
}
