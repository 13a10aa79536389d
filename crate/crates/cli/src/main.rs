//! `iclbench`: generate tasks, run baselines, ingest prediction records and
//! compute sample-complexity metrics, performance profiles and risk curves.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
//! failure. Every CSV starts with `# config_hash: <sha256>`; identical hashes
//! imply byte-identical CSVs.

mod commands;
mod config;
mod plot;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Figure, ProfileSetup, RiskArgs};
use config::{Resolved, RunConfig};
use iclbench_core::estimators::PriorScaling;
use iclbench_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "iclbench", version, about = "Sample-complexity benchmark for in-context regression")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML run configuration. Keys: scenarios, select, master_seed, learners,
    /// out_dir, q_grid, tau_grid, reps, plot, prior_scaling. Flags override keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// `default9` or a TOML file of `[[scenario]]` tables.
    #[arg(long, global = true, value_name = "GRID")]
    scenarios: Option<String>,
    /// Keep only these scenario ids.
    #[arg(long, global = true, value_delimiter = ',', value_name = "IDS")]
    select: Option<Vec<String>>,
    /// Master seed of every task and probe stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replications per scenario, overriding the grid.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "ICLBENCH_OUT", value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to one per core. Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Coefficient prior of the per-class posteriors.
    #[arg(long, global = true, value_enum)]
    prior_scaling: Option<Scaling>,
    /// Also render each table as SVG.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Scaling {
    /// Prior variance sigma_w^2 / (m + 1), matching the generator.
    Matched,
    /// Prior variance sigma_w^2, i.e. ridge penalty sigma_eps^2 / sigma_w^2.
    Literal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FigureArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3a")]
    ThreeA,
    #[value(name = "3b")]
    ThreeB,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write every task of the grid to `tasks/<scenario>.tsv`.
    Gen,
    /// Run baseline learners and write `records/<scenario>/<learner>.tsv`.
    Baselines {
        /// Any of BMA, AIC, BIC, BMC, ENSEMBLE, ORACLE.
        #[arg(long, value_delimiter = ',')]
        learners: Option<Vec<String>>,
    },
    /// Check record files against the regenerated tasks.
    IngestValidate {
        /// Record files or directories of `*.tsv` files.
        #[arg(long, required = true, num_args = 1..)]
        records: Vec<PathBuf>,
    },
    /// MSE curves and squared prediction differences from records.
    Metrics {
        #[arg(long, required = true, num_args = 1..)]
        records: Vec<PathBuf>,
        /// Learner the squared prediction differences are taken against.
        #[arg(long, default_value = "BMA")]
        reference: String,
    },
    /// Performance ratios, mean performance ratios and profiles.
    Profile {
        #[arg(long, required = true, num_args = 1..)]
        records: Vec<PathBuf>,
        /// Quantile levels; defaults to the configured grid.
        #[arg(long = "Q", value_delimiter = ',')]
        q: Option<Vec<f64>>,
        /// Learners whose best sample complexity is the denominator.
        #[arg(long, value_delimiter = ',', required = true)]
        comparison: Vec<String>,
        /// Learners whose pooled curves set the requirement; defaults to the comparison set.
        #[arg(long, value_delimiter = ',')]
        reference: Option<Vec<String>>,
        /// Learners to profile; defaults to the comparison set.
        #[arg(long, value_delimiter = ',')]
        learners: Option<Vec<String>>,
    },
    /// Bayes and excess risk curves with the suboptimality table.
    Risk {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "BMA")]
        learner: String,
        /// Replications for the Bayes risk (and internal baselines); defaults to the scenario's.
        #[arg(long)]
        n_reps: Option<usize>,
        /// Onset of the excess-risk floor; defaults to min(100, T).
        #[arg(long)]
        t_bar: Option<usize>,
        /// Excess-risk floor in nats; fitted from the excess curve when absent.
        #[arg(long)]
        delta_xs: Option<f64>,
        /// Requirements q in nats.
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1,0.2,0.5")]
        q: Vec<f64>,
        /// Held-out probe points per replication.
        #[arg(long, default_value_t = 32)]
        probes: usize,
        /// Records of the learner; baselines are run internally when absent.
        #[arg(long, num_args = 1..)]
        records: Vec<PathBuf>,
    },
    /// Render a CSV written by this tool as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the input path with an `.svg` extension.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Regenerate one figure's tables end to end.
    Repro {
        #[arg(long, value_enum)]
        figure: FigureArg,
        /// Learner analyzed by figures 1 and 2.
        #[arg(long, default_value = "ICL")]
        subject: String,
        /// Extra records, e.g. of a trained model.
        #[arg(long, num_args = 1..)]
        records: Vec<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 1,
        Error::Data(_) | Error::Io { .. } => 2,
        Error::Numerical(_) => 3,
    }
}

fn resolve(cli: &Cli) -> Result<Resolved> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &g.scenarios {
        cfg.scenarios = s.clone();
    }
    if let Some(s) = &g.select {
        cfg.select = s.clone();
    }
    if let Some(s) = g.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = g.reps {
        cfg.reps = Some(n);
    }
    if let Some(o) = &g.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = g.prior_scaling {
        cfg.prior_scaling = match s {
            Scaling::Matched => PriorScaling::Matched,
            Scaling::Literal => PriorScaling::Literal,
        };
    }
    cfg.plot |= g.plot;
    match &cli.command {
        Command::Baselines { learners: Some(l) } => cfg.learners = l.clone(),
        Command::Profile { q: Some(q), .. } => cfg.q_grid = q.clone(),
        _ => {}
    }
    Resolved::new(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("threads", e.to_string()))?;
    }
    if let Command::Plot { input, output } = &cli.command {
        return commands::plot(input, output.as_deref());
    }
    let res = resolve(&cli)?;
    match &cli.command {
        Command::Gen => commands::gen(&res),
        Command::Baselines { .. } => commands::baselines(&res),
        Command::IngestValidate { records } => commands::ingest_validate(&res, records),
        Command::Metrics { records, reference } => commands::metrics(&res, records, reference),
        Command::Profile {
            records,
            comparison,
            reference,
            learners,
            ..
        } => {
            let setup = ProfileSetup {
                learners: learners.as_deref().unwrap_or(comparison),
                reference: reference.as_deref().unwrap_or(comparison),
                comparison,
            };
            commands::profile(&res, records, &setup)
        }
        Command::Risk {
            scenario,
            learner,
            n_reps,
            t_bar,
            delta_xs,
            q,
            probes,
            records,
        } => commands::risk(
            &res,
            &RiskArgs {
                scenario: scenario.clone(),
                learner: learner.clone(),
                n_reps: *n_reps,
                t_bar: *t_bar,
                delta_xs: *delta_xs,
                q: q.clone(),
                probes: *probes,
                records: records.clone(),
            },
        ),
        Command::Plot { .. } => unreachable!("handled above"),
        Command::Repro {
            figure,
            subject,
            records,
        } => {
            let figure = match figure {
                FigureArg::One => Figure::Mpr,
                FigureArg::Two => Figure::Profiles,
                FigureArg::ThreeA => Figure::Mse,
                FigureArg::ThreeB => Figure::Spd,
            };
            commands::repro(&res, figure, subject, records)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; help and version are not errors.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iclbench: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
