use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use iclbench_core::estimators::{Baseline, PriorScaling};
use iclbench_core::metrics::{default_q_grid, default_tau_grid};
use iclbench_core::{Error, Result, ScenarioGrid, SeedPolicy};

pub const DEFAULT_LEARNERS: [&str; 5] = ["BMA", "AIC", "BIC", "BMC", "ENSEMBLE"];

/// Keys of the TOML run configuration. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `default9` or the path of a scenario-grid file.
    pub scenarios: String,
    /// Scenario ids to keep; empty keeps all.
    pub select: Vec<String>,
    pub master_seed: u64,
    pub learners: Vec<String>,
    pub out_dir: PathBuf,
    pub q_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// Replication override applied to every scenario.
    pub reps: Option<usize>,
    pub plot: bool,
    pub prior_scaling: PriorScaling,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenarios: "default9".into(),
            select: Vec::new(),
            master_seed: 0,
            learners: DEFAULT_LEARNERS.iter().map(|s| s.to_string()).collect(),
            out_dir: PathBuf::from("out"),
            q_grid: default_q_grid(),
            tau_grid: default_tau_grid(),
            reps: None,
            plot: false,
            prior_scaling: PriorScaling::Matched,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::config("learners", "must name at least one learner"));
        }
        if let Some(id) = self.learners.iter().find(|l| l.is_empty() || l.contains([',', ' ', '\t'])) {
            return Err(Error::config("learners", format!("invalid learner id `{id}`")));
        }
        if self.q_grid.is_empty() {
            return Err(Error::config("q_grid", "must not be empty"));
        }
        if let Some(q) = self.q_grid.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::config("q_grid", format!("{q} is outside (0, 1)")));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::config("tau_grid", "must not be empty"));
        }
        if self.tau_grid.iter().any(|&t| !(t >= 1.0 && t.is_finite())) {
            return Err(Error::config("tau_grid", "entries must be finite and >= 1"));
        }
        if self.tau_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("tau_grid", "must be sorted ascending"));
        }
        if self.reps == Some(0) {
            return Err(Error::config("reps", "must be at least 1"));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(Error::config("out_dir", "must not be empty"));
        }
        Ok(())
    }

    /// Learners that can be run internally.
    pub fn baselines(&self) -> Result<Vec<Baseline>> {
        self.learners
            .iter()
            .map(|l| l.parse().map_err(|e: String| Error::config("learners", e)))
            .collect()
    }

    fn grid(&self) -> Result<ScenarioGrid> {
        let grid = if self.scenarios == "default9" {
            ScenarioGrid::default9()
        } else {
            ScenarioGrid::load(&self.scenarios).map_err(|e| match e {
                Error::Io { path, source } => Error::config("scenarios", format!("{path}: {source}")),
                other => other,
            })?
        };
        let grid = if self.select.is_empty() { grid } else { grid.select(&self.select)? };
        match self.reps {
            Some(n) => grid.with_replications(n),
            None => Ok(grid),
        }
    }
}

/// A validated configuration with its scenario grid resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub cfg: RunConfig,
    pub grid: ScenarioGrid,
    pub seeds: SeedPolicy,
}

impl Resolved {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let seeds = SeedPolicy::new(cfg.master_seed);
        Ok(Self { cfg, grid, seeds })
    }

    /// SHA-256 over everything that can change an output byte: the command,
    /// its parameters, the resolved grid, the seed-relevant keys and the
    /// contents of the input files. Output location, threads and the plot
    /// toggle are excluded.
    pub fn config_hash(&self, command: &str, params: serde_json::Value, inputs: &[PathBuf]) -> Result<String> {
        let mut input_digests = Vec::with_capacity(inputs.len());
        for p in inputs {
            let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
            input_digests.push(hex::encode(Sha256::digest(&bytes)));
        }
        input_digests.sort();
        let canonical = serde_json::json!({
            "command": command,
            "params": params,
            "grid": self.grid,
            "master_seed": self.cfg.master_seed,
            "learners": self.cfg.learners,
            "q_grid": self.cfg.q_grid,
            "tau_grid": self.cfg.tau_grid,
            "prior_scaling": self.cfg.prior_scaling,
            "inputs": input_digests,
        });
        Ok(hex::encode(Sha256::digest(canonical.to_string().as_bytes())))
    }

    pub fn out(&self, sub: impl AsRef<Path>) -> PathBuf {
        self.cfg.out_dir.join(sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let r = Resolved::new(RunConfig::default()).unwrap();
        assert_eq!(r.grid.len(), 9);
        assert_eq!(r.cfg.baselines().unwrap().len(), 5);
    }

    #[test]
    fn invalid_fields_are_named() {
        let mut cfg = RunConfig { q_grid: vec![0.5, 1.0], ..RunConfig::default() };
        let e = Resolved::new(cfg.clone()).unwrap_err().to_string();
        assert!(e.contains("q_grid"), "{e}");
        cfg.q_grid = vec![0.5];
        cfg.tau_grid = vec![2.0, 1.5];
        assert!(Resolved::new(cfg.clone()).unwrap_err().to_string().contains("tau_grid"));
        cfg.tau_grid = vec![1.0];
        cfg.select = vec!["nope".into()];
        assert!(Resolved::new(cfg).unwrap_err().to_string().contains("scenarios"));
    }

    #[test]
    fn toml_keys_parse_and_reject_unknown() {
        let cfg: RunConfig = toml::from_str("master_seed = 7\nreps = 4\nprior_scaling = \"literal\"\n").unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.reps, Some(4));
        assert_eq!(cfg.prior_scaling, PriorScaling::Literal);
        assert!(toml::from_str::<RunConfig>("seed = 1").is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = Resolved::new(RunConfig::default()).unwrap();
        let b = Resolved::new(RunConfig { out_dir: "elsewhere".into(), plot: true, ..RunConfig::default() }).unwrap();
        let c = Resolved::new(RunConfig { master_seed: 1, ..RunConfig::default() }).unwrap();
        let h = |r: &Resolved| r.config_hash("gen", serde_json::Value::Null, &[]).unwrap();
        assert_eq!(h(&a), h(&b));
        assert_ne!(h(&a), h(&c));
        assert_eq!(h(&a).len(), 64);
    }
}
