use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 10;
pub const DEFAULT_PERIOD: f64 = 5.0;
pub const DEFAULT_HORIZON: usize = 100;
pub const DEFAULT_REPLICATIONS: usize = 512;

/// Noise levels and prior scales of the default 3x3 grid.
pub const DEFAULT_NOISE_VARIANCES: [f64; 3] = [0.003, 0.03, 0.3];
pub const DEFAULT_WEIGHT_VARIANCES: [f64; 3] = [0.1, 1.0, 10.0];

/// Environment parameters of one benchmark scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    /// Largest implicit dimension `M`.
    #[serde(alias = "M")]
    pub max_dim: usize,
    pub sigma_w_sq: f64,
    pub sigma_eps_sq: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    /// Test prompt horizon `T`; tasks carry `T + 1` input/output pairs.
    #[serde(alias = "T", default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

fn default_period() -> f64 {
    DEFAULT_PERIOD
}
fn default_x_min() -> f64 {
    -DEFAULT_PERIOD
}
fn default_x_max() -> f64 {
    DEFAULT_PERIOD
}
fn default_horizon() -> usize {
    DEFAULT_HORIZON
}
fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

impl Scenario {
    /// Scenario with the default domain, horizon and replication count.
    pub fn new(id: impl Into<String>, max_dim: usize, sigma_w_sq: f64, sigma_eps_sq: f64) -> Self {
        Self {
            id: id.into(),
            max_dim,
            sigma_w_sq,
            sigma_eps_sq,
            period: DEFAULT_PERIOD,
            x_min: -DEFAULT_PERIOD,
            x_max: DEFAULT_PERIOD,
            horizon: DEFAULT_HORIZON,
            replications: DEFAULT_REPLICATIONS,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    /// Canonical id used by the default grid, e.g. `sw10_se0.003`.
    pub fn grid_id(sigma_w_sq: f64, sigma_eps_sq: f64) -> String {
        format!("sw{sigma_w_sq}_se{sigma_eps_sq}")
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("scenario[{}].{name}", self.id);
        if self.id.is_empty() || self.id.chars().any(char::is_whitespace) {
            return Err(Error::config(field("id"), "must be non-empty without whitespace"));
        }
        if self.max_dim < 1 {
            return Err(Error::config(field("max_dim"), "must be >= 1"));
        }
        if !(self.sigma_w_sq > 0.0 && self.sigma_w_sq.is_finite()) {
            return Err(Error::config(field("sigma_w_sq"), "must be positive and finite"));
        }
        if !(self.sigma_eps_sq > 0.0 && self.sigma_eps_sq.is_finite()) {
            return Err(Error::config(field("sigma_eps_sq"), "must be positive and finite"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::config(field("period"), "must be positive and finite"));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::config(field("x_min"), "need finite x_min < x_max"));
        }
        if self.horizon < 1 {
            return Err(Error::config(field("horizon"), "must be >= 1"));
        }
        if self.replications < 1 {
            return Err(Error::config(field("replications"), "must be >= 1"));
        }
        Ok(())
    }
}

/// An ordered, validated set of scenarios with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    #[serde(rename = "scenario")]
    scenarios: Vec<Scenario>,
}

impl ScenarioGrid {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::config("scenario", "grid is empty"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &scenarios {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(Error::config(format!("scenario[{}].id", s.id), "duplicate id"));
            }
        }
        Ok(Self { scenarios })
    }

    /// The nine-scenario grid: noise variance in {0.003, 0.03, 0.3} crossed with
    /// weight variance in {0.1, 1, 10}, `M = 10`, `T = 100`, 512 replications.
    pub fn default9() -> Self {
        let mut scenarios = Vec::with_capacity(9);
        for &sigma_eps_sq in &DEFAULT_NOISE_VARIANCES {
            for &sigma_w_sq in &DEFAULT_WEIGHT_VARIANCES {
                scenarios.push(Scenario::new(
                    Scenario::grid_id(sigma_w_sq, sigma_eps_sq),
                    DEFAULT_MAX_DIM,
                    sigma_w_sq,
                    sigma_eps_sq,
                ));
            }
        }
        Self { scenarios }
    }

    /// Parses a TOML document with one `[[scenario]]` table per scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let grid: ScenarioGrid =
            toml::from_str(text).map_err(|e| Error::config("scenario", e.to_string()))?;
        Self::new(grid.scenarios)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario grid serializes")
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// Keeps only the listed ids, in grid order.
    pub fn select(&self, ids: &[String]) -> Result<Self> {
        for id in ids {
            if self.get(id).is_none() {
                return Err(Error::config("scenarios", format!("unknown scenario id `{id}`")));
            }
        }
        Self::new(
            self.scenarios
                .iter()
                .filter(|s| ids.contains(&s.id))
                .cloned()
                .collect(),
        )
    }

    /// Applies a replication override to every scenario.
    pub fn with_replications(mut self, replications: usize) -> Result<Self> {
        for s in &mut self.scenarios {
            s.replications = replications;
        }
        Self::new(self.scenarios)
    }
}
