use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::CtcoConfig;
use crate::baselines::SacConfig;
use crate::envs::{EnvOverrides, ENV_IDS};
use crate::error::{Error, Result};

pub const AGENT_IDS: [&str; 3] = ["ctco", "sac", "arep"];

/// Which cells a sweep runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub env: String,
    pub agents: Vec<String>,
    pub frequencies_hz: Vec<f64>,
    /// Seeds per (agent, frequency) cell.
    pub seeds: usize,
    pub budget_task_seconds: f64,
    pub output: Option<PathBuf>,
    pub master_seed: u64,
    pub workers: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            env: "mountain_car".into(),
            agents: vec!["ctco".into(), "sac".into()],
            frequencies_hz: vec![20.0, 80.0, 320.0],
            seeds: 5,
            budget_task_seconds: 1200.0,
            output: None,
            master_seed: 0,
            workers: 1,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !ENV_IDS.contains(&self.env.as_str()) {
            return Err(Error::Config(format!(
                "unknown env id {:?}; expected one of {ENV_IDS:?}",
                self.env
            )));
        }
        if self.agents.is_empty() {
            return Err(Error::Config("sweep lists no agents".into()));
        }
        for a in &self.agents {
            if !AGENT_IDS.contains(&a.as_str()) {
                return Err(Error::Config(format!(
                    "unknown agent id {a:?}; expected one of {AGENT_IDS:?}"
                )));
            }
        }
        if self.frequencies_hz.is_empty() {
            return Err(Error::Config("sweep lists no frequencies".into()));
        }
        if let Some(f) = self.frequencies_hz.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::Config(format!("frequency must be positive, got {f}")));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        if !(self.budget_task_seconds.is_finite() && self.budget_task_seconds >= 0.0) {
            return Err(Error::Config(format!(
                "budget_task_seconds must be non-negative, got {}",
                self.budget_task_seconds
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of (agent, frequency, seed) cells.
    pub fn n_cells(&self) -> usize {
        self.agents.len() * self.frequencies_hz.len() * self.seeds
    }
}

/// Complete run configuration: one `[sweep]` table plus per-env and per-agent
/// overrides.
///
/// ```toml
/// [sweep]
/// env = "mountain_car"
/// agents = ["ctco", "sac"]
/// frequencies_hz = [20, 80, 320]
/// seeds = 5
///
/// [env.mountain_car]
/// terminal_bonus = 1.0
///
/// [ctco]
/// twin_critic = true
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sweep: SweepSpec,
    pub env: EnvOverrides,
    pub ctco: CtcoConfig,
    pub sac: SacConfig,
    /// Base option config for the action-repetition agent; the single-RBF
    /// and tick-quantization settings are forced on top of it.
    pub arep: CtcoConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        self.ctco.validate()?;
        self.sac.validate()?;
        self.arep.validate()
    }
}

/// 1-based line containing byte `offset`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn sections_override_fields() {
        let cfg = RunConfig::from_toml_str(
            "[sweep]\nenv = \"pendulum\"\nagents = [\"arep\"]\nfrequencies_hz = [10, 40.5]\nseeds = 2\n\
             [env.pendulum]\nmax_torque = 1.5\n[ctco]\nbeta_h = 0.2\n[sac]\nalpha = 0.3\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep.env, "pendulum");
        assert_eq!(cfg.sweep.frequencies_hz, vec![10.0, 40.5]);
        assert_eq!(cfg.env.pendulum.max_torque, 1.5);
        assert_eq!(cfg.ctco.beta_h, 0.2);
        assert_eq!(cfg.sac.alpha, 0.3);
        assert_eq!(cfg.sweep.n_cells(), 4);
    }

    #[test]
    fn unknown_ids_are_config_errors() {
        let err = RunConfig::from_toml_str("[sweep]\nenv = \"cartpole\"\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("cartpole")));
        let err = RunConfig::from_toml_str("[sweep]\nagents = [\"ppo\"]\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("ppo")));
    }

    #[test]
    fn invalid_sweeps_rejected() {
        for body in ["seeds = 0", "frequencies_hz = [20, -1]", "frequencies_hz = []", "workers = 0"] {
            let text = format!("[sweep]\n{body}\n");
            assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))), "{body}");
        }
    }

    #[test]
    fn parse_errors_cite_line() {
        let err = RunConfig::from_toml_str("[sweep]\nseeds = 3\n\n[ctco]\nbogus_key = 1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        let err = RunConfig::from_toml_str("[sweep]\nseeds = \"three\"\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }
}
