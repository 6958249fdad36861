//! TOML experiment configuration.
//!
//! ```toml
//! [env]
//! name = "riverswim"            # riverswim | two-state-cycle | random-communicating | bandit
//! seed = 0                      # generator seed for random-communicating
//! reward_kind = "bernoulli-scaled"
//! [env.params]
//! n = 6
//!
//! [experiment]
//! algorithms = ["ucrl2b", "ucrl2-hoeffding"]
//! horizon = 100000
//! delta = 0.05
//! seeds = [1, 2, 3]
//! output_dir = "out"
//! alpha = 0.9                   # optional
//! workers = 1                   # optional
//! initial_state = 0             # optional
//! ground_truth_tol = 1e-10      # optional
//! fixed_policy = [1, 1, 1]      # optional, defaults to the optimal policy
//! debug_dump = false            # optional per-episode statistics dump
//!
//! [coverage]                    # optional
//! num_runs = 200
//! check_horizon = 10000
//! set_override = "none"         # none | zero-width | vacuous
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::HarnessError;
use crate::evi::DEFAULT_ALPHA;
use crate::learner::{Algorithm, LearnerConfig};
use crate::mdp::{build_environment, EnvironmentSpec, Policy, RewardKind, TabularMdp};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    env: RawEnv,
    experiment: RawExperiment,
    coverage: Option<RawCoverage>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    name: String,
    seed: Option<u64>,
    reward_kind: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    algorithms: Vec<String>,
    horizon: u64,
    delta: f64,
    seeds: Vec<u64>,
    output_dir: PathBuf,
    alpha: Option<f64>,
    workers: Option<usize>,
    initial_state: Option<usize>,
    ground_truth_tol: Option<f64>,
    fixed_policy: Option<Vec<usize>>,
    #[serde(default)]
    debug_dump: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoverage {
    num_runs: usize,
    check_horizon: u64,
    set_override: Option<String>,
}

/// Which confidence sets the coverage experiment checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetOverride {
    /// The algorithm's own Bernstein sets.
    #[default]
    None,
    /// Point intervals at the empirical estimates.
    ZeroWidth,
    /// Full-range intervals, as with no data.
    Vacuous,
}

impl SetOverride {
    pub fn radius_scale(self) -> f64 {
        match self {
            SetOverride::None => 1.0,
            SetOverride::ZeroWidth => 0.0,
            SetOverride::Vacuous => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageParams {
    pub num_runs: usize,
    pub check_horizon: u64,
    pub set_override: SetOverride,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvironmentSpec,
    pub reward_kind: RewardKind,
    pub algorithms: Vec<Algorithm>,
    pub horizon: u64,
    pub delta: f64,
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub initial_state: usize,
    pub ground_truth_tol: f64,
    pub fixed_policy: Option<Vec<usize>>,
    pub debug_dump: bool,
    pub coverage: Option<CoverageParams>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string().trim().to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, HarnessError> {
        let env = EnvironmentSpec::from_parts(&raw.env.name, &raw.env.params, raw.env.seed).map_err(|e| match e {
            crate::mdp::MdpError::InvalidParameter { name, reason } => HarnessError::config(&name, reason),
            crate::mdp::MdpError::UnknownEnvironment(n) => {
                HarnessError::config("env.name", format!("unknown environment `{n}`"))
            }
            other => HarnessError::Mdp(other),
        })?;
        let reward_kind = match raw.env.reward_kind {
            Some(k) => k
                .parse::<RewardKind>()
                .map_err(|e| HarnessError::config("env.reward_kind", e.to_string()))?,
            None => RewardKind::default(),
        };
        let ex = raw.experiment;
        if ex.algorithms.is_empty() {
            return Err(HarnessError::config("experiment.algorithms", "must not be empty"));
        }
        let algorithms = ex
            .algorithms
            .iter()
            .map(|a| a.parse::<Algorithm>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::config("experiment.algorithms", e.to_string()))?;
        if ex.horizon < 1 {
            return Err(HarnessError::config("experiment.horizon", "must be at least 1"));
        }
        if !(ex.delta > 0.0 && ex.delta < 1.0) {
            return Err(HarnessError::config("experiment.delta", "must lie in (0, 1)"));
        }
        if ex.seeds.is_empty() {
            return Err(HarnessError::config("experiment.seeds", "must not be empty"));
        }
        let alpha = ex.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(HarnessError::config("experiment.alpha", "must lie in (0, 1]"));
        }
        let workers = ex.workers.unwrap_or(1);
        if workers == 0 {
            return Err(HarnessError::config("experiment.workers", "must be positive"));
        }
        let ground_truth_tol = ex.ground_truth_tol.unwrap_or(1e-10);
        if !(ground_truth_tol > 0.0) {
            return Err(HarnessError::config("experiment.ground_truth_tol", "must be positive"));
        }
        let coverage = match raw.coverage {
            Some(c) => {
                if c.num_runs == 0 {
                    return Err(HarnessError::config("coverage.num_runs", "must be positive"));
                }
                if c.check_horizon == 0 {
                    return Err(HarnessError::config("coverage.check_horizon", "must be positive"));
                }
                let set_override = match c.set_override.as_deref() {
                    None | Some("none") => SetOverride::None,
                    Some("zero-width") => SetOverride::ZeroWidth,
                    Some("vacuous") => SetOverride::Vacuous,
                    Some(other) => {
                        return Err(HarnessError::config(
                            "coverage.set_override",
                            format!("expected none, zero-width or vacuous, got `{other}`"),
                        ))
                    }
                };
                Some(CoverageParams {
                    num_runs: c.num_runs,
                    check_horizon: c.check_horizon,
                    set_override,
                })
            }
            None => None,
        };
        Ok(Self {
            env,
            reward_kind,
            algorithms,
            horizon: ex.horizon,
            delta: ex.delta,
            alpha,
            seeds: ex.seeds,
            output_dir: ex.output_dir,
            workers,
            initial_state: ex.initial_state.unwrap_or(0),
            ground_truth_tol,
            fixed_policy: ex.fixed_policy,
            debug_dump: ex.debug_dump,
            coverage,
        })
    }

    pub fn build_env(&self) -> Result<TabularMdp, HarnessError> {
        let env = build_environment(&self.env)?.with_reward_kind(self.reward_kind);
        if self.initial_state >= env.num_states() {
            return Err(HarnessError::config("experiment.initial_state", "out of range"));
        }
        if let Some(p) = &self.fixed_policy {
            Policy::Deterministic(p.clone())
                .validate(env.num_states(), env.num_actions())
                .map_err(|e| HarnessError::config("experiment.fixed_policy", e.to_string()))?;
        }
        Ok(env)
    }

    pub fn learner_config(&self, algorithm: Algorithm, seed: u64) -> LearnerConfig {
        LearnerConfig {
            horizon: self.horizon,
            delta: self.delta,
            alpha: self.alpha,
            algorithm,
            seed,
            initial_state: self.initial_state,
            ..LearnerConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[env]
name = "riverswim"
[env.params]
n = 6

[experiment]
algorithms = ["ucrl2b", "ucrl2-hoeffding"]
horizon = 100
delta = 0.05
seeds = [1, 2]
output_dir = "out"
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(cfg.env, EnvironmentSpec::RiverSwim { n: 6 });
        assert_eq!(cfg.algorithms, vec![Algorithm::Ucrl2b, Algorithm::Ucrl2Hoeffding]);
        assert_eq!(cfg.alpha, 0.9);
        assert_eq!(cfg.workers, 1);
        assert!(cfg.coverage.is_none());
    }

    #[test]
    fn random_env_takes_seed() {
        let text = r#"
[env]
name = "random-communicating"
seed = 7
[env.params]
states = 3
actions = 2
gamma = 2
[experiment]
algorithms = ["ucrl2b"]
horizon = 10
delta = 0.1
seeds = [0]
output_dir = "o"
[coverage]
num_runs = 5
check_horizon = 100
set_override = "vacuous"
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(
            cfg.env,
            EnvironmentSpec::RandomCommunicating { states: 3, actions: 2, gamma: 2, seed: 7 }
        );
        assert_eq!(cfg.coverage.unwrap().set_override, SetOverride::Vacuous);
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_toml_str(&BASIC.replace("seeds = [1, 2]", "seeds = []")).unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref field, .. } if field == "experiment.seeds"));
        let err = ExperimentConfig::from_toml_str(&BASIC.replace("delta = 0.05", "delta = 2.0")).unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref field, .. } if field == "experiment.delta"));
        let err = ExperimentConfig::from_toml_str(&BASIC.replace("\"ucrl2b\",", "\"sarsa\",")).unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref field, .. } if field == "experiment.algorithms"));
        let err = ExperimentConfig::from_toml_str(&BASIC.replace("riverswim", "lake")).unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref field, .. } if field == "env.name"));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = ExperimentConfig::from_toml_str(&BASIC.replace("horizon = 100", "horizon = ")).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, HarnessError::Parse(_)));
        assert!(msg.contains("line"), "{msg}");
    }
}
