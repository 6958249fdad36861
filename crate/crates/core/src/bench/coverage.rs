//! Monte-Carlo estimate of the probability that the true MDP ever leaves the
//! plausible set, checked at every episode start.

use rayon::prelude::*;
use serde::Serialize;

use super::{ExperimentConfig, HarnessError};
use crate::learner::{run_ucrl2b_observed, Algorithm, LearnerConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub num_runs: usize,
    pub check_horizon: u64,
    pub delta: f64,
    pub violating_runs: usize,
    pub violation_fraction: f64,
    /// `δ/3`, the target failure probability.
    pub bound: f64,
    /// Two binomial standard deviations of a fraction with mean `δ/3`.
    pub slack: f64,
    /// `violating_runs[k]`: runs whose sets missed the true MDP at episode `k + 1`.
    pub per_episode_violations: Vec<usize>,
}

impl CoverageReport {
    pub fn within_bound(&self) -> bool {
        self.violation_fraction <= self.bound + self.slack
    }
}

/// Seed of coverage run `i`.
pub fn run_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}

/// Runs UCRL2B `num_runs` times up to `check_horizon` and records at every
/// episode start whether the true rewards and transitions lie inside the
/// confidence sets. Runs use seeds `seeds[0] + i`.
pub fn coverage_experiment(cfg: &ExperimentConfig) -> Result<CoverageReport, HarnessError> {
    let params = cfg
        .coverage
        .clone()
        .ok_or_else(|| HarnessError::config("coverage", "missing [coverage] section"))?;
    let env = cfg.build_env()?;
    let base = cfg.seeds[0];
    let scale = params.set_override.radius_scale();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::config("experiment.workers", e.to_string()))?;
    let per_run: Vec<Vec<bool>> = pool.install(|| {
        (0..params.num_runs)
            .into_par_iter()
            .map(|i| {
                let learner = LearnerConfig {
                    horizon: params.check_horizon,
                    delta: cfg.delta,
                    alpha: cfg.alpha,
                    algorithm: Algorithm::Ucrl2b,
                    seed: run_seed(base, i),
                    initial_state: cfg.initial_state,
                    radius_scale: scale,
                    ..LearnerConfig::default()
                };
                let mut missed = Vec::new();
                run_ucrl2b_observed(&env, &learner, |start| missed.push(!start.sets.contains(&env)))?;
                Ok(missed)
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;

    let max_episodes = per_run.iter().map(Vec::len).max().unwrap_or(0);
    let mut per_episode_violations = vec![0; max_episodes];
    let mut violating_runs = 0;
    for run in &per_run {
        if run.iter().any(|&m| m) {
            violating_runs += 1;
        }
        for (k, &m) in run.iter().enumerate() {
            per_episode_violations[k] += m as usize;
        }
    }
    let n = params.num_runs as f64;
    let bound = cfg.delta / 3.0;
    Ok(CoverageReport {
        num_runs: params.num_runs,
        check_horizon: params.check_horizon,
        delta: cfg.delta,
        violating_runs,
        violation_fraction: violating_runs as f64 / n,
        bound,
        slack: 2.0 * (bound * (1.0 - bound) / n).sqrt(),
        per_episode_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{CoverageParams, SetOverride};

    fn config(set_override: SetOverride) -> ExperimentConfig {
        let text = r#"
[env]
name = "random-communicating"
seed = 3
[env.params]
states = 3
actions = 2
gamma = 2
[experiment]
algorithms = ["ucrl2b"]
horizon = 10
delta = 0.1
seeds = [100]
output_dir = "unused"
"#;
        let mut cfg = ExperimentConfig::from_toml_str(text).unwrap();
        cfg.coverage = Some(CoverageParams {
            num_runs: 20,
            check_horizon: 2000,
            set_override,
        });
        cfg
    }

    #[test]
    fn zero_width_sets_never_cover() {
        let report = coverage_experiment(&config(SetOverride::ZeroWidth)).unwrap();
        assert_eq!(report.violation_fraction, 1.0);
    }

    #[test]
    fn vacuous_sets_always_cover() {
        let report = coverage_experiment(&config(SetOverride::Vacuous)).unwrap();
        assert_eq!(report.violating_runs, 0);
        assert!(report.per_episode_violations.iter().all(|&v| v == 0));
    }

    #[test]
    fn missing_section_is_a_config_error() {
        let mut cfg = config(SetOverride::None);
        cfg.coverage = None;
        assert!(matches!(coverage_experiment(&cfg), Err(HarnessError::Config { .. })));
    }
}
