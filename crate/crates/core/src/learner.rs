//! The episodic optimistic learning loop (UCRL2B and the Hoeffding UCRL2
//! baseline) and a fixed-policy control run.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evi::{extended_value_iteration, EviConfig, EviError, OptimisticModel, PlanResult, DEFAULT_ALPHA, DEFAULT_MAX_ITERATIONS, EPSILON_FLOOR};
use crate::hoeffding::HoeffdingSets;
use crate::mdp::{MdpError, Policy, PolicyError, TabularMdp};
use crate::rng;
use crate::stats::{ConfidenceSets, RunningStats, StatsError};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Evi(#[from] EviError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("malformed run log at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ucrl2b,
    Ucrl2Hoeffding,
    FixedPolicy,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ucrl2b => "ucrl2b",
            Algorithm::Ucrl2Hoeffding => "ucrl2-hoeffding",
            Algorithm::FixedPolicy => "fixed-policy",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ucrl2b" => Ok(Algorithm::Ucrl2b),
            "ucrl2-hoeffding" | "ucrl2" => Ok(Algorithm::Ucrl2Hoeffding),
            "fixed-policy" => Ok(Algorithm::FixedPolicy),
            other => Err(LearnerError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub horizon: u64,
    pub delta: f64,
    pub alpha: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub initial_state: usize,
    /// Multiplies every confidence radius. 1 is the algorithm as stated;
    /// 0 plans on the empirical model of visited pairs.
    pub radius_scale: f64,
    /// Iteration cap of every planning call.
    #[serde(default = "default_evi_max_iterations")]
    pub evi_max_iterations: usize,
}

fn default_evi_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            horizon: 10_000,
            delta: 0.05,
            alpha: DEFAULT_ALPHA,
            algorithm: Algorithm::Ucrl2b,
            seed: 0,
            initial_state: 0,
            radius_scale: 1.0,
            evi_max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl LearnerConfig {
    pub fn new(algorithm: Algorithm, horizon: u64, delta: f64, seed: u64) -> Self {
        Self {
            horizon,
            delta,
            algorithm,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self, env: &TabularMdp) -> Result<(), LearnerError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LearnerError::Config(format!("delta = {} not in (0, 1)", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(LearnerError::Config(format!("alpha = {} not in (0, 1]", self.alpha)));
        }
        if self.initial_state >= env.num_states() {
            return Err(LearnerError::Config(format!(
                "initial state {} out of range",
                self.initial_state
            )));
        }
        if !(self.radius_scale >= 0.0) {
            return Err(LearnerError::Config(format!("radius_scale = {} is negative", self.radius_scale)));
        }
        if self.evi_max_iterations == 0 {
            return Err(LearnerError::Config("evi_max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    /// Episode index.
    pub k: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub k: u64,
    pub t_k: u64,
    pub gain: f64,
    pub epsilon: f64,
    pub evi_iterations: usize,
    pub evi_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub steps: Vec<StepRecord>,
    pub episodes: Vec<EpisodeRecord>,
    pub seed: u64,
    pub config: LearnerConfig,
}

pub const STEPS_HEADER: &str = "t,s,a,r,s_next,k";
pub const EPISODES_HEADER: &str = "k,t_k,gain,epsilon,evi_iterations,evi_converged";

impl RunLog {
    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards().sum()
    }

    /// One row per step: `t,s,a,r,s_next,k`.
    pub fn write_steps<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{STEPS_HEADER}")?;
        for st in &self.steps {
            writeln!(w, "{},{},{},{},{},{}", st.t, st.state, st.action, st.reward, st.next_state, st.k)?;
        }
        Ok(())
    }

    /// Episode sidecar: `k,t_k,gain,epsilon,evi_iterations,evi_converged`.
    pub fn write_episodes<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{EPISODES_HEADER}")?;
        for e in &self.episodes {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                e.k, e.t_k, e.gain, e.epsilon, e.evi_iterations, e.evi_converged as u8
            )?;
        }
        Ok(())
    }

    /// Parses a file written by [`RunLog::write_steps`].
    pub fn read_steps<R: BufRead>(r: R) -> Result<Vec<StepRecord>, LearnerError> {
        let mut out = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != STEPS_HEADER {
                    return Err(LearnerError::Parse {
                        line: 1,
                        reason: format!("expected header `{STEPS_HEADER}`"),
                    });
                }
                continue;
            }
            let bad = |reason: String| LearnerError::Parse { line: i + 1, reason };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(bad(format!("expected 6 columns, got {}", cols.len())));
            }
            let int = |c: &str| c.parse::<u64>().map_err(|e| bad(e.to_string()));
            out.push(StepRecord {
                t: int(cols[0])?,
                state: int(cols[1])? as usize,
                action: int(cols[2])? as usize,
                reward: cols[3].parse::<f64>().map_err(|e| bad(e.to_string()))?,
                next_state: int(cols[4])? as usize,
                k: int(cols[5])?,
            });
        }
        Ok(out)
    }
}

/// What an observer sees at the start of every episode, after planning.
pub struct EpisodeStart<'a, M> {
    pub k: u64,
    pub t_k: u64,
    pub stats: &'a RunningStats,
    pub sets: &'a M,
    pub plan: &'a PlanResult,
}

/// Episode accuracy `r_max / t_k`, floored.
pub fn episode_epsilon(r_max: f64, t_k: u64) -> f64 {
    (r_max / t_k as f64).max(EPSILON_FLOOR)
}

fn run_optimistic<M, B, O>(env: &TabularMdp, cfg: &LearnerConfig, build: B, mut observer: O) -> Result<RunLog, LearnerError>
where
    M: OptimisticModel,
    B: Fn(&RunningStats) -> Result<M, LearnerError>,
    O: FnMut(&EpisodeStart<'_, M>),
{
    cfg.validate(env)?;
    let mut rng = rng::stream(cfg.seed, 0);
    let mut stats = RunningStats::for_mdp(env);
    let horizon = cfg.horizon;
    let mut steps = Vec::with_capacity(horizon as usize);
    let mut episodes = Vec::new();
    let mut state = cfg.initial_state;

    while stats.t <= horizon {
        let t_k = stats.t;
        let k = stats.k;
        let sets = build(&stats)?;
        let epsilon = episode_epsilon(env.r_max(), t_k);
        let evi_cfg = EviConfig {
            alpha: cfg.alpha,
            epsilon,
            max_iterations: cfg.evi_max_iterations,
            ..EviConfig::default()
        };
        let plan = extended_value_iteration(&sets, &evi_cfg)?;
        observer(&EpisodeStart {
            k,
            t_k,
            stats: &stats,
            sets: &sets,
            plan: &plan,
        });
        episodes.push(EpisodeRecord {
            k,
            t_k,
            gain: plan.gain,
            epsilon,
            evi_iterations: plan.iterations,
            evi_converged: plan.converged,
        });
        let policy = plan
            .policy
            .as_deterministic()
            .expect("extended value iteration yields deterministic policies");

        loop {
            let action = policy[state];
            let (reward, next) = env.step(state, action, &mut rng)?;
            steps.push(StepRecord {
                t: stats.t,
                state,
                action,
                reward,
                next_state: next,
                k,
            });
            stats.record_step(state, action, reward, next)?;
            let done = stats.doubling_reached(state, action);
            state = next;
            if done || stats.t > horizon {
                break;
            }
        }
        stats.finalize_episode();
    }
    Ok(RunLog {
        steps,
        episodes,
        seed: cfg.seed,
        config: cfg.clone(),
    })
}

/// UCRL2B with empirical Bernstein confidence sets.
pub fn run_ucrl2b(env: &TabularMdp, cfg: &LearnerConfig) -> Result<RunLog, LearnerError> {
    run_ucrl2b_observed(env, cfg, |_| {})
}

/// [`run_ucrl2b`] calling `observer` at every episode start.
pub fn run_ucrl2b_observed<O>(env: &TabularMdp, cfg: &LearnerConfig, observer: O) -> Result<RunLog, LearnerError>
where
    O: FnMut(&EpisodeStart<'_, ConfidenceSets>),
{
    let mut cfg = cfg.clone();
    cfg.algorithm = Algorithm::Ucrl2b;
    let (delta, scale) = (cfg.delta, cfg.radius_scale);
    run_optimistic(
        env,
        &cfg,
        |stats| Ok(ConfidenceSets::build_scaled(stats, delta, scale)?),
        observer,
    )
}

/// UCRL2 with Hoeffding reward intervals and L1 transition balls.
pub fn run_ucrl2_hoeffding(env: &TabularMdp, cfg: &LearnerConfig) -> Result<RunLog, LearnerError> {
    let mut cfg = cfg.clone();
    cfg.algorithm = Algorithm::Ucrl2Hoeffding;
    let (delta, scale) = (cfg.delta, cfg.radius_scale);
    run_optimistic(
        env,
        &cfg,
        |stats| Ok(HoeffdingSets::build(stats, delta, scale)?),
        |_: &EpisodeStart<'_, HoeffdingSets>| {},
    )
}

/// Follows `policy` for `horizon` steps from state 0 without learning. Every
/// step belongs to episode 1 and no episode records are emitted.
pub fn run_fixed_policy(env: &TabularMdp, policy: &Policy, horizon: u64, seed: u64) -> Result<RunLog, LearnerError> {
    let cfg = LearnerConfig {
        horizon,
        seed,
        algorithm: Algorithm::FixedPolicy,
        ..LearnerConfig::default()
    };
    run_fixed_policy_with(env, policy, &cfg)
}

pub fn run_fixed_policy_with(env: &TabularMdp, policy: &Policy, cfg: &LearnerConfig) -> Result<RunLog, LearnerError> {
    policy.validate(env.num_states(), env.num_actions())?;
    if cfg.initial_state >= env.num_states() {
        return Err(LearnerError::Config(format!("initial state {} out of range", cfg.initial_state)));
    }
    let mut rng = rng::stream(cfg.seed, 0);
    let mut steps = Vec::with_capacity(cfg.horizon as usize);
    let mut state = cfg.initial_state;
    for t in 1..=cfg.horizon {
        let action = policy.sample(state, &mut rng);
        let (reward, next) = env.step(state, action, &mut rng)?;
        steps.push(StepRecord {
            t,
            state,
            action,
            reward,
            next_state: next,
            k: 1,
        });
        state = next;
    }
    let mut cfg = cfg.clone();
    cfg.algorithm = Algorithm::FixedPolicy;
    Ok(RunLog {
        steps,
        episodes: Vec::new(),
        seed: cfg.seed,
        config: cfg,
    })
}

/// Dispatches on `cfg.algorithm`. `policy` is required for the fixed-policy
/// baseline and ignored otherwise.
pub fn run(env: &TabularMdp, cfg: &LearnerConfig, policy: Option<&Policy>) -> Result<RunLog, LearnerError> {
    match cfg.algorithm {
        Algorithm::Ucrl2b => run_ucrl2b(env, cfg),
        Algorithm::Ucrl2Hoeffding => run_ucrl2_hoeffding(env, cfg),
        Algorithm::FixedPolicy => {
            let policy = policy.ok_or_else(|| LearnerError::Config("fixed-policy run needs a policy".into()))?;
            run_fixed_policy_with(env, policy, cfg)
        }
    }
}
