//! Tabular MDP model, benchmark environment constructors and the sampling
//! interface consumed by the learners.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SimRng;

/// Row sums must match 1 to this precision.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Default small reward of the "left" action in the first RiverSwim state.
pub const RIVERSWIM_LEFT_REWARD: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("state {state} out of range (S = {num_states})")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("action {action} out of range (A = {num_actions})")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("tensor shape mismatch: {0}")]
    Shape(String),
    #[error("could not draw a communicating MDP after {0} attempts")]
    NotCommunicating(usize),
}

fn invalid(name: &str, reason: impl Into<String>) -> MdpError {
    MdpError::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Distribution family of the rewards. Both have mean `r(s,a)` and support
/// inside `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// `r_max * Bernoulli(r(s,a) / r_max)`.
    #[default]
    BernoulliScaled,
    Deterministic,
}

impl FromStr for RewardKind {
    type Err = MdpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bernoulli-scaled" | "bernoulli" => Ok(RewardKind::BernoulliScaled),
            "deterministic" => Ok(RewardKind::Deterministic),
            other => Err(invalid("reward_kind", format!("unknown reward kind `{other}`"))),
        }
    }
}

/// A finite MDP with a uniform action set. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    /// Row-major `(s, a, s')`.
    transition: Vec<f64>,
    /// Row-major `(s, a)`.
    reward_mean: Vec<f64>,
    reward_kind: RewardKind,
    r_max: f64,
}

impl TabularMdp {
    /// Builds an MDP from raw tensors. Only the shapes are checked here; use
    /// [`validate_mdp`] for the probabilistic invariants.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        reward_mean: Vec<f64>,
        reward_kind: RewardKind,
        r_max: f64,
    ) -> Result<Self, MdpError> {
        if num_states == 0 {
            return Err(invalid("num_states", "must be positive"));
        }
        if num_actions == 0 {
            return Err(invalid("num_actions", "must be positive"));
        }
        if transition.len() != num_states * num_actions * num_states {
            return Err(MdpError::Shape(format!(
                "transition has {} entries, expected S*A*S = {}",
                transition.len(),
                num_states * num_actions * num_states
            )));
        }
        if reward_mean.len() != num_states * num_actions {
            return Err(MdpError::Shape(format!(
                "reward_mean has {} entries, expected S*A = {}",
                reward_mean.len(),
                num_states * num_actions
            )));
        }
        Ok(Self {
            num_states,
            num_actions,
            transition,
            reward_mean,
            reward_kind,
            r_max,
        })
    }

    /// Same as [`TabularMdp::new`] but rejects models that fail validation.
    pub fn new_validated(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        reward_mean: Vec<f64>,
        reward_kind: RewardKind,
        r_max: f64,
    ) -> Result<Self, MdpError> {
        let mdp = Self::new(num_states, num_actions, transition, reward_mean, reward_kind, r_max)?;
        let report = validate_mdp(&mdp);
        if !report.ok {
            return Err(invalid("mdp", report.to_string()));
        }
        Ok(mdp)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_pairs(&self) -> usize {
        self.num_states * self.num_actions
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    pub fn with_reward_kind(mut self, kind: RewardKind) -> Self {
        self.reward_kind = kind;
        self
    }

    #[inline]
    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    /// `p(·|s,a)`.
    #[inline]
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.pair_index(s, a) * self.num_states;
        &self.transition[start..start + self.num_states]
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.transition_row(s, a)[next]
    }

    #[inline]
    pub fn reward_mean(&self, s: usize, a: usize) -> f64 {
        self.reward_mean[self.pair_index(s, a)]
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transition
    }

    pub fn reward_means(&self) -> &[f64] {
        &self.reward_mean
    }

    fn check_indices(&self, s: usize, a: usize) -> Result<(), MdpError> {
        if s >= self.num_states {
            return Err(MdpError::StateOutOfRange {
                state: s,
                num_states: self.num_states,
            });
        }
        if a >= self.num_actions {
            return Err(MdpError::ActionOutOfRange {
                action: a,
                num_actions: self.num_actions,
            });
        }
        Ok(())
    }

    /// Samples one transition. See [`step`].
    pub fn step<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Result<(f64, usize), MdpError> {
        self.check_indices(s, a)?;
        let mean = self.reward_mean(s, a);
        let reward = match self.reward_kind {
            RewardKind::Deterministic => mean,
            RewardKind::BernoulliScaled => {
                let u: f64 = rng.random();
                if self.r_max > 0.0 && u < mean / self.r_max {
                    self.r_max
                } else {
                    0.0
                }
            }
        };
        let row = self.transition_row(s, a);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = None;
        for (x, &p) in row.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            next = Some(x);
            if u < acc {
                break;
            }
        }
        // Rounding can leave `acc` a hair below 1; fall back to the last supported state.
        let next = next.ok_or_else(|| invalid("transition", format!("row ({s},{a}) has no support")))?;
        Ok((reward, next))
    }

    /// True iff every state reaches every other state on the union graph of
    /// all action supports.
    pub fn is_communicating(&self) -> bool {
        let n = self.num_states;
        let mut adjacency = vec![Vec::new(); n];
        for s in 0..n {
            for a in 0..self.num_actions {
                for (x, &p) in self.transition_row(s, a).iter().enumerate() {
                    if p > 0.0 && !adjacency[s].contains(&x) {
                        adjacency[s].push(x);
                    }
                }
            }
        }
        (0..n).all(|start| {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &x in &adjacency[u] {
                    if !seen[x] {
                        seen[x] = true;
                        queue.push_back(x);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        })
    }
}

/// Samples `(reward, next_state)` from `mdp` at `(s, a)`.
pub fn step<R: Rng + ?Sized>(mdp: &TabularMdp, s: usize, a: usize, rng: &mut R) -> Result<(f64, usize), MdpError> {
    mdp.step(s, a, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    RowSum { state: usize, action: usize, sum: f64 },
    ProbabilityRange { state: usize, action: usize, next: usize, value: f64 },
    RewardRange { state: usize, action: usize, value: f64 },
    RewardBound { r_max: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { state, action, sum } => {
                write!(f, "row ({state},{action}) sums to {sum}")
            }
            Violation::ProbabilityRange { state, action, next, value } => {
                write!(f, "p({next}|{state},{action}) = {value} outside [0,1]")
            }
            Violation::RewardRange { state, action, value } => {
                write!(f, "r({state},{action}) = {value} outside [0, r_max]")
            }
            Violation::RewardBound { r_max } => write!(f, "r_max = {r_max} is not a positive real"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks the probabilistic invariants. Violations are reported, not raised.
pub fn validate_mdp(mdp: &TabularMdp) -> ValidationReport {
    let mut violations = Vec::new();
    if !(mdp.r_max.is_finite() && mdp.r_max > 0.0) {
        violations.push(Violation::RewardBound { r_max: mdp.r_max });
    }
    for s in 0..mdp.num_states {
        for a in 0..mdp.num_actions {
            let row = mdp.transition_row(s, a);
            for (next, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    violations.push(Violation::ProbabilityRange { state: s, action: a, next, value });
                }
            }
            let sum: f64 = row.iter().sum();
            if !((sum - 1.0).abs() <= ROW_SUM_TOL) {
                violations.push(Violation::RowSum { state: s, action: a, sum });
            }
            let r = mdp.reward_mean(s, a);
            if !(r >= 0.0 && r <= mdp.r_max) {
                violations.push(Violation::RewardRange { state: s, action: a, value: r });
            }
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Support sizes `Γ(s,a)` of the transition rows and their maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportProfile {
    pub num_actions: usize,
    /// Row-major `(s, a)`.
    pub gamma: Vec<usize>,
    pub gamma_max: usize,
}

impl SupportProfile {
    pub fn get(&self, s: usize, a: usize) -> usize {
        self.gamma[s * self.num_actions + a]
    }

    pub fn total(&self) -> usize {
        self.gamma.iter().sum()
    }
}

pub fn support_profile(mdp: &TabularMdp) -> SupportProfile {
    let gamma: Vec<usize> = mdp
        .transition
        .chunks(mdp.num_states)
        .map(|row| row.iter().filter(|&&p| p > 0.0).count())
        .collect();
    let gamma_max = gamma.iter().copied().max().unwrap_or(0);
    SupportProfile {
        num_actions: mdp.num_actions,
        gamma,
        gamma_max,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("policy has {got} rows, expected {expected}")]
    Rows { got: usize, expected: usize },
    #[error("action {action} at state {state} out of range (A = {num_actions})")]
    Action { state: usize, action: usize, num_actions: usize },
    #[error("distribution at state {state} is invalid (sum {sum})")]
    Distribution { state: usize, sum: f64 },
}

/// A stationary Markov policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "table")]
pub enum Policy {
    Deterministic(Vec<usize>),
    Stochastic(Vec<Vec<f64>>),
}

impl Policy {
    pub fn num_states(&self) -> usize {
        match self {
            Policy::Deterministic(t) => t.len(),
            Policy::Stochastic(t) => t.len(),
        }
    }

    pub fn as_deterministic(&self) -> Option<&[usize]> {
        match self {
            Policy::Deterministic(t) => Some(t),
            Policy::Stochastic(_) => None,
        }
    }

    /// Probability of choosing `a` in `s`.
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        match self {
            Policy::Deterministic(t) => {
                if t[s] == a {
                    1.0
                } else {
                    0.0
                }
            }
            Policy::Stochastic(t) => t[s][a],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        match self {
            Policy::Deterministic(t) => t[s],
            Policy::Stochastic(t) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let row = &t[s];
                for (a, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return a;
                    }
                }
                row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
            }
        }
    }

    pub fn validate(&self, num_states: usize, num_actions: usize) -> Result<(), PolicyError> {
        if self.num_states() != num_states {
            return Err(PolicyError::Rows {
                got: self.num_states(),
                expected: num_states,
            });
        }
        match self {
            Policy::Deterministic(t) => {
                for (state, &action) in t.iter().enumerate() {
                    if action >= num_actions {
                        return Err(PolicyError::Action { state, action, num_actions });
                    }
                }
            }
            Policy::Stochastic(t) => {
                for (state, row) in t.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if row.len() != num_actions
                        || row.iter().any(|p| !(0.0..=1.0).contains(p))
                        || (sum - 1.0).abs() > 1e-9
                    {
                        return Err(PolicyError::Distribution { state, sum });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Names one of the built-in benchmark environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum EnvironmentSpec {
    RiverSwim { n: usize },
    TwoStateCycle,
    RandomCommunicating { states: usize, actions: usize, gamma: usize, seed: u64 },
    /// One state, one arm per action.
    Bandit { means: Vec<f64> },
}

impl EnvironmentSpec {
    /// Builds a spec from a name and a flat parameter table, as found under
    /// `env.name` / `env.params.*` / `env.seed` in experiment configs.
    pub fn from_parts(name: &str, params: &BTreeMap<String, toml::Value>, seed: Option<u64>) -> Result<Self, MdpError> {
        let get_usize = |key: &str| -> Result<usize, MdpError> {
            let v = params
                .get(key)
                .ok_or_else(|| invalid(&format!("env.params.{key}"), "missing"))?;
            v.as_integer()
                .filter(|&i| i >= 0)
                .map(|i| i as usize)
                .ok_or_else(|| invalid(&format!("env.params.{key}"), "expected a nonnegative integer"))
        };
        match name {
            "riverswim" => Ok(EnvironmentSpec::RiverSwim { n: get_usize("n")? }),
            "two-state-cycle" => Ok(EnvironmentSpec::TwoStateCycle),
            "random-communicating" => Ok(EnvironmentSpec::RandomCommunicating {
                states: get_usize("states")?,
                actions: get_usize("actions")?,
                gamma: get_usize("gamma")?,
                seed: seed.unwrap_or(0),
            }),
            "bandit" => {
                if let Some(v) = params.get("means") {
                    let arr = v
                        .as_array()
                        .ok_or_else(|| invalid("env.params.means", "expected an array of floats"))?;
                    let means = arr
                        .iter()
                        .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
                        .collect::<Option<Vec<f64>>>()
                        .ok_or_else(|| invalid("env.params.means", "expected an array of floats"))?;
                    Ok(EnvironmentSpec::Bandit { means })
                } else {
                    let arms = get_usize("arms")?;
                    Ok(EnvironmentSpec::Bandit {
                        means: default_bandit_means(arms),
                    })
                }
            }
            other => Err(MdpError::UnknownEnvironment(other.to_string())),
        }
    }
}

/// Evenly spaced arm means `(i + 1) / (A + 1)`.
pub fn default_bandit_means(arms: usize) -> Vec<f64> {
    (0..arms).map(|i| (i + 1) as f64 / (arms + 1) as f64).collect()
}

/// Parses the compact form used on the command line:
/// `riverswim(6)`, `two-state-cycle`, `random-communicating(5,2,3,7)` (S, A, Γ, seed),
/// `bandit(0.2,0.8)`.
impl FromStr for EnvironmentSpec {
    type Err = MdpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .rfind(')')
                    .filter(|&c| c > open && c == s.len() - 1)
                    .ok_or_else(|| invalid("env", format!("unbalanced parentheses in `{s}`")))?;
                let inner = &s[open + 1..close];
                let args: Vec<&str> = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
                (&s[..open], args)
            }
            None => (s, Vec::new()),
        };
        let int = |i: usize, what: &str| -> Result<u64, MdpError> {
            args.get(i)
                .ok_or_else(|| invalid(what, "missing"))?
                .trim_start_matches("seed=")
                .parse::<u64>()
                .map_err(|e| invalid(what, e.to_string()))
        };
        let expect_args = |n: usize| -> Result<(), MdpError> {
            if args.len() != n {
                return Err(invalid(name, format!("expected {n} arguments, got {}", args.len())));
            }
            Ok(())
        };
        match name {
            "riverswim" => {
                expect_args(1)?;
                Ok(EnvironmentSpec::RiverSwim { n: int(0, "n")? as usize })
            }
            "two-state-cycle" => {
                expect_args(0)?;
                Ok(EnvironmentSpec::TwoStateCycle)
            }
            "random-communicating" => {
                expect_args(4)?;
                Ok(EnvironmentSpec::RandomCommunicating {
                    states: int(0, "states")? as usize,
                    actions: int(1, "actions")? as usize,
                    gamma: int(2, "gamma")? as usize,
                    seed: int(3, "seed")?,
                })
            }
            "bandit" => {
                let means = args
                    .iter()
                    .map(|a| a.parse::<f64>().map_err(|e| invalid("means", e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(EnvironmentSpec::Bandit { means })
            }
            other => Err(MdpError::UnknownEnvironment(other.to_string())),
        }
    }
}

/// Constructs one of the benchmark environments with Bernoulli-scaled rewards
/// and `r_max = 1`.
pub fn build_environment(spec: &EnvironmentSpec) -> Result<TabularMdp, MdpError> {
    match *spec {
        EnvironmentSpec::RiverSwim { n } => riverswim(n),
        EnvironmentSpec::TwoStateCycle => two_state_cycle(),
        EnvironmentSpec::RandomCommunicating { states, actions, gamma, seed } => {
            random_communicating(states, actions, gamma, seed)
        }
        EnvironmentSpec::Bandit { ref means } => bandit(means),
    }
}

/// RiverSwim chain: action 0 (left) moves left deterministically, action 1
/// (right) swims against the current. The only rewards are `0.005` for
/// staying left in state 0 and `1` for pushing right in the last state.
pub fn riverswim(n: usize) -> Result<TabularMdp, MdpError> {
    if n < 2 {
        return Err(invalid("n", "riverswim needs at least 2 states"));
    }
    const LEFT: usize = 0;
    const RIGHT: usize = 1;
    let mut p = vec![0.0; n * 2 * n];
    let mut r = vec![0.0; n * 2];
    let idx = |s: usize, a: usize, x: usize| (s * 2 + a) * n + x;
    for s in 0..n {
        p[idx(s, LEFT, s.saturating_sub(1))] = 1.0;
        if s == 0 {
            p[idx(s, RIGHT, 0)] = 0.6;
            p[idx(s, RIGHT, 1)] = 0.4;
        } else if s == n - 1 {
            p[idx(s, RIGHT, s)] = 0.6;
            p[idx(s, RIGHT, s - 1)] = 0.4;
        } else {
            p[idx(s, RIGHT, s - 1)] = 0.05;
            p[idx(s, RIGHT, s)] = 0.6;
            p[idx(s, RIGHT, s + 1)] = 0.35;
        }
    }
    r[LEFT] = RIVERSWIM_LEFT_REWARD;
    r[(n - 1) * 2 + RIGHT] = 1.0;
    TabularMdp::new(n, 2, p, r, RewardKind::BernoulliScaled, 1.0)
}

/// Deterministic period-2 cycle with a single action; reward 0 in state 0 and
/// 1 in state 1.
pub fn two_state_cycle() -> Result<TabularMdp, MdpError> {
    TabularMdp::new(
        2,
        1,
        vec![0.0, 1.0, 1.0, 0.0],
        vec![0.0, 1.0],
        RewardKind::BernoulliScaled,
        1.0,
    )
}

/// Single-state MDP whose actions are arms with the given means.
pub fn bandit(means: &[f64]) -> Result<TabularMdp, MdpError> {
    if means.is_empty() {
        return Err(invalid("means", "bandit needs at least one arm"));
    }
    if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(invalid("means", format!("arm mean {m} outside [0,1]")));
    }
    TabularMdp::new(
        1,
        means.len(),
        vec![1.0; means.len()],
        means.to_vec(),
        RewardKind::BernoulliScaled,
        1.0,
    )
}

const MAX_REJECTIONS: usize = 1000;

/// Random MDP where each row has exactly `gamma` successors. Action 0 follows
/// a random Hamiltonian cycle so that the result is communicating; rewards
/// are uniform in `[0, 1]`.
pub fn random_communicating(states: usize, actions: usize, gamma: usize, seed: u64) -> Result<TabularMdp, MdpError> {
    if states == 0 {
        return Err(invalid("states", "must be positive"));
    }
    if actions == 0 {
        return Err(invalid("actions", "must be positive"));
    }
    if gamma == 0 || gamma > states {
        return Err(invalid("gamma", format!("must lie in [1, {states}], got {gamma}")));
    }
    let mut rng = SimRng::seed_from_u64(seed);
    for _ in 0..MAX_REJECTIONS {
        let mut cycle: Vec<usize> = (0..states).collect();
        cycle.shuffle(&mut rng);
        let mut successor = vec![0; states];
        for i in 0..states {
            successor[cycle[i]] = cycle[(i + 1) % states];
        }
        let mut p = vec![0.0; states * actions * states];
        let mut r = vec![0.0; states * actions];
        for s in 0..states {
            for a in 0..actions {
                let mut support: Vec<usize> = (0..states).collect();
                support.shuffle(&mut rng);
                support.truncate(gamma);
                if a == 0 && !support.contains(&successor[s]) {
                    support[0] = successor[s];
                }
                let weights: Vec<f64> = support.iter().map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = weights.iter().sum();
                let row = &mut p[(s * actions + a) * states..(s * actions + a + 1) * states];
                for (&x, w) in support.iter().zip(&weights) {
                    row[x] = w / total;
                }
                // Force an exact unit sum on the last supported entry.
                let last = support[support.len() - 1];
                let rest: f64 = row.iter().enumerate().filter(|&(x, _)| x != last).map(|(_, v)| v).sum();
                row[last] = 1.0 - rest;
                r[s * actions + a] = rng.random_range(0.0..=1.0);
            }
        }
        let mdp = TabularMdp::new(states, actions, p, r, RewardKind::BernoulliScaled, 1.0)?;
        if mdp.is_communicating() && validate_mdp(&mdp).ok {
            return Ok(mdp);
        }
    }
    Err(MdpError::NotCommunicating(MAX_REJECTIONS))
}
