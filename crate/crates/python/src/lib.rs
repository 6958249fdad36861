//! Python bindings: environments, planners, learners and regret helpers.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ucrl2b::bench::{compute_regret, geometric_grid};
use ucrl2b::evi::{self, EviConfig};
use ucrl2b::learner::{self, Algorithm, LearnerConfig};
use ucrl2b::mdp::{self, EnvironmentSpec, Policy, RewardKind, TabularMdp};
use ucrl2b::rng::{self, SimRng};
use ucrl2b::solver;
use ucrl2b::stats;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A tabular MDP with a uniform action set.
#[pyclass(name = "Mdp", module = "ucrl2b_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMdp {
    inner: TabularMdp,
}

#[pymethods]
impl PyMdp {
    /// `transition` is the flattened `(s, a, s')` tensor, `reward_mean` the
    /// flattened `(s, a)` matrix.
    #[new]
    #[pyo3(signature = (num_states, num_actions, transition, reward_mean, r_max=1.0, reward_kind="bernoulli-scaled"))]
    fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        reward_mean: Vec<f64>,
        r_max: f64,
        reward_kind: &str,
    ) -> PyResult<Self> {
        let kind: RewardKind = reward_kind.parse().map_err(value_err)?;
        let inner = TabularMdp::new(num_states, num_actions, transition, reward_mean, kind, r_max).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn riverswim(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: mdp::riverswim(n).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn two_state_cycle() -> PyResult<Self> {
        Ok(Self {
            inner: mdp::two_state_cycle().map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn random_communicating(states: usize, actions: usize, gamma: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: mdp::random_communicating(states, actions, gamma, seed).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn bandit(means: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: mdp::bandit(&means).map_err(value_err)?,
        })
    }

    /// Compact spec such as `riverswim(6)` or `random-communicating(5,2,3,7)`.
    #[staticmethod]
    fn from_spec(spec: &str) -> PyResult<Self> {
        let spec: EnvironmentSpec = spec.parse().map_err(value_err)?;
        Ok(Self {
            inner: mdp::build_environment(&spec).map_err(value_err)?,
        })
    }

    fn with_reward_kind(&self, kind: &str) -> PyResult<Self> {
        let kind: RewardKind = kind.parse().map_err(value_err)?;
        Ok(Self {
            inner: self.inner.clone().with_reward_kind(kind),
        })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn num_actions(&self) -> usize {
        self.inner.num_actions()
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.inner.r_max()
    }

    fn transition_row(&self, s: usize, a: usize) -> PyResult<Vec<f64>> {
        self.check(s, a)?;
        Ok(self.inner.transition_row(s, a).to_vec())
    }

    fn reward_mean(&self, s: usize, a: usize) -> PyResult<f64> {
        self.check(s, a)?;
        Ok(self.inner.reward_mean(s, a))
    }

    /// Violations as human-readable strings; empty when valid.
    fn validate(&self) -> Vec<String> {
        mdp::validate_mdp(&self.inner).violations.iter().map(|v| v.to_string()).collect()
    }

    fn is_communicating(&self) -> bool {
        self.inner.is_communicating()
    }

    /// `(Γ(s,a) flattened over (s, a), Γ)`.
    fn support_profile(&self) -> (Vec<usize>, usize) {
        let p = mdp::support_profile(&self.inner);
        (p.gamma, p.gamma_max)
    }

    /// Samples `(reward, next_state)`.
    fn step(&self, s: usize, a: usize, rng: &mut PyRng) -> PyResult<(f64, usize)> {
        self.inner.step(s, a, &mut rng.inner).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mdp(num_states={}, num_actions={}, r_max={})",
            self.inner.num_states(),
            self.inner.num_actions(),
            self.inner.r_max()
        )
    }
}

impl PyMdp {
    fn check(&self, s: usize, a: usize) -> PyResult<()> {
        if s >= self.inner.num_states() || a >= self.inner.num_actions() {
            return Err(value_err(format!("({s},{a}) out of range")));
        }
        Ok(())
    }
}

/// Seeded random stream for [`PyMdp::step`].
#[pyclass(name = "Rng", module = "ucrl2b_py")]
struct PyRng {
    inner: SimRng,
}

#[pymethods]
impl PyRng {
    #[new]
    #[pyo3(signature = (seed, stream=0))]
    fn new(seed: u64, stream: u64) -> Self {
        Self {
            inner: rng::stream(seed, stream),
        }
    }
}

/// Visit counts, empirical estimates and variances of one learner.
#[pyclass(name = "RunningStats", module = "ucrl2b_py")]
struct PyRunningStats {
    inner: stats::RunningStats,
}

#[pymethods]
impl PyRunningStats {
    #[new]
    #[pyo3(signature = (num_states, num_actions, r_max=1.0))]
    fn new(num_states: usize, num_actions: usize, r_max: f64) -> Self {
        Self {
            inner: stats::RunningStats::new(num_states, num_actions, r_max),
        }
    }

    fn record_step(&mut self, s: usize, a: usize, reward: f64, next_state: usize) -> PyResult<()> {
        self.inner.record_step(s, a, reward, next_state).map_err(value_err)
    }

    fn finalize_episode(&mut self) {
        self.inner.finalize_episode();
    }

    fn visits(&self, s: usize, a: usize) -> u64 {
        self.inner.visits(s, a)
    }

    #[getter]
    fn p_hat(&self) -> Vec<f64> {
        self.inner.p_hat.clone()
    }

    #[getter]
    fn r_hat(&self) -> Vec<f64> {
        self.inner.r_hat.clone()
    }

    #[getter]
    fn var_r(&self) -> Vec<f64> {
        self.inner.var_r.clone()
    }

    #[getter]
    fn t(&self) -> u64 {
        self.inner.t
    }

    #[getter]
    fn k(&self) -> u64 {
        self.inner.k
    }

    fn bernstein_radius_p(&self, s: usize, a: usize, next_state: usize, delta: f64) -> PyResult<f64> {
        self.inner.bernstein_radius_p(s, a, next_state, delta).map_err(value_err)
    }

    fn bernstein_radius_r(&self, s: usize, a: usize, delta: f64) -> PyResult<f64> {
        self.inner.bernstein_radius_r(s, a, delta).map_err(value_err)
    }

    fn confidence_sets(&self, delta: f64) -> PyResult<PyConfidenceSets> {
        Ok(PyConfidenceSets {
            inner: stats::ConfidenceSets::build(&self.inner, delta).map_err(value_err)?,
        })
    }
}

/// `(gain, bias, policy, iterations, converged)`.
type PlanTuple = (f64, Vec<f64>, Vec<usize>, usize, bool);

/// Plausible rewards and transition boxes for one episode.
#[pyclass(name = "ConfidenceSets", module = "ucrl2b_py", frozen)]
struct PyConfidenceSets {
    inner: stats::ConfidenceSets,
}

#[pymethods]
impl PyConfidenceSets {
    /// Zero-width sets around a known MDP.
    #[staticmethod]
    fn point(mdp: &PyMdp) -> Self {
        Self {
            inner: stats::ConfidenceSets::point(&mdp.inner),
        }
    }

    #[staticmethod]
    fn vacuous(num_states: usize, num_actions: usize, r_max: f64) -> Self {
        Self {
            inner: stats::ConfidenceSets::vacuous(num_states, num_actions, r_max),
        }
    }

    #[getter]
    fn p_low(&self) -> Vec<f64> {
        self.inner.p_low.clone()
    }

    #[getter]
    fn p_high(&self) -> Vec<f64> {
        self.inner.p_high.clone()
    }

    #[getter]
    fn r_low(&self) -> Vec<f64> {
        self.inner.r_low.clone()
    }

    #[getter]
    fn r_high(&self) -> Vec<f64> {
        self.inner.r_high.clone()
    }

    fn contains(&self, mdp: &PyMdp) -> bool {
        self.inner.contains(&mdp.inner)
    }

    /// Extended value iteration.
    #[pyo3(signature = (epsilon, alpha=0.9, max_iterations=1_000_000))]
    fn plan(&self, epsilon: f64, alpha: f64, max_iterations: usize) -> PyResult<PlanTuple> {
        let cfg = EviConfig {
            alpha,
            epsilon,
            reference_state: 0,
            max_iterations,
        };
        let plan = evi::extended_value_iteration(&self.inner, &cfg).map_err(value_err)?;
        let policy = plan.policy.as_deterministic().map(<[usize]>::to_vec).unwrap_or_default();
        Ok((plan.gain, plan.bias, policy, plan.iterations, plan.converged))
    }
}

/// Trajectory and episode metadata of one run.
#[pyclass(name = "RunLog", module = "ucrl2b_py", frozen)]
struct PyRunLog {
    inner: learner::RunLog,
}

#[pymethods]
impl PyRunLog {
    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }

    #[getter]
    fn algorithm(&self) -> String {
        self.inner.config.algorithm.to_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn states(&self) -> Vec<usize> {
        self.inner.steps.iter().map(|s| s.state).collect()
    }

    #[getter]
    fn actions(&self) -> Vec<usize> {
        self.inner.steps.iter().map(|s| s.action).collect()
    }

    #[getter]
    fn rewards(&self) -> Vec<f64> {
        self.inner.rewards().collect()
    }

    #[getter]
    fn next_states(&self) -> Vec<usize> {
        self.inner.steps.iter().map(|s| s.next_state).collect()
    }

    /// Episode index of every step.
    #[getter]
    fn episode_indices(&self) -> Vec<u64> {
        self.inner.steps.iter().map(|s| s.k).collect()
    }

    #[getter]
    fn episode_starts(&self) -> Vec<u64> {
        self.inner.episodes.iter().map(|e| e.t_k).collect()
    }

    #[getter]
    fn episode_gains(&self) -> Vec<f64> {
        self.inner.episodes.iter().map(|e| e.gain).collect()
    }

    fn total_reward(&self) -> f64 {
        self.inner.total_reward()
    }

    /// Cumulative regret against `g_star` at `grid` (default: powers of two plus the horizon).
    #[pyo3(signature = (g_star, grid=None))]
    fn regret(&self, g_star: f64, grid: Option<Vec<u64>>) -> PyResult<Vec<(u64, f64)>> {
        let grid = grid.unwrap_or_else(|| geometric_grid(self.inner.steps.len() as u64));
        let truth = solver::GroundTruth {
            g_star,
            h_star: Vec::new(),
            span_h: 0.0,
            diameter: 0.0,
            gamma_profile: mdp::SupportProfile {
                num_actions: 0,
                gamma: Vec::new(),
                gamma_max: 0,
            },
            optimal_policy: Vec::new(),
            tol: 0.0,
        };
        let series = compute_regret(&self.inner, &truth, &grid).map_err(value_err)?;
        Ok(series.points.iter().map(|p| (p.t, p.regret)).collect())
    }
}

fn learner_config(algorithm: Algorithm, horizon: u64, delta: f64, seed: u64, alpha: f64) -> LearnerConfig {
    LearnerConfig {
        alpha,
        ..LearnerConfig::new(algorithm, horizon, delta, seed)
    }
}

#[pyfunction]
#[pyo3(signature = (mdp, horizon, delta=0.05, seed=0, alpha=0.9))]
fn run_ucrl2b(py: Python<'_>, mdp: &PyMdp, horizon: u64, delta: f64, seed: u64, alpha: f64) -> PyResult<PyRunLog> {
    let cfg = learner_config(Algorithm::Ucrl2b, horizon, delta, seed, alpha);
    let inner = py.detach(|| learner::run_ucrl2b(&mdp.inner, &cfg)).map_err(value_err)?;
    Ok(PyRunLog { inner })
}

#[pyfunction]
#[pyo3(signature = (mdp, horizon, delta=0.05, seed=0, alpha=0.9))]
fn run_ucrl2_hoeffding(py: Python<'_>, mdp: &PyMdp, horizon: u64, delta: f64, seed: u64, alpha: f64) -> PyResult<PyRunLog> {
    let cfg = learner_config(Algorithm::Ucrl2Hoeffding, horizon, delta, seed, alpha);
    let inner = py
        .detach(|| learner::run_ucrl2_hoeffding(&mdp.inner, &cfg))
        .map_err(value_err)?;
    Ok(PyRunLog { inner })
}

#[pyfunction]
#[pyo3(signature = (mdp, policy, horizon, seed=0))]
fn run_fixed_policy(mdp: &PyMdp, policy: Vec<usize>, horizon: u64, seed: u64) -> PyResult<PyRunLog> {
    let inner = learner::run_fixed_policy(&mdp.inner, &Policy::Deterministic(policy), horizon, seed).map_err(value_err)?;
    Ok(PyRunLog { inner })
}

/// `(g*, h*)` with `h*(0) = 0`.
#[pyfunction]
#[pyo3(signature = (mdp, tol=1e-10))]
fn solve_gain_bias(mdp: &PyMdp, tol: f64) -> PyResult<(f64, Vec<f64>)> {
    solver::solve_gain_bias(&mdp.inner, tol).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (mdp, tol=1e-10))]
fn diameter(mdp: &PyMdp, tol: f64) -> PyResult<f64> {
    solver::diameter(&mdp.inner, tol).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (mdp, policy, tol=1e-10))]
fn policy_gain(mdp: &PyMdp, policy: Vec<usize>, tol: f64) -> PyResult<f64> {
    solver::policy_gain(&mdp.inner, &Policy::Deterministic(policy), tol).map_err(value_err)
}

/// Ground truth as a JSON string.
#[pyfunction]
#[pyo3(signature = (mdp, tol=1e-10))]
fn ground_truth_json(mdp: &PyMdp, tol: f64) -> PyResult<String> {
    let gt = solver::ground_truth(&mdp.inner, tol).map_err(value_err)?;
    serde_json::to_string(&gt).map_err(value_err)
}

#[pyfunction]
fn span(v: Vec<f64>) -> f64 {
    solver::span(&v)
}

#[pyfunction]
fn inner_max_transition(low: Vec<f64>, high: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
    evi::inner_max_transition(&low, &high, &v).map_err(value_err)
}

#[pyfunction]
fn bernstein_radius(variance: f64, value_range: f64, visits: u64, num_pairs: usize, delta: f64) -> f64 {
    stats::bernstein_radius(variance, value_range, visits, num_pairs, delta)
}

#[pymodule]
fn ucrl2b_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMdp>()?;
    m.add_class::<PyRng>()?;
    m.add_class::<PyRunningStats>()?;
    m.add_class::<PyConfidenceSets>()?;
    m.add_class::<PyRunLog>()?;
    m.add_function(wrap_pyfunction!(run_ucrl2b, m)?)?;
    m.add_function(wrap_pyfunction!(run_ucrl2_hoeffding, m)?)?;
    m.add_function(wrap_pyfunction!(run_fixed_policy, m)?)?;
    m.add_function(wrap_pyfunction!(solve_gain_bias, m)?)?;
    m.add_function(wrap_pyfunction!(diameter, m)?)?;
    m.add_function(wrap_pyfunction!(policy_gain, m)?)?;
    m.add_function(wrap_pyfunction!(ground_truth_json, m)?)?;
    m.add_function(wrap_pyfunction!(span, m)?)?;
    m.add_function(wrap_pyfunction!(inner_max_transition, m)?)?;
    m.add_function(wrap_pyfunction!(bernstein_radius, m)?)?;
    Ok(())
}
