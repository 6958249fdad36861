//! Extended value iteration: relative value iteration on the optimistic
//! (aperiodic) Bellman operator of a set of plausible MDPs.

use std::cmp::Ordering;

use thiserror::Error;

use crate::mdp::Policy;
use crate::solver::span;
use crate::stats::{ConfidenceSets, FEASIBILITY_TOL};

/// Smallest accuracy the span stopping rule is asked to resolve.
pub const EPSILON_FLOOR: f64 = 1e-12;

pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EviError {
    #[error("infeasible transition box: sum(low) = {low_sum}, sum(high) = {high_sum}")]
    InfeasibleBox { low_sum: f64, high_sum: f64 },
    #[error("infeasible confidence set at ({state},{action})")]
    InfeasibleSet { state: usize, action: usize },
    #[error("row lengths differ: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A set of plausible MDPs that the optimistic operator maximizes over.
pub trait OptimisticModel {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;

    /// Largest plausible mean reward of `(s, a)`.
    fn optimistic_reward(&self, s: usize, a: usize) -> f64;

    /// `max_p pᵀv` over the plausible transition rows of `(s, a)`. `order`
    /// lists all states by nonincreasing `v`.
    fn optimistic_expectation(&self, s: usize, a: usize, v: &[f64], order: &[usize]) -> f64;

    /// Rejects sets the operator cannot be applied to.
    fn check(&self) -> Result<(), EviError> {
        Ok(())
    }
}

/// States sorted by nonincreasing value, ties by lowest index.
pub fn descending_order(v: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..v.len());
    order.sort_by(|&x, &y| v[y].partial_cmp(&v[x]).unwrap_or(Ordering::Equal).then(x.cmp(&y)));
}

/// Greedy maximizer of `pᵀv` over `{p ∈ simplex : low ≤ p ≤ high}`, with the
/// states to fill given in `order`. Writes the maximizer into `out` and
/// returns the objective.
fn fill_box(low: &[f64], high: &[f64], v: &[f64], order: &[usize], out: &mut [f64]) -> f64 {
    out.copy_from_slice(low);
    let mut remaining = 1.0 - low.iter().sum::<f64>();
    for &x in order {
        if remaining <= 0.0 {
            break;
        }
        let add = (high[x] - low[x]).min(remaining);
        out[x] += add;
        remaining -= add;
    }
    out.iter().zip(v).map(|(p, v)| p * v).sum()
}

/// Same as [`fill_box`] without materializing the row.
#[inline]
fn box_expectation(low: &[f64], high: &[f64], v: &[f64], order: &[usize]) -> f64 {
    let mut remaining = 1.0;
    let mut value = 0.0;
    for (l, x) in low.iter().zip(v) {
        remaining -= l;
        value += l * x;
    }
    for &x in order {
        if remaining <= 0.0 {
            break;
        }
        let add = (high[x] - low[x]).min(remaining);
        value += add * v[x];
        remaining -= add;
    }
    value
}

/// Maximizes `pᵀv` over the intersection of the box `[low, high]` with the
/// probability simplex.
///
/// Starting from `low`, the free mass `1 − Σ low` is poured into states in
/// nonincreasing order of `v` (ties by lowest index), each up to its upper
/// bound.
pub fn inner_max_transition(low: &[f64], high: &[f64], v: &[f64]) -> Result<Vec<f64>, EviError> {
    if low.len() != high.len() || low.len() != v.len() {
        return Err(EviError::Shape(format!(
            "low {}, high {}, v {}",
            low.len(),
            high.len(),
            v.len()
        )));
    }
    let low_sum: f64 = low.iter().sum();
    let high_sum: f64 = high.iter().sum();
    if low_sum > 1.0 + FEASIBILITY_TOL || high_sum < 1.0 - FEASIBILITY_TOL || low.iter().zip(high).any(|(l, h)| l > h) {
        return Err(EviError::InfeasibleBox { low_sum, high_sum });
    }
    let mut order = Vec::with_capacity(v.len());
    descending_order(v, &mut order);
    let mut out = vec![0.0; v.len()];
    fill_box(low, high, v, &order, &mut out);
    Ok(out)
}

impl OptimisticModel for ConfidenceSets {
    fn num_states(&self) -> usize {
        ConfidenceSets::num_states(self)
    }

    fn num_actions(&self) -> usize {
        ConfidenceSets::num_actions(self)
    }

    #[inline]
    fn optimistic_reward(&self, s: usize, a: usize) -> f64 {
        self.r_high[self.pair(s, a)]
    }

    #[inline]
    fn optimistic_expectation(&self, s: usize, a: usize, v: &[f64], order: &[usize]) -> f64 {
        box_expectation(self.p_low_row(s, a), self.p_high_row(s, a), v, order)
    }

    fn check(&self) -> Result<(), EviError> {
        match self.infeasible_pairs().first() {
            Some(&(state, action)) => Err(EviError::InfeasibleSet { state, action }),
            None => Ok(()),
        }
    }
}

/// Reusable buffers for repeated operator applications.
#[derive(Debug, Default)]
pub struct OperatorScratch {
    order: Vec<usize>,
}

/// One application of the aperiodic optimistic operator
/// `L v(s) = max_a { r⁺(s,a) + α·max_p pᵀv } + (1 − α)·v(s)`, writing the
/// result into `out` and the greedy action (lowest index among ties) into
/// `greedy`.
pub fn apply_operator_into<M: OptimisticModel + ?Sized>(
    model: &M,
    v: &[f64],
    alpha: f64,
    scratch: &mut OperatorScratch,
    out: &mut [f64],
    greedy: &mut [usize],
) {
    descending_order(v, &mut scratch.order);
    let order = &scratch.order;
    for s in 0..model.num_states() {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0;
        for a in 0..model.num_actions() {
            let q = model.optimistic_reward(s, a) + alpha * model.optimistic_expectation(s, a, v, order);
            if q > best {
                best = q;
                best_a = a;
            }
        }
        out[s] = best + (1.0 - alpha) * v[s];
        greedy[s] = best_a;
    }
}

/// Applies the extended aperiodic operator once and returns the new values
/// together with the greedy policy.
pub fn apply_extended_operator<M: OptimisticModel + ?Sized>(
    model: &M,
    v: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, Policy), EviError> {
    if v.len() != model.num_states() {
        return Err(EviError::Shape(format!("v has {} entries for {} states", v.len(), model.num_states())));
    }
    model.check()?;
    let mut out = vec![0.0; v.len()];
    let mut greedy = vec![0; v.len()];
    apply_operator_into(model, v, alpha, &mut OperatorScratch::default(), &mut out, &mut greedy);
    Ok((out, Policy::Deterministic(greedy)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EviConfig {
    /// Aperiodicity coefficient in (0, 1].
    pub alpha: f64,
    /// Span accuracy of the stopping rule; floored at [`EPSILON_FLOOR`].
    pub epsilon: f64,
    pub reference_state: usize,
    pub max_iterations: usize,
}

impl Default for EviConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            epsilon: 1e-6,
            reference_state: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl EviConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self, num_states: usize) -> Result<(), EviError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(EviError::Config(format!("alpha = {} not in (0, 1]", self.alpha)));
        }
        if !(self.epsilon > 0.0) {
            return Err(EviError::Config(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if self.reference_state >= num_states {
            return Err(EviError::Config(format!(
                "reference state {} out of range",
                self.reference_state
            )));
        }
        Ok(())
    }
}

/// Output of (extended) value iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub gain: f64,
    pub bias: Vec<f64>,
    pub policy: Policy,
    /// Number of operator applications.
    pub iterations: usize,
    /// `sp(v_{n+1} − v_n)` at exit.
    pub final_span: f64,
    /// False when `max_iterations` was hit before the span fell below ε.
    pub converged: bool,
}

/// Relative value iteration on the optimistic operator of `model`.
///
/// Starts from `v = 0`, shifts the iterate by its value at the reference
/// state before every application, and stops once `sp(v_{n+1} − v_n) ≤ ε`.
/// The gain is the midpoint of the last difference vector, the bias is the
/// last shifted iterate and the policy is the last greedy policy. Hitting
/// `max_iterations` returns the best-so-far values with `converged = false`.
pub fn extended_value_iteration<M: OptimisticModel + ?Sized>(model: &M, cfg: &EviConfig) -> Result<PlanResult, EviError> {
    let n = model.num_states();
    cfg.validate(n)?;
    model.check()?;
    let epsilon = cfg.epsilon.max(EPSILON_FLOOR);
    let mut scratch = OperatorScratch::default();
    let mut prev = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut greedy = vec![0; n];
    let mut diff = vec![0.0; n];
    apply_operator_into(model, &prev, cfg.alpha, &mut scratch, &mut next, &mut greedy);
    let mut iterations = 1;
    loop {
        for ((d, x), p) in diff.iter_mut().zip(&next).zip(&prev) {
            *d = x - p;
        }
        let sp = span(&diff);
        if sp <= epsilon || iterations >= cfg.max_iterations {
            let (lo, hi) = min_max(&diff);
            return Ok(PlanResult {
                gain: 0.5 * (hi + lo),
                bias: prev,
                policy: Policy::Deterministic(greedy),
                iterations,
                final_span: sp,
                converged: sp <= epsilon,
            });
        }
        let shift = next[cfg.reference_state];
        for (p, x) in prev.iter_mut().zip(&next) {
            *p = x - shift;
        }
        apply_operator_into(model, &prev, cfg.alpha, &mut scratch, &mut next, &mut greedy);
        iterations += 1;
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{two_state_cycle, TabularMdp};

    #[test]
    fn point_box_returns_point() {
        let p = [0.2, 0.5, 0.3];
        let out = inner_max_transition(&p, &p, &[1.0, -2.0, 5.0]).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn greedy_fill_example() {
        let low = [0.1, 0.2, 0.1];
        let high = [0.7, 0.6, 0.5];
        let v = [3.0, 1.0, 0.0];
        let out = inner_max_transition(&low, &high, &v).unwrap();
        let expected = [0.7, 0.2, 0.1];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-15);
        }
        let obj: f64 = out.iter().zip(v).map(|(p, v)| p * v).sum();
        assert!((obj - 2.3).abs() < 1e-12);
    }

    #[test]
    fn vacuous_box_puts_mass_on_argmax() {
        let out = inner_max_transition(&[0.0; 4], &[1.0; 4], &[0.0, 2.0, 1.0, 2.0]).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn infeasible_box_is_rejected() {
        assert!(matches!(
            inner_max_transition(&[0.6, 0.6], &[1.0, 1.0], &[0.0, 0.0]),
            Err(EviError::InfeasibleBox { .. })
        ));
        assert!(matches!(
            inner_max_transition(&[0.0, 0.0], &[0.4, 0.4], &[0.0, 0.0]),
            Err(EviError::InfeasibleBox { .. })
        ));
    }

    #[test]
    fn operator_on_known_cycle() {
        let sets = ConfidenceSets::point(&two_state_cycle().unwrap());
        for alpha in [1.0, 0.9] {
            let (v, pi) = apply_extended_operator(&sets, &[0.0, 0.0], alpha).unwrap();
            assert_eq!(v, vec![0.0, 1.0]);
            assert_eq!(pi, Policy::Deterministic(vec![0, 0]));
        }
    }

    #[test]
    fn operator_saturates_on_vacuous_sets() {
        let sets = ConfidenceSets::vacuous(3, 2, 1.0);
        let (v, _) = apply_extended_operator(&sets, &[0.0; 3], 0.9).unwrap();
        assert_eq!(v, vec![1.0; 3]);
    }

    #[test]
    fn evi_gain_on_cycle() {
        let sets = ConfidenceSets::point(&two_state_cycle().unwrap());
        let plan = extended_value_iteration(&sets, &EviConfig::with_epsilon(1e-8)).unwrap();
        assert!(plan.converged);
        assert!((plan.gain - 0.5).abs() <= 0.5e-8, "{}", plan.gain);
        assert!(plan.final_span <= 1e-8);
    }

    #[test]
    fn evi_gain_on_vacuous_sets_is_r_max() {
        let sets = ConfidenceSets::vacuous(4, 2, 1.0);
        let plan = extended_value_iteration(&sets, &EviConfig::with_epsilon(1e-8)).unwrap();
        assert!((plan.gain - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_degraded_result() {
        // alpha = 1 on a period-2 cycle never settles.
        let sets = ConfidenceSets::point(&two_state_cycle().unwrap());
        let cfg = EviConfig {
            alpha: 1.0,
            epsilon: 1e-8,
            reference_state: 0,
            max_iterations: 50,
        };
        let plan = extended_value_iteration(&sets, &cfg).unwrap();
        assert!(!plan.converged);
        assert_eq!(plan.iterations, 50);
    }

    #[test]
    fn config_validation() {
        let sets = ConfidenceSets::vacuous(2, 1, 1.0);
        let bad = EviConfig {
            alpha: 0.0,
            ..EviConfig::default()
        };
        assert!(matches!(extended_value_iteration(&sets, &bad), Err(EviError::Config(_))));
        let bad = EviConfig {
            reference_state: 2,
            ..EviConfig::default()
        };
        assert!(matches!(extended_value_iteration(&sets, &bad), Err(EviError::Config(_))));
    }

    #[test]
    fn infeasible_sets_are_rejected() {
        let mdp = TabularMdp::new(2, 1, vec![0.5, 0.5, 0.5, 0.5], vec![0.0, 0.0], Default::default(), 1.0).unwrap();
        let mut sets = ConfidenceSets::point(&mdp);
        sets.p_high[0] = 0.1;
        sets.p_low[0] = 0.1;
        assert!(matches!(
            extended_value_iteration(&sets, &EviConfig::default()),
            Err(EviError::InfeasibleSet { state: 0, action: 0 })
        ));
    }
}
