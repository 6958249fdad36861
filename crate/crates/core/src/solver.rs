//! Ground-truth quantities of a known MDP: optimal gain and bias, diameter,
//! and the gain of a fixed policy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evi::min_max;
use crate::mdp::{support_profile, Policy, PolicyError, SupportProfile, TabularMdp};

/// Aperiodicity coefficient used by the relative value iteration solvers.
pub const SOLVER_ALPHA: f64 = 0.9;
pub const SOLVER_MAX_ITERATIONS: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("relative value iteration did not reach span {tol} within {iterations} iterations (span {span})")]
    NotConverged { iterations: usize, span: f64, tol: f64 },
    #[error("hitting time to state {target} diverges (MDP is not communicating)")]
    Unreachable { target: usize },
    #[error("policy gain is not a constant after {iterations} iterations (span {span}); the chain is multichain")]
    Multichain { iterations: usize, span: f64 },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// `max(v) − min(v)`; 0 for an empty vector.
pub fn span(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

fn check_tol(tol: f64) -> Result<(), SolverError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(SolverError::Tolerance(tol))
    }
}

/// Optimal gain and bias of `mdp`.
///
/// Relative value iteration on `α·L + (1 − α)·I` with α = 0.9, stopped when
/// the span of successive differences is below `tol`. The bias is rescaled
/// to the untransformed MDP and normalized so that `h(0) = 0`.
pub fn solve_gain_bias(mdp: &TabularMdp, tol: f64) -> Result<(f64, Vec<f64>), SolverError> {
    let (g, h, _) = solve_with_policy(mdp, tol)?;
    Ok((g, h))
}

/// Like [`solve_gain_bias`], also returning a greedy optimal policy.
pub fn solve_with_policy(mdp: &TabularMdp, tol: f64) -> Result<(f64, Vec<f64>, Vec<usize>), SolverError> {
    check_tol(tol)?;
    let n = mdp.num_states();
    let alpha = SOLVER_ALPHA;
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut policy = vec![0; n];
    let mut iteration = 0;
    loop {
        iteration += 1;
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..mdp.num_actions() {
                let ev: f64 = mdp.transition_row(s, a).iter().zip(&v).map(|(p, x)| p * x).sum();
                let q = mdp.reward_mean(s, a) + alpha * ev;
                if q > best {
                    best = q;
                    policy[s] = a;
                }
            }
            next[s] = best + (1.0 - alpha) * v[s];
        }
        let diff: Vec<f64> = next.iter().zip(&v).map(|(x, y)| x - y).collect();
        let sp = span(&diff);
        if sp <= tol {
            let (lo, hi) = min_max(&diff);
            let h = v.iter().map(|x| alpha * (x - v[0])).collect();
            return Ok((0.5 * (lo + hi), h, policy));
        }
        if iteration == SOLVER_MAX_ITERATIONS {
            return Err(SolverError::NotConverged { iterations: iteration, span: sp, tol });
        }
        let shift = next[0];
        for (x, y) in v.iter_mut().zip(&next) {
            *x = y - shift;
        }
    }
}

/// Gain of the Markov chain induced by `policy`, by relative value iteration
/// on the fixed-policy operator. Multichain policies, whose gain is not a
/// constant, are reported as [`SolverError::Multichain`].
pub fn policy_gain(mdp: &TabularMdp, policy: &Policy, tol: f64) -> Result<f64, SolverError> {
    policy_gain_capped(mdp, policy, tol, SOLVER_MAX_ITERATIONS)
}

pub fn policy_gain_capped(mdp: &TabularMdp, policy: &Policy, tol: f64, max_iterations: usize) -> Result<f64, SolverError> {
    check_tol(tol)?;
    policy.validate(mdp.num_states(), mdp.num_actions())?;
    let n = mdp.num_states();
    let alpha = SOLVER_ALPHA;
    // Induced chain and reward vector.
    let mut chain = vec![0.0; n * n];
    let mut reward = vec![0.0; n];
    for s in 0..n {
        for a in 0..mdp.num_actions() {
            let w = policy.prob(s, a);
            if w == 0.0 {
                continue;
            }
            reward[s] += w * mdp.reward_mean(s, a);
            for (c, p) in chain[s * n..(s + 1) * n].iter_mut().zip(mdp.transition_row(s, a)) {
                *c += w * p;
            }
        }
    }
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut sp = f64::INFINITY;
    for _ in 0..max_iterations {
        for s in 0..n {
            let ev: f64 = chain[s * n..(s + 1) * n].iter().zip(&v).map(|(p, x)| p * x).sum();
            next[s] = reward[s] + alpha * ev + (1.0 - alpha) * v[s];
        }
        let diff: Vec<f64> = next.iter().zip(&v).map(|(x, y)| x - y).collect();
        sp = span(&diff);
        if sp <= tol {
            let (lo, hi) = min_max(&diff);
            return Ok(0.5 * (lo + hi));
        }
        let shift = next[0];
        for (x, y) in v.iter_mut().zip(&next) {
            *x = y - shift;
        }
    }
    Err(SolverError::Multichain {
        iterations: max_iterations,
        span: sp,
    })
}

/// Minimal expected hitting time of `target` from every state, solving
/// `τ(s) = 1 + min_a Σ p(x|s,a)·τ(x)`, `τ(target) = 0`, by value iteration.
pub fn hitting_times(mdp: &TabularMdp, target: usize, tol: f64) -> Result<Vec<f64>, SolverError> {
    hitting_times_aperiodic(mdp, target, 1.0, tol)
}

/// Hitting times under the aperiodicity transform: every step costs α and
/// moves along `α·p + (1 − α)·δ_s`. The fixed point is the same as for α = 1.
pub fn hitting_times_aperiodic(mdp: &TabularMdp, target: usize, alpha: f64, tol: f64) -> Result<Vec<f64>, SolverError> {
    check_tol(tol)?;
    if !reaches(mdp, target) {
        return Err(SolverError::Unreachable { target });
    }
    let n = mdp.num_states();
    let mut tau = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..SOLVER_MAX_ITERATIONS {
        let mut change: f64 = 0.0;
        for s in 0..n {
            if s == target {
                next[s] = 0.0;
                continue;
            }
            let best = (0..mdp.num_actions())
                .map(|a| mdp.transition_row(s, a).iter().zip(&tau).map(|(p, x)| p * x).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            next[s] = alpha + alpha * best + (1.0 - alpha) * tau[s];
            change = change.max((next[s] - tau[s]).abs());
        }
        std::mem::swap(&mut tau, &mut next);
        if change <= tol {
            return Ok(tau);
        }
    }
    Err(SolverError::Unreachable { target })
}

/// True iff every state can reach `target` under some policy.
fn reaches(mdp: &TabularMdp, target: usize) -> bool {
    let n = mdp.num_states();
    let mut reached = vec![false; n];
    reached[target] = true;
    let mut grew = true;
    while grew {
        grew = false;
        for s in 0..n {
            if reached[s] {
                continue;
            }
            let hit = (0..mdp.num_actions())
                .any(|a| mdp.transition_row(s, a).iter().zip(&reached).any(|(&p, &r)| p > 0.0 && r));
            if hit {
                reached[s] = true;
                grew = true;
            }
        }
    }
    reached.into_iter().all(|r| r)
}

/// `D = max_{s ≠ s'} τ(s → s')`; 0 for a single-state MDP.
pub fn diameter(mdp: &TabularMdp, tol: f64) -> Result<f64, SolverError> {
    diameter_aperiodic(mdp, 1.0, tol)
}

pub fn diameter_aperiodic(mdp: &TabularMdp, alpha: f64, tol: f64) -> Result<f64, SolverError> {
    let mut d: f64 = 0.0;
    for target in 0..mdp.num_states() {
        let tau = hitting_times_aperiodic(mdp, target, alpha, tol)?;
        for (s, &t) in tau.iter().enumerate() {
            if s != target {
                d = d.max(t);
            }
        }
    }
    Ok(d)
}

/// Known-MDP quantities used to normalize regret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub g_star: f64,
    pub h_star: Vec<f64>,
    pub span_h: f64,
    pub diameter: f64,
    pub gamma_profile: SupportProfile,
    pub optimal_policy: Vec<usize>,
    pub tol: f64,
}

pub fn ground_truth(mdp: &TabularMdp, tol: f64) -> Result<GroundTruth, SolverError> {
    let (g_star, h_star, optimal_policy) = solve_with_policy(mdp, tol)?;
    let diameter = diameter(mdp, tol)?;
    Ok(GroundTruth {
        g_star,
        span_h: span(&h_star),
        h_star,
        diameter,
        gamma_profile: support_profile(mdp),
        optimal_policy,
        tol,
    })
}
