//! Hoeffding-style plausible sets of the original UCRL2, used as a baseline.
//!
//! With `N⁺ = max{1, N(s,a)}` and `t_k` the episode start time:
//!
//! * reward radius `sqrt(7·ln(2·S·A·t_k/δ) / (2·N⁺))`, interval clipped to `[0, r_max]`;
//! * transition L1 radius `sqrt(14·S·ln(2·A·t_k/δ) / N⁺)` around `p̂(·|s,a)`.
//!
//! The optimistic row moves up to half the L1 budget onto the best state and
//! removes the same mass from the worst states.

use crate::evi::OptimisticModel;
use crate::stats::{RunningStats, StatsError};

pub fn hoeffding_reward_radius(visits: u64, num_pairs: usize, t_k: u64, delta: f64) -> f64 {
    let n_plus = visits.max(1) as f64;
    (7.0 * (2.0 * num_pairs as f64 * t_k.max(1) as f64 / delta).ln() / (2.0 * n_plus)).sqrt()
}

pub fn hoeffding_l1_radius(visits: u64, num_states: usize, num_actions: usize, t_k: u64, delta: f64) -> f64 {
    let n_plus = visits.max(1) as f64;
    (14.0 * num_states as f64 * (2.0 * num_actions as f64 * t_k.max(1) as f64 / delta).ln() / n_plus).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingSets {
    num_states: usize,
    num_actions: usize,
    pub r_max: f64,
    pub p_hat: Vec<f64>,
    pub r_high: Vec<f64>,
    pub l1_radius: Vec<f64>,
    /// Pairs with no data keep the full range.
    pub unvisited: Vec<bool>,
}

impl HoeffdingSets {
    /// Radii multiplied by `radius_scale`; 0 gives point estimates for
    /// visited pairs.
    pub fn build(stats: &RunningStats, delta: f64, radius_scale: f64) -> Result<Self, StatsError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(StatsError::InvalidDelta(delta));
        }
        let (s_n, a_n) = (stats.num_states(), stats.num_actions());
        let pairs = s_n * a_n;
        let r_max = stats.r_max();
        let t_k = stats.t_k;
        let mut r_high = vec![r_max; pairs];
        let mut l1_radius = vec![f64::INFINITY; pairs];
        let mut unvisited = vec![true; pairs];
        for i in 0..pairs {
            let n = stats.visit_count[i];
            if n == 0 {
                continue;
            }
            unvisited[i] = false;
            let rad_r = radius_scale * hoeffding_reward_radius(n, pairs, t_k, delta);
            r_high[i] = (stats.r_hat[i] + rad_r).clamp(0.0, r_max);
            l1_radius[i] = radius_scale * hoeffding_l1_radius(n, s_n, a_n, t_k, delta);
        }
        Ok(Self {
            num_states: s_n,
            num_actions: a_n,
            r_max,
            p_hat: stats.p_hat.clone(),
            r_high,
            l1_radius,
            unvisited,
        })
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.p_hat[i * self.num_states..(i + 1) * self.num_states]
    }

    /// Maximizer of `pᵀv` over `{p ∈ simplex : ‖p − p̂‖₁ ≤ d}`.
    pub fn optimistic_row(&self, s: usize, a: usize, order: &[usize]) -> Vec<f64> {
        let i = s * self.num_actions + a;
        let mut p = vec![0.0; self.num_states];
        if self.unvisited[i] {
            p[order[0]] = 1.0;
            return p;
        }
        p.copy_from_slice(self.row(i));
        let best = order[0];
        p[best] = (p[best] + self.l1_radius[i] / 2.0).min(1.0);
        let mut excess: f64 = p.iter().sum::<f64>() - 1.0;
        for &x in order.iter().rev() {
            if excess <= 0.0 {
                break;
            }
            if x == best {
                continue;
            }
            let cut = p[x].min(excess);
            p[x] -= cut;
            excess -= cut;
        }
        p
    }
}

impl OptimisticModel for HoeffdingSets {
    fn num_states(&self) -> usize {
        self.num_states
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn optimistic_reward(&self, s: usize, a: usize) -> f64 {
        self.r_high[s * self.num_actions + a]
    }

    fn optimistic_expectation(&self, s: usize, a: usize, v: &[f64], order: &[usize]) -> f64 {
        self.optimistic_row(s, a, order).iter().zip(v).map(|(p, x)| p * x).sum()
    }
}
