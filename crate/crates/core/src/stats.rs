//! Online visit statistics and the empirical Bernstein confidence sets built
//! from them at the start of every episode.
//!
//! All per-pair quantities are stored row-major in `(s, a)` and all
//! per-transition quantities in `(s, a, s')`.

use std::io::{self, Write};

use thiserror::Error;

use crate::mdp::TabularMdp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("reward {reward} at ({state},{action}) outside [0, {r_max}]")]
    RewardOutOfRange { state: usize, action: usize, reward: f64, r_max: f64 },
    #[error("index ({state},{action},{next}) out of range for S = {num_states}, A = {num_actions}")]
    IndexOutOfRange {
        state: usize,
        action: usize,
        next: usize,
        num_states: usize,
        num_actions: usize,
    },
    #[error("confidence level delta = {0} must lie in (0, 1)")]
    InvalidDelta(f64),
}

/// Counts, empirical means and population variances of the observed
/// rewards and transitions.
///
/// Estimates (`p_hat`, `r_hat`, `var_p`, `var_r`) are only refreshed by
/// [`RunningStats::finalize_episode`]; within an episode they describe the
/// data gathered before the episode started.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    num_states: usize,
    num_actions: usize,
    r_max: f64,
    /// `N_k(s,a)`, visits before the current episode.
    pub visit_count: Vec<u64>,
    /// `ν_k(s,a)`, visits during the current episode.
    pub episode_visit_count: Vec<u64>,
    /// All observed transitions, current episode included.
    pub transition_count: Vec<u64>,
    /// Sum of all observed rewards, current episode included.
    pub reward_sum: Vec<f64>,
    /// Sum of squared rewards observed during the current episode.
    pub reward_sq_sum: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub r_hat: Vec<f64>,
    pub var_p: Vec<f64>,
    pub var_r: Vec<f64>,
    /// Current time step, starting at 1.
    pub t: u64,
    /// Start time of the current episode.
    pub t_k: u64,
    /// Current episode index, starting at 1.
    pub k: u64,
}

impl RunningStats {
    pub fn new(num_states: usize, num_actions: usize, r_max: f64) -> Self {
        let pairs = num_states * num_actions;
        let triples = pairs * num_states;
        Self {
            num_states,
            num_actions,
            r_max,
            visit_count: vec![0; pairs],
            episode_visit_count: vec![0; pairs],
            transition_count: vec![0; triples],
            reward_sum: vec![0.0; pairs],
            reward_sq_sum: vec![0.0; pairs],
            p_hat: vec![0.0; triples],
            r_hat: vec![0.0; pairs],
            var_p: vec![0.0; triples],
            var_r: vec![0.0; pairs],
            t: 1,
            t_k: 1,
            k: 1,
        }
    }

    pub fn for_mdp(mdp: &TabularMdp) -> Self {
        Self::new(mdp.num_states(), mdp.num_actions(), mdp.r_max())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn pair(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    #[inline]
    pub fn triple(&self, s: usize, a: usize, next: usize) -> usize {
        self.pair(s, a) * self.num_states + next
    }

    /// `N_k(s,a)`.
    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visit_count[self.pair(s, a)]
    }

    /// `ν_k(s,a)`.
    pub fn episode_visits(&self, s: usize, a: usize) -> u64 {
        self.episode_visit_count[self.pair(s, a)]
    }

    /// True once the in-episode count of `(s,a)` reaches `max{1, N_k(s,a)}`.
    pub fn doubling_reached(&self, s: usize, a: usize) -> bool {
        let i = self.pair(s, a);
        self.episode_visit_count[i] >= self.visit_count[i].max(1)
    }

    /// Accounts for one observed transition `(s, a) -> (reward, next)`.
    pub fn record_step(&mut self, s: usize, a: usize, reward: f64, next: usize) -> Result<(), StatsError> {
        if s >= self.num_states || a >= self.num_actions || next >= self.num_states {
            return Err(StatsError::IndexOutOfRange {
                state: s,
                action: a,
                next,
                num_states: self.num_states,
                num_actions: self.num_actions,
            });
        }
        if !(reward >= 0.0 && reward <= self.r_max) {
            return Err(StatsError::RewardOutOfRange {
                state: s,
                action: a,
                reward,
                r_max: self.r_max,
            });
        }
        let i = self.pair(s, a);
        let j = self.triple(s, a, next);
        self.episode_visit_count[i] += 1;
        self.transition_count[j] += 1;
        self.reward_sum[i] += reward;
        self.reward_sq_sum[i] += reward * reward;
        self.t += 1;
        Ok(())
    }

    /// Closes the current episode: folds `ν_k` into `N`, refreshes the
    /// estimates and opens episode `k + 1` at the current time.
    ///
    /// The reward variance uses the episode-level recursion
    /// `σ²' = S_k/N'⁺ + N/N'⁺·(σ² + r̂²) − r̂'²`, where `S_k` is the sum of
    /// squared rewards of the closing episode.
    pub fn finalize_episode(&mut self) {
        let s_count = self.num_states;
        for i in 0..self.num_states * self.num_actions {
            let nu = self.episode_visit_count[i];
            if nu > 0 {
                let n_old = self.visit_count[i] as f64;
                let n_new = self.visit_count[i] + nu;
                let n_new_plus = n_new.max(1) as f64;
                let r_old = self.r_hat[i];
                let r_new = self.reward_sum[i] / n_new as f64;
                let var = self.reward_sq_sum[i] / n_new_plus + n_old / n_new_plus * (self.var_r[i] + r_old * r_old)
                    - r_new * r_new;
                self.var_r[i] = var.max(0.0);
                self.r_hat[i] = r_new;
                self.visit_count[i] = n_new;

                let n = n_new as f64;
                let base = i * s_count;
                for j in base..base + s_count {
                    let p = self.transition_count[j] as f64 / n;
                    self.p_hat[j] = p;
                    self.var_p[j] = p * (1.0 - p);
                }
            }
            self.episode_visit_count[i] = 0;
            self.reward_sq_sum[i] = 0.0;
        }
        self.k += 1;
        self.t_k = self.t;
    }

    /// `β_p` for `(s, a, next)`.
    pub fn bernstein_radius_p(&self, s: usize, a: usize, next: usize, delta: f64) -> Result<f64, StatsError> {
        check_delta(delta)?;
        let n = self.visits(s, a);
        Ok(bernstein_radius(self.var_p[self.triple(s, a, next)], 1.0, n, self.num_states * self.num_actions, delta))
    }

    /// `β_r` for `(s, a)`.
    pub fn bernstein_radius_r(&self, s: usize, a: usize, delta: f64) -> Result<f64, StatsError> {
        check_delta(delta)?;
        let n = self.visits(s, a);
        Ok(bernstein_radius(self.var_r[self.pair(s, a)], self.r_max, n, self.num_states * self.num_actions, delta))
    }
}

fn check_delta(delta: f64) -> Result<(), StatsError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidDelta(delta))
    }
}

/// Empirical Bernstein half-width
/// `2·sqrt(σ²·ln(6·SA·N⁺/δ)/N⁺) + 6·range·ln(6·SA·N⁺/δ)/N⁺` with
/// `N⁺ = max{1, N}`.
pub fn bernstein_radius(variance: f64, range: f64, visits: u64, num_pairs: usize, delta: f64) -> f64 {
    let n_plus = visits.max(1) as f64;
    let log_term = (6.0 * num_pairs as f64 * n_plus / delta).ln();
    2.0 * (variance * log_term / n_plus).sqrt() + 6.0 * range * log_term / n_plus
}

/// Per-pair reward intervals and per-transition probability boxes: the
/// plausible set of MDPs for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSets {
    num_states: usize,
    num_actions: usize,
    pub r_max: f64,
    pub delta: f64,
    pub r_low: Vec<f64>,
    pub r_high: Vec<f64>,
    pub p_low: Vec<f64>,
    pub p_high: Vec<f64>,
    pub beta_p: Vec<f64>,
    pub beta_r: Vec<f64>,
}

/// Slack used when checking `Σ p_low ≤ 1 ≤ Σ p_high`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

impl ConfidenceSets {
    /// Bernstein sets from the statistics of the current episode.
    pub fn build(stats: &RunningStats, delta: f64) -> Result<Self, StatsError> {
        Self::build_scaled(stats, delta, 1.0)
    }

    /// Like [`ConfidenceSets::build`] with every radius multiplied by
    /// `radius_scale`. A scale of 0 yields point intervals at the empirical
    /// estimates. Pairs that were never visited keep the full range whatever
    /// the scale, since their estimates carry no information.
    pub fn build_scaled(stats: &RunningStats, delta: f64, radius_scale: f64) -> Result<Self, StatsError> {
        check_delta(delta)?;
        let s_count = stats.num_states;
        let pairs = s_count * stats.num_actions;
        let r_max = stats.r_max;
        let mut sets = Self::vacuous(s_count, stats.num_actions, r_max);
        sets.delta = delta;
        for i in 0..pairs {
            let n = stats.visit_count[i];
            let beta_r = radius_scale * bernstein_radius(stats.var_r[i], r_max, n, pairs, delta);
            sets.beta_r[i] = beta_r;
            if n > 0 {
                let r = stats.r_hat[i];
                sets.r_low[i] = (r - beta_r).clamp(0.0, r_max);
                sets.r_high[i] = (r + beta_r).clamp(0.0, r_max);
            }
            for j in i * s_count..(i + 1) * s_count {
                let beta_p = radius_scale * bernstein_radius(stats.var_p[j], 1.0, n, pairs, delta);
                sets.beta_p[j] = beta_p;
                if n > 0 {
                    let p = stats.p_hat[j];
                    sets.p_low[j] = (p - beta_p).clamp(0.0, 1.0);
                    sets.p_high[j] = (p + beta_p).clamp(0.0, 1.0);
                }
            }
        }
        Ok(sets)
    }

    /// Full-range intervals: every MDP with rewards in `[0, r_max]` is plausible.
    pub fn vacuous(num_states: usize, num_actions: usize, r_max: f64) -> Self {
        let pairs = num_states * num_actions;
        let triples = pairs * num_states;
        Self {
            num_states,
            num_actions,
            r_max,
            delta: f64::NAN,
            r_low: vec![0.0; pairs],
            r_high: vec![r_max; pairs],
            p_low: vec![0.0; triples],
            p_high: vec![1.0; triples],
            beta_p: vec![f64::INFINITY; triples],
            beta_r: vec![f64::INFINITY; pairs],
        }
    }

    /// Zero-width sets containing exactly `mdp`.
    pub fn point(mdp: &TabularMdp) -> Self {
        let pairs = mdp.num_pairs();
        Self {
            num_states: mdp.num_states(),
            num_actions: mdp.num_actions(),
            r_max: mdp.r_max(),
            delta: f64::NAN,
            r_low: mdp.reward_means().to_vec(),
            r_high: mdp.reward_means().to_vec(),
            p_low: mdp.transitions().to_vec(),
            p_high: mdp.transitions().to_vec(),
            beta_p: vec![0.0; pairs * mdp.num_states()],
            beta_r: vec![0.0; pairs],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn pair(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    #[inline]
    pub fn p_low_row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.pair(s, a) * self.num_states;
        &self.p_low[start..start + self.num_states]
    }

    #[inline]
    pub fn p_high_row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.pair(s, a) * self.num_states;
        &self.p_high[start..start + self.num_states]
    }

    /// Pairs whose box does not intersect the simplex.
    pub fn infeasible_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let low: f64 = self.p_low_row(s, a).iter().sum();
                let high: f64 = self.p_high_row(s, a).iter().sum();
                let ordered = self
                    .p_low_row(s, a)
                    .iter()
                    .zip(self.p_high_row(s, a))
                    .all(|(l, h)| l <= h);
                if low > 1.0 + FEASIBILITY_TOL || high < 1.0 - FEASIBILITY_TOL || !ordered {
                    out.push((s, a));
                }
            }
        }
        out
    }

    /// Every `(s,a,s')` or `(s,a)` where the true model lies outside the
    /// intervals. Empty iff `mdp` is plausible.
    pub fn violations(&self, mdp: &TabularMdp) -> Vec<SetViolation> {
        let mut out = Vec::new();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let i = self.pair(s, a);
                let r = mdp.reward_mean(s, a);
                if r < self.r_low[i] || r > self.r_high[i] {
                    out.push(SetViolation::Reward { state: s, action: a });
                }
                for (x, &p) in mdp.transition_row(s, a).iter().enumerate() {
                    let j = i * self.num_states + x;
                    if p < self.p_low[j] || p > self.p_high[j] {
                        out.push(SetViolation::Transition { state: s, action: a, next: x });
                    }
                }
            }
        }
        out
    }

    pub fn contains(&self, mdp: &TabularMdp) -> bool {
        self.violations(mdp).is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetViolation {
    Reward { state: usize, action: usize },
    Transition { state: usize, action: usize, next: usize },
}

pub const DUMP_HEADER: &str = "episode,s,a,s_next,n,p_hat,beta_p,r_hat,beta_r";

/// Appends one row per `(s, a, s')` describing the statistics and radii of
/// `episode`.
pub fn write_dump<W: Write>(w: &mut W, episode: u64, stats: &RunningStats, sets: &ConfidenceSets) -> io::Result<()> {
    for s in 0..stats.num_states {
        for a in 0..stats.num_actions {
            let i = stats.pair(s, a);
            for x in 0..stats.num_states {
                let j = stats.triple(s, a, x);
                writeln!(
                    w,
                    "{episode},{s},{a},{x},{},{},{},{},{}",
                    stats.visit_count[i], stats.p_hat[j], sets.beta_p[j], stats.r_hat[i], sets.beta_r[i]
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    use crate::rng::SimRng;

    #[test]
    fn single_record_increments() {
        let mut st = RunningStats::new(2, 1, 1.0);
        st.record_step(0, 0, 0.5, 1).unwrap();
        assert_eq!(st.episode_visits(0, 0), 1);
        assert_eq!(st.transition_count[st.triple(0, 0, 1)], 1);
        assert_eq!(st.reward_sum[0], 0.5);
        assert_eq!(st.t, 2);
    }

    #[test]
    fn squared_reward_accumulator() {
        let mut st = RunningStats::new(2, 1, 1.0);
        st.record_step(0, 0, 0.3, 1).unwrap();
        st.record_step(0, 0, 0.6, 0).unwrap();
        assert_eq!(st.reward_sq_sum[0], 0.3 * 0.3 + 0.6 * 0.6);
    }

    #[test]
    fn rejects_out_of_range_reward() {
        let mut st = RunningStats::new(2, 1, 1.0);
        assert!(matches!(st.record_step(0, 0, 1.5, 1), Err(StatsError::RewardOutOfRange { .. })));
        assert!(matches!(st.record_step(0, 0, -0.1, 1), Err(StatsError::RewardOutOfRange { .. })));
        assert!(matches!(st.record_step(0, 1, 0.1, 1), Err(StatsError::IndexOutOfRange { .. })));
    }

    #[test]
    fn two_point_reward_variance() {
        let mut st = RunningStats::new(1, 1, 1.0);
        st.record_step(0, 0, 0.0, 0).unwrap();
        st.record_step(0, 0, 1.0, 0).unwrap();
        st.finalize_episode();
        assert_eq!(st.r_hat[0], 0.5);
        assert!((st.var_r[0] - 0.25).abs() < 1e-15);
        assert_eq!(st.visits(0, 0), 2);
        assert_eq!(st.episode_visits(0, 0), 0);
        assert_eq!(st.k, 2);
        assert_eq!(st.t_k, 3);
    }

    #[test]
    fn one_sample_has_zero_variance() {
        let mut st = RunningStats::new(1, 1, 1.0);
        st.record_step(0, 0, 0.7, 0).unwrap();
        st.finalize_episode();
        assert!((st.r_hat[0] - 0.7).abs() < 1e-15);
        assert!(st.var_r[0].abs() < 1e-15);
    }

    #[test]
    fn counts_match_batch_recount() {
        let (s_n, a_n) = (4, 3);
        let mut rng = SimRng::seed_from_u64(42);
        let mut st = RunningStats::new(s_n, a_n, 1.0);
        let mut raw = Vec::new();
        for _ in 0..1000 {
            let (s, a, x) = (rng.random_range(0..s_n), rng.random_range(0..a_n), rng.random_range(0..s_n));
            let r: f64 = rng.random();
            st.record_step(s, a, r, x).unwrap();
            raw.push((s, a, r, x));
        }
        let mut n = vec![0u64; s_n * a_n];
        let mut c = vec![0u64; s_n * a_n * s_n];
        let mut sum = vec![0.0; s_n * a_n];
        for &(s, a, r, x) in &raw {
            n[s * a_n + a] += 1;
            c[(s * a_n + a) * s_n + x] += 1;
            sum[s * a_n + a] += r;
        }
        assert_eq!(st.episode_visit_count, n);
        assert_eq!(st.transition_count, c);
        assert_eq!(st.reward_sum, sum);
        st.finalize_episode();
        assert_eq!(st.visit_count, n);
    }

    #[test]
    fn radius_at_zero_visits() {
        let st = RunningStats::new(2, 1, 1.0);
        let expected = 28.724950456692277; // 6·ln(120)
        assert!((st.bernstein_radius_p(0, 0, 0, 0.1).unwrap() - expected).abs() < 1e-12);
        assert!((st.bernstein_radius_r(0, 0, 0.1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn radius_without_variance_is_the_linear_term() {
        for n in [1u64, 5, 100, 10_000] {
            let log = (6.0 * 6.0 * n as f64 / 0.05).ln();
            let beta = bernstein_radius(0.0, 1.0, n, 6, 0.05);
            assert!((beta - 6.0 * log / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_with_variance() {
        let mut st = RunningStats::new(2, 1, 1.0);
        for x in [0, 1, 0, 1] {
            st.record_step(0, 0, 0.0, x).unwrap();
        }
        st.finalize_episode();
        assert_eq!(st.var_p[st.triple(0, 0, 0)], 0.25);
        let beta = st.bernstein_radius_p(0, 0, 0, 0.05).unwrap();
        assert!((beta - 11.610641630011516).abs() < 1e-10, "{beta}");

        let sets = ConfidenceSets::build(&st, 0.05).unwrap();
        assert_eq!(sets.p_low_row(0, 0), &[0.0, 0.0]);
        assert_eq!(sets.p_high_row(0, 0), &[1.0, 1.0]);
    }

    #[test]
    fn reward_radius_large_sample() {
        // 2·sqrt(0.25·ln(144000)/100) + 6·ln(144000)/100
        let beta = bernstein_radius(0.25, 1.0, 100, 12, 0.05);
        assert!((beta - 1.0572926003554453).abs() < 1e-12, "{beta}");
    }

    #[test]
    fn zero_reward_range_and_variance_gives_zero_radius() {
        assert_eq!(bernstein_radius(0.0, 0.0, 7, 4, 0.1), 0.0);
    }

    #[test]
    fn invalid_delta() {
        let st = RunningStats::new(2, 1, 1.0);
        assert!(matches!(st.bernstein_radius_r(0, 0, 0.0), Err(StatsError::InvalidDelta(_))));
        assert!(matches!(st.bernstein_radius_p(0, 0, 0, 1.0), Err(StatsError::InvalidDelta(_))));
        assert!(ConfidenceSets::build(&st, 1.5).is_err());
    }

    #[test]
    fn unvisited_pairs_are_vacuous() {
        let st = RunningStats::new(3, 2, 1.0);
        let sets = ConfidenceSets::build(&st, 0.1).unwrap();
        assert!(sets.p_low.iter().all(|&p| p == 0.0));
        assert!(sets.p_high.iter().all(|&p| p == 1.0));
        assert!(sets.r_low.iter().all(|&r| r == 0.0));
        assert!(sets.r_high.iter().all(|&r| r == 1.0));
        assert!(sets.infeasible_pairs().is_empty());
    }

    #[test]
    fn zero_scale_gives_point_intervals() {
        let mut st = RunningStats::new(2, 1, 1.0);
        for (r, x) in [(0.2, 0), (1.0, 1), (0.0, 1)] {
            st.record_step(0, 0, r, x).unwrap();
        }
        st.finalize_episode();
        let sets = ConfidenceSets::build_scaled(&st, 0.1, 0.0).unwrap();
        assert_eq!(sets.p_low_row(0, 0), &st.p_hat[0..2]);
        assert_eq!(sets.p_high_row(0, 0), &st.p_hat[0..2]);
        assert_eq!(sets.r_low[0], st.r_hat[0]);
        assert_eq!(sets.r_high[0], st.r_hat[0]);
        // state 1 was never visited
        assert_eq!(sets.p_high_row(1, 0), &[1.0, 1.0]);
    }

    #[test]
    fn dump_has_one_row_per_triple() {
        let st = RunningStats::new(2, 2, 1.0);
        let sets = ConfidenceSets::build(&st, 0.1).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, 1, &st, &sets).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.starts_with("1,0,0,0,0,0,"));
    }
}
