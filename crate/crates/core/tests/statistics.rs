mod common;

use proptest::prelude::*;
use rand::Rng;
use ucrl2b::rng::stream;
use ucrl2b::stats::{bernstein_radius, ConfidenceSets, RunningStats};

type Episodes = Vec<Vec<(usize, usize, f64, usize)>>;

/// A trajectory over `(s, a, r, s')` split into episodes.
fn trajectory() -> impl Strategy<Value = (usize, usize, Episodes)> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(s_n, a_n)| {
        let step = (0..s_n, 0..a_n, 0.0..=1.0f64, 0..s_n);
        (
            Just(s_n),
            Just(a_n),
            prop::collection::vec(prop::collection::vec(step, 0..30), 1..6),
        )
    })
}

fn replay(s_n: usize, a_n: usize, episodes: &Episodes) -> RunningStats {
    let mut stats = RunningStats::new(s_n, a_n, 1.0);
    for ep in episodes {
        for &(s, a, r, x) in ep {
            stats.record_step(s, a, r, x).unwrap();
        }
        stats.finalize_episode();
    }
    stats
}

proptest! {
    #[test]
    fn incremental_matches_batch((s_n, a_n, episodes) in trajectory()) {
        let stats = replay(s_n, a_n, &episodes);
        let steps: Vec<_> = episodes.iter().flatten().collect();
        for s in 0..s_n {
            for a in 0..a_n {
                let i = s * a_n + a;
                let rewards: Vec<f64> = steps.iter().filter(|x| x.0 == s && x.1 == a).map(|x| x.2).collect();
                let n = rewards.len();
                prop_assert_eq!(stats.visit_count[i], n as u64);
                let mean = if n == 0 { 0.0 } else { rewards.iter().sum::<f64>() / n as f64 };
                prop_assert!((stats.r_hat[i] - mean).abs() < 1e-9);
                prop_assert!((stats.var_r[i] - common::population_variance(&rewards)).abs() < 1e-9);
                prop_assert!(stats.var_r[i] >= 0.0 && stats.var_r[i] <= 0.25 + 1e-9);
                let row_sum: f64 = (0..s_n).map(|x| stats.p_hat[i * s_n + x]).sum();
                if n == 0 {
                    prop_assert_eq!(row_sum, 0.0);
                } else {
                    prop_assert!((row_sum - 1.0).abs() < 1e-12);
                }
                for x in 0..s_n {
                    let j = i * s_n + x;
                    let count = steps.iter().filter(|y| y.0 == s && y.1 == a && y.3 == x).count();
                    prop_assert_eq!(stats.transition_count[j], count as u64);
                    let p = if n == 0 { 0.0 } else { count as f64 / n as f64 };
                    prop_assert!((stats.p_hat[j] - p).abs() < 1e-9);
                    prop_assert!((stats.var_p[j] - p * (1.0 - p)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sets_are_feasible_and_bracket_estimates((s_n, a_n, episodes) in trajectory(), delta in 0.01..0.99f64) {
        let stats = replay(s_n, a_n, &episodes);
        let sets = ConfidenceSets::build(&stats, delta).unwrap();
        prop_assert!(sets.infeasible_pairs().is_empty());
        for s in 0..s_n {
            for a in 0..a_n {
                let i = s * a_n + a;
                let (lo, hi) = (sets.p_low_row(s, a), sets.p_high_row(s, a));
                prop_assert!(lo.iter().sum::<f64>() <= 1.0 + 1e-12);
                prop_assert!(hi.iter().sum::<f64>() >= 1.0 - 1e-12);
                for x in 0..s_n {
                    let p = stats.p_hat[i * s_n + x];
                    prop_assert!(0.0 <= lo[x] && lo[x] <= p && p <= hi[x] && hi[x] <= 1.0);
                }
                prop_assert!(0.0 <= sets.r_low[i] && sets.r_low[i] <= stats.r_hat[i]);
                prop_assert!(stats.r_hat[i] <= sets.r_high[i] && sets.r_high[i] <= 1.0);
            }
        }
    }

    #[test]
    fn radius_shrinks_with_visits(variance in 0.0..0.25f64, s_n in 1usize..10, a_n in 1usize..5, delta in 0.001..0.999f64) {
        let pairs = s_n * a_n;
        let mut prev = bernstein_radius(variance, 1.0, 3, pairs, delta);
        for n in 4..2000u64 {
            let b = bernstein_radius(variance, 1.0, n, pairs, delta);
            prop_assert!(b <= prev + 1e-15, "n={} {} > {}", n, b, prev);
            prev = b;
        }
    }
}

#[test]
fn batch_counts_after_many_records() {
    let mut rng = stream(21, 0);
    let mut stats = RunningStats::new(3, 2, 1.0);
    let mut raw = Vec::new();
    for _ in 0..1000 {
        let step = (rng.random_range(0..3), rng.random_range(0..2), rng.random::<f64>(), rng.random_range(0..3));
        stats.record_step(step.0, step.1, step.2, step.3).unwrap();
        raw.push(step);
    }
    for s in 0..3 {
        for a in 0..2 {
            let here: Vec<_> = raw.iter().filter(|x| x.0 == s && x.1 == a).collect();
            assert_eq!(stats.episode_visits(s, a), here.len() as u64);
            let sq: f64 = here.iter().map(|x| x.2 * x.2).sum();
            assert!((stats.reward_sq_sum[s * 2 + a] - sq).abs() < 1e-9);
            for x in 0..3 {
                let c = here.iter().filter(|y| y.3 == x).count() as u64;
                assert_eq!(stats.transition_count[stats.triple(s, a, x)], c);
            }
        }
    }
}

#[test]
fn three_episode_variance_matches_batch() {
    let mut rng = stream(22, 0);
    let mut stats = RunningStats::new(1, 1, 1.0);
    let mut rewards = Vec::new();
    for len in [100, 150, 250] {
        for _ in 0..len {
            let r = rng.random::<f64>();
            stats.record_step(0, 0, r, 0).unwrap();
            rewards.push(r);
        }
        stats.finalize_episode();
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let batch = rewards.iter().map(|r| r * r).sum::<f64>() / n - mean * mean;
    assert!((stats.var_r[0] - batch).abs() < 1e-9);
}

/// Resamples `n` transitions of one pair from a fixed distribution and
/// counts how often some `|p̂ − p|` exceeds its radius.
#[test]
fn per_triple_coverage_monte_carlo() {
    let p = [0.2, 0.3, 0.5];
    let (s_n, a_n, delta) = (3usize, 1usize, 0.1);
    let reps = 10_000;
    let mut rng = stream(23, 0);
    for n in [5u64, 20, 100] {
        let mut misses = 0;
        for _ in 0..reps {
            let mut stats = RunningStats::new(s_n, a_n, 1.0);
            for _ in 0..n {
                let u: f64 = rng.random();
                let x = if u < p[0] { 0 } else if u < p[0] + p[1] { 1 } else { 2 };
                stats.record_step(0, 0, 0.0, x).unwrap();
            }
            stats.finalize_episode();
            let miss = (0..s_n).any(|x| {
                let beta = stats.bernstein_radius_p(0, 0, x, delta).unwrap();
                (stats.p_hat[x] - p[x]).abs() > beta
            });
            misses += usize::from(miss);
        }
        let bound = delta / (10.0 * (n * n) as f64 * (s_n * s_n * a_n) as f64);
        let slack = 2.0 * (bound * (1.0 - bound) / reps as f64).sqrt() + 1.0 / reps as f64;
        let fraction = misses as f64 / reps as f64;
        assert!(fraction <= bound + slack, "n={n}: {fraction} > {bound} + {slack}");
    }
}

#[test]
fn radius_examples() {
    let six_ln_120 = 6.0 * 120f64.ln();
    assert!((bernstein_radius(0.0, 1.0, 0, 2, 0.1) - six_ln_120).abs() < 1e-12);
    let zero_var = bernstein_radius(0.0, 1.0, 37, 4, 0.2);
    assert!((zero_var - 6.0 * (6.0 * 4.0 * 37.0 / 0.2f64).ln() / 37.0).abs() < 1e-12);
    assert_eq!(bernstein_radius(0.0, 0.0, 10, 4, 0.2), 0.0);
}
