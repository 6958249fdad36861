//! Brute-force oracles shared by the integration tests. None of them reuse
//! the library's planners or solvers.

#![allow(dead_code)]

use rand::Rng;
use ucrl2b::TabularMdp;

/// Gaussian elimination with partial pivoting. `None` if singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Maximum of `pᵀv` over `{low ≤ p ≤ high, Σp = 1}` by vertex enumeration.
/// Every vertex has all coordinates but one at a bound.
pub fn lp_box_simplex_max(low: &[f64], high: &[f64], v: &[f64]) -> Option<f64> {
    let n = v.len();
    let mut best: Option<f64> = None;
    for free in 0..n {
        for mask in 0u64..(1 << (n - 1)) {
            let mut p = vec![0.0; n];
            let mut bit = 0;
            let mut fixed = 0.0;
            for i in 0..n {
                if i == free {
                    continue;
                }
                p[i] = if mask >> bit & 1 == 1 { high[i] } else { low[i] };
                fixed += p[i];
                bit += 1;
            }
            p[free] = 1.0 - fixed;
            if p[free] < low[free] - 1e-12 || p[free] > high[free] + 1e-12 {
                continue;
            }
            let obj: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
    }
    best
}

/// A random box with `Σlow ≤ 1 ≤ Σhigh`, plus a value vector.
pub fn random_box<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    loop {
        let low: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 0.6 / n as f64).collect();
        let high: Vec<f64> = low.iter().map(|l| (l + rng.random::<f64>() * 0.8).min(1.0)).collect();
        if high.iter().sum::<f64>() >= 1.0 {
            let v = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            return (low, high, v);
        }
    }
}

pub fn all_policies(num_states: usize, num_actions: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..num_states {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..num_actions).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

fn reachability(next: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = next.len();
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || next[i][j]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn policy_matrix(mdp: &TabularMdp, policy: &[usize]) -> Vec<Vec<f64>> {
    (0..mdp.num_states())
        .map(|s| mdp.transition_row(s, policy[s]).to_vec())
        .collect()
}

/// Gain of every recurrent class of a deterministic policy, via stationary
/// distributions.
pub fn recurrent_class_gains(mdp: &TabularMdp, policy: &[usize]) -> Vec<f64> {
    let n = mdp.num_states();
    let p = policy_matrix(mdp, policy);
    let edges: Vec<Vec<bool>> = p.iter().map(|row| row.iter().map(|&x| x > 0.0).collect()).collect();
    let reach = reachability(&edges);
    let mut seen = vec![false; n];
    let mut gains = Vec::new();
    for i in 0..n {
        if seen[i] || !(0..n).all(|j| !reach[i][j] || reach[j][i]) {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        let m = class.len();
        // μ(I - P) = 0 with the last equation replaced by Σμ = 1.
        let mut a = vec![vec![0.0; m]; m];
        for (r, &x) in class.iter().enumerate() {
            for (c, &y) in class.iter().enumerate() {
                a[c][r] = if x == y { 1.0 } else { 0.0 } - p[x][y];
            }
        }
        let mut b = vec![0.0; m];
        a[m - 1] = vec![1.0; m];
        b[m - 1] = 1.0;
        let mu = solve_linear(a, b).expect("stationary distribution");
        gains.push(class.iter().zip(&mu).map(|(&x, w)| w * mdp.reward_mean(x, policy[x])).sum());
    }
    gains
}

/// Optimal gain of a communicating MDP: the best recurrent class over all
/// deterministic policies.
pub fn optimal_gain_by_enumeration(mdp: &TabularMdp) -> f64 {
    all_policies(mdp.num_states(), mdp.num_actions())
        .iter()
        .flat_map(|pi| recurrent_class_gains(mdp, pi))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Expected hitting times of `target` under `policy` from a linear solve,
/// or `None` if some state cannot reach the target.
pub fn policy_hitting_times(mdp: &TabularMdp, policy: &[usize], target: usize) -> Option<Vec<f64>> {
    let n = mdp.num_states();
    let p = policy_matrix(mdp, policy);
    let mut edges: Vec<Vec<bool>> = p.iter().map(|row| row.iter().map(|&x| x > 0.0).collect()).collect();
    edges[target] = vec![false; n];
    let reach = reachability(&edges);
    if (0..n).any(|s| !reach[s][target]) {
        return None;
    }
    let others: Vec<usize> = (0..n).filter(|&s| s != target).collect();
    let a: Vec<Vec<f64>> = others
        .iter()
        .map(|&x| others.iter().map(|&y| if x == y { 1.0 } else { 0.0 } - p[x][y]).collect())
        .collect();
    let tau = solve_linear(a, vec![1.0; others.len()])?;
    let mut out = vec![0.0; n];
    for (&s, t) in others.iter().zip(tau) {
        out[s] = t;
    }
    Some(out)
}

/// Diameter from exhaustive policy enumeration and linear solves.
pub fn diameter_by_enumeration(mdp: &TabularMdp) -> f64 {
    let n = mdp.num_states();
    let policies = all_policies(n, mdp.num_actions());
    let mut d: f64 = 0.0;
    for target in 0..n {
        let mut best = vec![f64::INFINITY; n];
        for pi in &policies {
            if let Some(tau) = policy_hitting_times(mdp, pi, target) {
                for s in 0..n {
                    best[s] = best[s].min(tau[s]);
                }
            }
        }
        d = d.max(best.iter().cloned().fold(0.0, f64::max));
    }
    d
}

pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}
