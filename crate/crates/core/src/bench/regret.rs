//! Cumulative regret `Δ(t) = Σ_{u ≤ t} (g* − r_u)` at selected time points.

use serde::Serialize;

use super::HarnessError;
use crate::learner::{Algorithm, RunLog};
use crate::solver::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretPoint {
    pub t: u64,
    pub regret: f64,
    pub episodes_so_far: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretSeries {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub points: Vec<RegretPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregatePoint {
    pub t: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub num_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSeries {
    pub algorithm: Algorithm,
    pub points: Vec<AggregatePoint>,
}

/// Powers of two up to `horizon`, followed by `horizon` itself.
pub fn geometric_grid(horizon: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut t = 1;
    while t <= horizon {
        grid.push(t);
        t *= 2;
    }
    if grid.last() != Some(&horizon) && horizon > 0 {
        grid.push(horizon);
    }
    grid
}

/// Regret of `log` at every point of `grid`, in order. `t = 0` is allowed
/// and has zero regret.
pub fn compute_regret(log: &RunLog, truth: &GroundTruth, grid: &[u64]) -> Result<RegretSeries, HarnessError> {
    if let Some(&t) = grid.iter().find(|&&t| t as usize > log.steps.len()) {
        return Err(HarnessError::Grid { t, len: log.steps.len() });
    }
    let g = truth.g_star;
    let last = grid.iter().copied().max().unwrap_or(0) as usize;
    let mut cumulative = Vec::with_capacity(last + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for step in &log.steps[..last] {
        acc += g - step.reward;
        cumulative.push(acc);
    }
    let points = grid
        .iter()
        .map(|&t| RegretPoint {
            t,
            regret: cumulative[t as usize],
            episodes_so_far: if t == 0 { 0 } else { log.steps[t as usize - 1].k },
        })
        .collect();
    Ok(RegretSeries {
        algorithm: log.config.algorithm,
        seed: log.seed,
        points,
    })
}

/// Per-time-point mean, min and max across seeds. All series must share the
/// same grid; means are accumulated in the given order.
pub fn aggregate_regret(algorithm: Algorithm, series: &[RegretSeries]) -> AggregateSeries {
    let Some(first) = series.first() else {
        return AggregateSeries {
            algorithm,
            points: Vec::new(),
        };
    };
    let points = first
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let values: Vec<f64> = series.iter().map(|s| s.points[i].regret).collect();
            AggregatePoint {
                t: p.t,
                mean: values.iter().sum::<f64>() / values.len() as f64,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                num_seeds: values.len(),
            }
        })
        .collect();
    AggregateSeries { algorithm, points }
}
