//! Runs every (algorithm, seed) cell of an experiment and writes the
//! artifact bundle.
//!
//! Layout of `output_dir`:
//!
//! * `ground_truth.json`
//! * `<algorithm>_seed<seed>.steps.csv` and `.episodes.csv` (the run log)
//! * `<algorithm>_seed<seed>.regret.csv`: `algorithm,seed,t,regret,episodes_so_far`
//! * `<algorithm>_seed<seed>.stats.csv` when `debug_dump` is set
//! * `aggregate.csv`: `algorithm,t,mean_regret,min_regret,max_regret,num_seeds`
//! * `scaling.csv`: `algorithm,t,mean_regret,mean_regret_over_sqrt_t`

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::regret::{aggregate_regret, compute_regret, geometric_grid, AggregateSeries, RegretSeries};
use super::{ExperimentConfig, HarnessError};
use crate::learner::{run, run_ucrl2b_observed, Algorithm, RunLog};
use crate::mdp::{Policy, TabularMdp};
use crate::solver::{ground_truth, GroundTruth};
use crate::stats::{write_dump, DUMP_HEADER};

pub const REGRET_HEADER: &str = "algorithm,seed,t,regret,episodes_so_far";
pub const AGGREGATE_HEADER: &str = "algorithm,t,mean_regret,min_regret,max_regret,num_seeds";
pub const SCALING_HEADER: &str = "algorithm,t,mean_regret,mean_regret_over_sqrt_t";

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub ground_truth: GroundTruth,
    pub files: Vec<PathBuf>,
    pub aggregates: Vec<AggregateSeries>,
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

struct CellOutput {
    files: Vec<PathBuf>,
    series: RegretSeries,
}

fn run_cell(
    cfg: &ExperimentConfig,
    env: &TabularMdp,
    truth: &GroundTruth,
    algorithm: Algorithm,
    seed: u64,
    grid: &[u64],
) -> Result<CellOutput, HarnessError> {
    let learner = cfg.learner_config(algorithm, seed);
    let stem = format!("{}_seed{}", algorithm.name(), seed);
    let dir = &cfg.output_dir;
    let mut files = Vec::new();

    let log: RunLog = if cfg.debug_dump && algorithm == Algorithm::Ucrl2b {
        let mut dump = Vec::new();
        writeln!(dump, "{DUMP_HEADER}").expect("in-memory write");
        let log = run_ucrl2b_observed(env, &learner, |start| {
            write_dump(&mut dump, start.k, start.stats, start.sets).expect("in-memory write");
        })?;
        let path = dir.join(format!("{stem}.stats.csv"));
        write_atomic(&path, &dump)?;
        files.push(path);
        log
    } else {
        let policy = Policy::Deterministic(cfg.fixed_policy.clone().unwrap_or_else(|| truth.optimal_policy.clone()));
        run(env, &learner, Some(&policy))?
    };

    let mut buf = Vec::new();
    log.write_steps(&mut buf).expect("in-memory write");
    let path = dir.join(format!("{stem}.steps.csv"));
    write_atomic(&path, &buf)?;
    files.push(path);

    buf.clear();
    log.write_episodes(&mut buf).expect("in-memory write");
    let path = dir.join(format!("{stem}.episodes.csv"));
    write_atomic(&path, &buf)?;
    files.push(path);

    let series = compute_regret(&log, truth, grid)?;
    buf.clear();
    writeln!(buf, "{REGRET_HEADER}").expect("in-memory write");
    for p in &series.points {
        writeln!(buf, "{},{},{},{},{}", algorithm, seed, p.t, p.regret, p.episodes_so_far).expect("in-memory write");
    }
    let path = dir.join(format!("{stem}.regret.csv"));
    write_atomic(&path, &buf)?;
    files.push(path);

    Ok(CellOutput { files, series })
}

/// Runs the whole experiment described by `cfg`.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport, HarnessError> {
    let env = cfg.build_env()?;
    let truth = ground_truth(&env, cfg.ground_truth_tol)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| HarnessError::io(&cfg.output_dir, e))?;

    let mut files = Vec::new();
    let gt_path = cfg.output_dir.join("ground_truth.json");
    let gt_json = serde_json::to_vec_pretty(&truth).expect("ground truth serializes");
    write_atomic(&gt_path, &gt_json)?;
    files.push(gt_path);

    let grid = geometric_grid(cfg.horizon);
    let cells: Vec<(Algorithm, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::config("experiment.workers", e.to_string()))?;
    let outputs: Vec<CellOutput> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, s)| run_cell(cfg, &env, &truth, a, s, &grid))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut aggregates = Vec::new();
    for &algorithm in &cfg.algorithms {
        let series: Vec<RegretSeries> = outputs
            .iter()
            .filter(|o| o.series.algorithm == algorithm)
            .map(|o| o.series.clone())
            .collect();
        aggregates.push(aggregate_regret(algorithm, &series));
    }
    for o in outputs {
        files.extend(o.files);
    }

    let mut agg = Vec::new();
    let mut scaling = Vec::new();
    writeln!(agg, "{AGGREGATE_HEADER}").expect("in-memory write");
    writeln!(scaling, "{SCALING_HEADER}").expect("in-memory write");
    for series in &aggregates {
        for p in &series.points {
            writeln!(agg, "{},{},{},{},{},{}", series.algorithm, p.t, p.mean, p.min, p.max, p.num_seeds)
                .expect("in-memory write");
            writeln!(scaling, "{},{},{},{}", series.algorithm, p.t, p.mean, p.mean / (p.t as f64).sqrt())
                .expect("in-memory write");
        }
    }
    let path = cfg.output_dir.join("aggregate.csv");
    write_atomic(&path, &agg)?;
    files.push(path);
    let path = cfg.output_dir.join("scaling.csv");
    write_atomic(&path, &scaling)?;
    files.push(path);

    Ok(SuiteReport {
        ground_truth: truth,
        files,
        aggregates,
    })
}
