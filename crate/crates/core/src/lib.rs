//! Tabular average-reward reinforcement learning with optimistic exploration.
//!
//! * [`mdp`]: the tabular model, benchmark environments and sampling.
//! * [`stats`]: online statistics and empirical Bernstein confidence sets.
//! * [`evi`]: extended value iteration over a set of plausible MDPs.
//! * [`learner`]: the UCRL2B episode loop plus the Hoeffding and fixed-policy baselines.
//! * [`solver`]: optimal gain and bias, diameter and policy gain of a known MDP.
//! * [`bench`]: regret curves, coverage experiment and the suite runner.

pub mod bench;
pub mod evi;
pub mod hoeffding;
pub mod learner;
pub mod mdp;
pub mod rng;
pub mod solver;
pub mod stats;

pub use evi::{apply_extended_operator, extended_value_iteration, inner_max_transition, EviConfig, PlanResult};
pub use learner::{run_fixed_policy, run_ucrl2_hoeffding, run_ucrl2b, Algorithm, LearnerConfig, RunLog};
pub use mdp::{build_environment, step, support_profile, validate_mdp, EnvironmentSpec, Policy, RewardKind, SupportProfile, TabularMdp};
pub use solver::{diameter, ground_truth, policy_gain, solve_gain_bias, span, GroundTruth};
pub use stats::{ConfidenceSets, RunningStats};
