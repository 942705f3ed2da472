//! Broadcast scheduling under limited attention.
//!
//! A producer posts on a recurring daily schedule; each follower logs in once
//! a day and reads a reverse-chronological timeline shared with competitors.
//! This crate scores schedules by their expected attention
//! ([`objective`]), optimizes them under a post budget ([`optimize`]),
//! estimates follower behaviour from activity traces ([`estimate`]),
//! cross-checks the objective by Monte Carlo replay ([`simulate`]) and
//! provides the timeline cluster statistics behind the model ([`analyze`]).

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod config;
pub mod error;
pub mod estimate;
pub mod io;
pub mod model;
pub mod objective;
pub mod optimize;
pub mod simulate;
pub mod synthetic;

pub use analyze::{
    extract_clusters, permutation_test, powerlaw_alpha, reconstruct_timeline, ClusterRecord,
    CountRow, SizeBucket, TestResult, TimelinePost, TweetObservation,
};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use estimate::{
    build_instance, ActivityTrace, EstimateConfig, Estimation, EventKind, FollowGraph, GammaMode,
    TraceEvent,
};
pub use model::{
    cluster_survival, follower_survival, survival_eval, ClusterExponent, FollowerProfile,
    ProblemInstance, Schedule, SurvivalConfig, SurvivalFamily, SurvivalModel, SurvivalParams,
};
pub use objective::{attention_potential, heatmap, AttentionBreakdown, ClusterView, Objective};
pub use optimize::{
    brute_force, heuristic, marginal_allocation, multistart, HeuristicKind, HeuristicWindows,
    HourWindow, OptimizationReport, Termination,
};
pub use simulate::{simulate, simulate_merged, SimulationMode, SimulationResult};
