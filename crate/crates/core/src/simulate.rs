//! Monte Carlo replay of timeline consumption.
//!
//! Each simulated day builds every follower's timeline from the schedule and
//! the (integer-rounded) competitor loads, newest cluster first with the
//! competitor posts of a slot above the producer posts of that slot. The
//! follower then walks down the timeline: before each position an
//! independent quit draw decides whether the walk continues, and each
//! producer cluster is skipped or kept by one draw against its cluster
//! survival. Quit draws happen at skipped posts too, so the chance of
//! reaching depth `d` is exactly `F(d)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Schedule};
use crate::objective::{attention_potential, source_slot, FollowerKernels};

const DAYS_PER_CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    PerSlotClusters,
    /// Adjacent producer clusters with no competitor post between them are
    /// read as one cluster.
    MergedClusters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Mean over days of the gamma-weighted number of producer posts seen.
    pub empirical_total: f64,
    /// Mean posts seen per `[cluster position][follower]`, unweighted.
    pub per_cluster: Vec<Vec<f64>>,
    pub replications: u64,
    /// Standard error of `empirical_total`.
    pub standard_error: f64,
    pub seed: u64,
    pub mode: SimulationMode,
}

pub fn simulate(
    schedule: &Schedule,
    instance: &ProblemInstance,
    days: u64,
    seed: u64,
) -> Result<SimulationResult> {
    run(
        schedule,
        instance,
        days,
        seed,
        SimulationMode::PerSlotClusters,
    )
}

pub fn simulate_merged(
    schedule: &Schedule,
    instance: &ProblemInstance,
    days: u64,
    seed: u64,
) -> Result<SimulationResult> {
    run(
        schedule,
        instance,
        days,
        seed,
        SimulationMode::MergedClusters,
    )
}

/// Analytic attention on the rounded-load instance the simulator replays.
pub fn analytic_reference(schedule: &Schedule, instance: &ProblemInstance) -> Result<f64> {
    Ok(attention_potential(schedule, &instance.with_rounded_loads())?.total)
}

/// One follower's materialized timeline.
struct Replay {
    /// Conditional probability of reaching each position given the previous
    /// one was reached.
    advance: Vec<f64>,
    /// `Some((cluster position, skip group))` for producer posts.
    entries: Vec<Option<(usize, usize)>>,
    /// Survival probability of each skip group.
    keep: Vec<f64>,
    gamma: f64,
}

impl Replay {
    fn build(
        schedule: &Schedule,
        instance: &ProblemInstance,
        j: usize,
        mode: SimulationMode,
    ) -> Result<Replay> {
        let follower = &instance.followers[j];
        let kernels = FollowerKernels::resolve(follower, &instance.survival_config())?;
        let slots = instance.slots;
        let mut entries = Vec::new();
        let mut group_sizes: Vec<u64> = Vec::new();
        for position in 0..slots {
            let slot = source_slot(follower.sigma, position, slots);
            let competitors = (follower.competitor_load[slot] + 0.5).floor() as u64;
            entries.extend((0..competitors).map(|_| None));
            let x = schedule.posts[slot];
            if x == 0 {
                continue;
            }
            let continues_run = matches!(entries.last(), Some(Some(_)));
            if mode == SimulationMode::PerSlotClusters || !continues_run {
                group_sizes.push(0);
            }
            let group = group_sizes.len() - 1;
            group_sizes[group] += x;
            entries.extend((0..x).map(|_| Some((position, group))));
        }
        let mut advance = Vec::with_capacity(entries.len());
        let mut previous = 1.0;
        for d in 1..=entries.len() {
            let reach = kernels.depth_survival(d as f64);
            advance.push(if previous > 0.0 {
                (reach / previous).min(1.0)
            } else {
                0.0
            });
            previous = reach;
        }
        Ok(Replay {
            advance,
            entries,
            keep: group_sizes
                .iter()
                .map(|&x| kernels.cluster_survival(x))
                .collect(),
            gamma: follower.gamma,
        })
    }

    /// Walks one day; adds seen producer posts per cluster position into
    /// `seen` and returns the number seen.
    fn day(&self, rng: &mut ChaCha8Rng, kept: &mut Vec<bool>, seen: &mut [u64]) -> u64 {
        kept.clear();
        kept.extend(self.keep.iter().map(|&p| rng.random::<f64>() < p));
        let mut count = 0;
        for (entry, &advance) in self.entries.iter().zip(&self.advance) {
            if rng.random::<f64>() >= advance {
                break;
            }
            if let Some((position, group)) = *entry {
                if kept[group] {
                    seen[position] += 1;
                    count += 1;
                }
            }
        }
        count
    }
}

struct Chunk {
    days: u64,
    mean: f64,
    m2: f64,
    /// `[follower][cluster position]` counts.
    seen: Vec<Vec<u64>>,
}

fn run(
    schedule: &Schedule,
    instance: &ProblemInstance,
    days: u64,
    seed: u64,
    mode: SimulationMode,
) -> Result<SimulationResult> {
    instance.validate()?;
    instance.check_schedule(schedule)?;
    if instance.followers.is_empty() {
        return Err(Error::InvalidInstance(
            "simulation needs at least one follower".into(),
        ));
    }
    if days == 0 {
        return Err(Error::InvalidArgument("days must be at least 1".into()));
    }
    let replays = (0..instance.followers.len())
        .map(|j| Replay::build(schedule, instance, j, mode))
        .collect::<Result<Vec<_>>>()?;
    let users = replays.len() as u64;
    let slots = instance.slots;
    let base = ChaCha8Rng::seed_from_u64(seed);

    let chunks: Vec<Chunk> = (0..days.div_ceil(DAYS_PER_CHUNK))
        .into_par_iter()
        .map(|c| {
            let first = c * DAYS_PER_CHUNK;
            let last = (first + DAYS_PER_CHUNK).min(days);
            let mut seen = vec![vec![0u64; slots]; replays.len()];
            let mut kept = Vec::new();
            let (mut mean, mut m2) = (0.0, 0.0);
            for day in first..last {
                let mut total = 0.0;
                for (j, replay) in replays.iter().enumerate() {
                    let mut rng = base.clone();
                    rng.set_stream(day * users + j as u64);
                    rng.set_word_pos(0);
                    total += replay.gamma * replay.day(&mut rng, &mut kept, &mut seen[j]) as f64;
                }
                let n = (day - first + 1) as f64;
                let delta = total - mean;
                mean += delta / n;
                m2 += delta * (total - mean);
            }
            Chunk {
                days: last - first,
                mean,
                m2,
                seen,
            }
        })
        .collect();

    // Chan et al. pairwise merge, in day order.
    let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
    let mut seen = vec![vec![0u64; slots]; replays.len()];
    for chunk in chunks {
        let total = n + chunk.days;
        let delta = chunk.mean - mean;
        mean += delta * chunk.days as f64 / total as f64;
        m2 += chunk.m2 + delta * delta * (n as f64) * (chunk.days as f64) / total as f64;
        n = total;
        for (acc, add) in seen.iter_mut().zip(&chunk.seen) {
            for (a, b) in acc.iter_mut().zip(add) {
                *a += b;
            }
        }
    }
    let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    let per_cluster = (0..slots)
        .map(|i| seen.iter().map(|row| row[i] as f64 / n as f64).collect())
        .collect();
    Ok(SimulationResult {
        empirical_total: mean,
        per_cluster,
        replications: n,
        standard_error: (variance.max(0.0) / n as f64).sqrt(),
        seed,
        mode,
    })
}

/// Posts read per session by a consumer who quits before each post with
/// probability `rho`.
pub fn consumption_depths(rho: f64, sessions: u64, seed: u64) -> Result<Vec<u64>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quit probability must be in (0, 1], got {rho}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..sessions)
        .map(|_| {
            let mut read = 0;
            while rng.random::<f64>() >= rho {
                read += 1;
            }
            read
        })
        .collect())
}
