//! Schedule generators: greedy marginal allocation, exhaustive search for
//! small instances, the common posting heuristics, and multi-start wrapping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Schedule};
use crate::objective::Objective;

pub const DEFAULT_ENUMERATION_CAP: u128 = 20_000_000;

/// Relative tolerance for comparing objective gains. Gains within this
/// fraction of the current objective are treated as equal (ties go to the
/// lowest slot) and a best gain inside it counts as no improvement.
pub const GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    NoGain,
    Budget,
    Exhausted,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::NoGain => "no-gain",
            Termination::Budget => "budget",
            Termination::Exhausted => "exhausted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub slot: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub schedule: Schedule,
    pub total: f64,
    pub trajectory: Vec<Step>,
    pub evaluations: u64,
    pub terminated_by: Termination,
}

/// Greedy hill climbing: repeatedly add one post to the slot with the
/// largest objective gain until the budget is spent or no slot improves.
pub fn marginal_allocation(
    instance: &ProblemInstance,
    initial: &Schedule,
) -> Result<OptimizationReport> {
    instance.check_feasible(initial)?;
    let objective = Objective::new(instance)?;
    Ok(climb(&objective, initial.clone()))
}

fn climb(objective: &Objective<'_>, mut current: Schedule) -> OptimizationReport {
    let budget = objective.instance().budget;
    let mut value = objective.total_unchecked(&current.posts);
    let mut evaluations = 1u64;
    let mut trajectory = Vec::new();
    let mut candidate = current.posts.clone();

    let terminated_by = loop {
        if current.total() >= budget {
            break Termination::Budget;
        }
        let mut best: Option<(usize, f64)> = None;
        for k in 0..candidate.len() {
            candidate[k] += 1;
            let gain = objective.total_unchecked(&candidate) - value;
            candidate[k] -= 1;
            evaluations += 1;
            let tol = GAIN_TOLERANCE * (value.abs() + gain.abs());
            match best {
                Some((_, g)) if gain <= g + tol => {}
                _ => best = Some((k, gain)),
            }
        }
        let Some((slot, gain)) = best else {
            break Termination::NoGain;
        };
        if gain <= GAIN_TOLERANCE * value.abs() {
            break Termination::NoGain;
        }
        current.posts[slot] += 1;
        candidate[slot] += 1;
        value += gain;
        trajectory.push(Step { slot, gain });
    };

    // Recompute so the reported total is an exact evaluation, not an
    // accumulation of differences.
    let total = objective.total_unchecked(&current.posts);
    OptimizationReport {
        schedule: current,
        total,
        trajectory,
        evaluations: evaluations + 1,
        terminated_by,
    }
}

/// Number of schedules with `slots` non-negative entries summing to at most
/// `budget`: `C(budget + slots, slots)`, saturating.
pub fn enumeration_size(slots: usize, budget: u64) -> u128 {
    let n = budget as u128 + slots as u128;
    let k = (slots as u128).min(budget as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive search over every feasible schedule, in lexicographic order.
/// Ties keep the lexicographically smallest schedule.
pub fn brute_force(instance: &ProblemInstance, cap: u128) -> Result<OptimizationReport> {
    let size = enumeration_size(instance.slots, instance.budget);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let objective = Objective::new(instance)?;
    let mut posts = vec![0u64; instance.slots];
    let mut best = (f64::NEG_INFINITY, posts.clone());
    let mut evaluations = 0u64;
    enumerate(
        &mut posts,
        0,
        instance.budget,
        &mut |candidate: &[u64]| {
            let value = objective.total_unchecked(candidate);
            evaluations += 1;
            if value > best.0 {
                best = (value, candidate.to_vec());
            }
        },
    );
    Ok(OptimizationReport {
        schedule: Schedule::new(best.1),
        total: best.0,
        trajectory: Vec::new(),
        evaluations,
        terminated_by: Termination::Exhausted,
    })
}

fn enumerate(posts: &mut [u64], slot: usize, remaining: u64, visit: &mut impl FnMut(&[u64])) {
    if slot == posts.len() {
        visit(posts);
        return;
    }
    for x in 0..=remaining {
        posts[slot] = x;
        enumerate(posts, slot + 1, remaining - x, visit);
    }
    posts[slot] = 0;
}

/// Marginal allocation from the zero schedule plus `restarts - 1` seeded
/// random feasible starting points. Returns the best run; ties keep the
/// earliest restart. `evaluations` sums over all runs.
pub fn multistart(
    instance: &ProblemInstance,
    restarts: usize,
    seed: u64,
) -> Result<OptimizationReport> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let objective = Objective::new(instance)?;
    let reports: Vec<OptimizationReport> = (0..restarts)
        .into_par_iter()
        .map(|r| climb(&objective, starting_point(instance, seed, r)))
        .collect();

    let evaluations = reports.iter().map(|r| r.evaluations).sum();
    let mut best = reports
        .into_iter()
        .reduce(|best, next| if next.total > best.total { next } else { best })
        .expect("at least one restart");
    best.evaluations = evaluations;
    Ok(best)
}

fn starting_point(instance: &ProblemInstance, seed: u64, restart: usize) -> Schedule {
    let mut schedule = Schedule::zeros(instance.slots);
    if restart == 0 {
        return schedule;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let posts = rng.random_range(0..=instance.budget);
    for _ in 0..posts {
        let slot = rng.random_range(0..instance.slots);
        schedule.posts[slot] += 1;
    }
    schedule
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicKind {
    Uniform,
    Peak,
    Graveyard,
    Smart,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 4] = [
        HeuristicKind::Uniform,
        HeuristicKind::Peak,
        HeuristicKind::Graveyard,
        HeuristicKind::Smart,
    ];
}

impl std::fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HeuristicKind::Uniform => "uniform",
            HeuristicKind::Peak => "peak",
            HeuristicKind::Graveyard => "graveyard",
            HeuristicKind::Smart => "smart",
        })
    }
}

/// Inclusive range of clock hours, wrapping past midnight when
/// `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HourWindow {
    pub start: u32,
    pub end: u32,
}

impl HourWindow {
    pub fn contains(&self, hour: u32) -> bool {
        if self.start <= self.end {
            (self.start..=self.end).contains(&hour)
        } else {
            hour >= self.start || hour <= self.end
        }
    }

    /// Slots whose starting clock hour falls inside the window.
    pub fn slots(&self, slots: usize) -> Vec<usize> {
        (0..slots)
            .filter(|&s| self.contains((s * 24 / slots) as u32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicWindows {
    pub night: HourWindow,
    pub lunch: HourWindow,
}

impl Default for HeuristicWindows {
    fn default() -> Self {
        HeuristicWindows {
            night: HourWindow { start: 23, end: 6 },
            lunch: HourWindow { start: 12, end: 13 },
        }
    }
}

pub fn heuristic(
    kind: HeuristicKind,
    instance: &ProblemInstance,
    n: u64,
    activity: Option<&[f64]>,
    windows: &HeuristicWindows,
) -> Result<Schedule> {
    if n > instance.budget {
        return Err(Error::Infeasible {
            used: n,
            budget: instance.budget,
        });
    }
    let slots = instance.slots;
    let schedule = match kind {
        HeuristicKind::Uniform => spread(n, &(0..slots).collect::<Vec<_>>(), slots),
        HeuristicKind::Peak => {
            let weights = activity.ok_or(Error::MissingActivity("peak"))?;
            proportional(n, weights, slots)?
        }
        HeuristicKind::Graveyard => spread(n, &windows.night.slots(slots), slots),
        HeuristicKind::Smart => {
            // Lunch takes the larger half; each half spreads over its window.
            let (lunch_slots, night_slots) =
                (windows.lunch.slots(slots), windows.night.slots(slots));
            let to_night = match (lunch_slots.is_empty(), night_slots.is_empty()) {
                (true, _) => n,
                (false, true) => 0,
                _ => n / 2,
            };
            let lunch = spread(n - to_night, &lunch_slots, slots);
            let night = spread(to_night, &night_slots, slots);
            Schedule::new(
                lunch
                    .posts
                    .iter()
                    .zip(&night.posts)
                    .map(|(a, b)| a + b)
                    .collect(),
            )
        }
    };
    Ok(schedule)
}

/// `floor(n / k)` posts in each chosen slot, remainder to the lowest ones.
fn spread(n: u64, chosen: &[usize], slots: usize) -> Schedule {
    let mut schedule = Schedule::zeros(slots);
    if chosen.is_empty() {
        return schedule;
    }
    let k = chosen.len() as u64;
    for (rank, &slot) in chosen.iter().enumerate() {
        schedule.posts[slot] = n / k + u64::from((rank as u64) < n % k);
    }
    schedule
}

/// Largest-remainder apportionment of `n` posts to the weights.
fn proportional(n: u64, weights: &[f64], slots: usize) -> Result<Schedule> {
    if weights.len() != slots {
        return Err(Error::LengthMismatch {
            what: "activity weights".into(),
            expected: slots,
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument(
            "activity weights must be finite and non-negative".into(),
        ));
    }
    let mut schedule = Schedule::zeros(slots);
    if n == 0 {
        return Ok(schedule);
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidArgument(
            "activity weights sum to zero".into(),
        ));
    }
    let mut remainders = Vec::with_capacity(slots);
    let mut assigned = 0;
    for (s, w) in weights.iter().enumerate() {
        let quota = n as f64 * w / sum;
        let whole = quota.floor() as u64;
        schedule.posts[s] = whole;
        assigned += whole;
        remainders.push((quota - whole as f64, s));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, s) in remainders.iter().take(n.saturating_sub(assigned) as usize) {
        schedule.posts[s] += 1;
    }
    Ok(schedule)
}

/// Follower activity per slot: the gamma-weighted count of followers
/// logging in at each slot.
pub fn login_activity(instance: &ProblemInstance) -> Vec<f64> {
    let mut weights = vec![0.0; instance.slots];
    for f in &instance.followers {
        weights[f.sigma] += f.gamma;
    }
    weights
}
