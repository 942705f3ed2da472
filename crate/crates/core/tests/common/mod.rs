#![allow(dead_code)]

use attnsched_core::{FollowerProfile, ProblemInstance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Limits {
    pub max_slots: usize,
    pub max_budget: u64,
    pub max_followers: usize,
    pub max_load: u32,
}

pub const SMALL: Limits = Limits {
    max_slots: 6,
    max_budget: 6,
    max_followers: 4,
    max_load: 3,
};

/// Geometric instance with integral competitor loads.
pub fn random_instance(rng: &mut ChaCha8Rng, limits: &Limits) -> ProblemInstance {
    let slots = rng.random_range(1..=limits.max_slots);
    let budget = rng.random_range(0..=limits.max_budget);
    let users = rng.random_range(1..=limits.max_followers);
    let followers = (0..users)
        .map(|j| {
            FollowerProfile::new(
                format!("u{j}"),
                rng.random_range(0..slots),
                rng.random_range(0.05..0.95),
                rng.random_range(0.05..=1.0),
                rng.random_range(0.1..2.0),
                (0..slots)
                    .map(|_| rng.random_range(0..=limits.max_load) as f64)
                    .collect(),
            )
        })
        .collect();
    ProblemInstance::new(slots, budget, followers).unwrap()
}

/// One follower, no competitors, delta = 1: the regime where greedy is optimal.
pub fn greedy_optimal_instance(rng: &mut ChaCha8Rng, limits: &Limits) -> ProblemInstance {
    let slots = rng.random_range(1..=limits.max_slots);
    let budget = rng.random_range(0..=limits.max_budget);
    let f = FollowerProfile::new(
        "solo",
        rng.random_range(0..slots),
        rng.random_range(0.05..0.95),
        1.0,
        1.0,
        vec![0.0; slots],
    );
    ProblemInstance::new(slots, budget, vec![f]).unwrap()
}

pub fn hand_instance() -> ProblemInstance {
    let f = FollowerProfile::new("u", 2, 0.5, 0.5, 1.0, vec![0.0, 1.0, 0.0]);
    ProblemInstance::new(3, 3, vec![f]).unwrap()
}

pub fn is_greedy_optimal_regime(instance: &ProblemInstance) -> bool {
    instance.followers.len() == 1
        && instance.followers[0].delta == 1.0
        && instance.followers[0]
            .competitor_load
            .iter()
            .all(|&c| c == 0.0)
}
