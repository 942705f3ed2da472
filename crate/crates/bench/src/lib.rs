//! Benchmark fixtures.

use attnsched_core::synthetic::{generate, SyntheticSpec};
use attnsched_core::{
    build_instance, ActivityTrace, EstimateConfig, FollowGraph, ProblemInstance, Schedule,
};

/// Instance estimated from a synthetic population of `followers` readers.
pub fn synthetic_instance(followers: usize, budget: u64) -> ProblemInstance {
    let spec = SyntheticSpec {
        followers,
        ..SyntheticSpec::default()
    };
    let population = generate(&spec);
    let graph = FollowGraph::from_edges(population.edges.iter().cloned());
    let trace = ActivityTrace::new(population.events, 0).expect("synthetic trace is valid");
    build_instance(
        &population.producer,
        &graph,
        &trace,
        24,
        budget,
        &EstimateConfig::default(),
    )
    .expect("synthetic population estimates")
    .instance
}

/// Spreads `budget` posts round-robin over the slots.
pub fn round_robin(slots: usize, budget: u64) -> Schedule {
    let mut schedule = Schedule::zeros(slots);
    for k in 0..budget as usize {
        schedule.posts[(k * 5) % slots] += 1;
    }
    schedule
}
