mod common;

use attnsched_core::analyze::{extract_clusters, permutation_test, TimelinePost, TweetObservation};
use attnsched_core::estimate::{aggregate_competitors, estimate_login_slot, SECONDS_PER_DAY};
use attnsched_core::optimize::{brute_force, marginal_allocation, DEFAULT_ENUMERATION_CAP};
use attnsched_core::{
    attention_potential, build_instance, ActivityTrace, EstimateConfig, FollowGraph, Schedule,
    TraceEvent,
};
use common::{greedy_optimal_instance, random_instance, SMALL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_schedule(rng: &mut ChaCha8Rng, slots: usize, max: u64) -> Schedule {
    Schedule::new((0..slots).map(|_| rng.random_range(0..=max)).collect())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rotation_leaves_total_unchanged(seed in any::<u64>(), offset in 0usize..12) {
        let mut r = rng(seed);
        let instance = random_instance(&mut r, &SMALL);
        let schedule = random_schedule(&mut r, instance.slots, 3);
        let base = attention_potential(&schedule, &instance).unwrap().total;
        let turned = attention_potential(&schedule.rotated(offset), &instance.rotated(offset))
            .unwrap()
            .total;
        prop_assert!(close(base, turned, 1e-9), "{base} vs {turned}");
    }

    #[test]
    fn adding_a_post_never_hurts_without_aversion(seed in any::<u64>(), slot in 0usize..6) {
        let mut r = rng(seed);
        let mut instance = random_instance(&mut r, &SMALL);
        for f in &mut instance.followers {
            f.delta = 1.0;
        }
        let schedule = random_schedule(&mut r, instance.slots, 3);
        let slot = slot % instance.slots;
        let before = attention_potential(&schedule, &instance).unwrap().total;
        let after = attention_potential(&schedule.with_added(slot), &instance).unwrap().total;
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn follower_order_does_not_matter(seed in any::<u64>()) {
        let mut r = rng(seed);
        let instance = random_instance(&mut r, &SMALL);
        let schedule = random_schedule(&mut r, instance.slots, 3);
        let mut reversed = instance.clone();
        reversed.followers.reverse();
        let a = attention_potential(&schedule, &instance).unwrap().total;
        let b = attention_potential(&schedule, &reversed).unwrap().total;
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn gamma_scaling_scales_total(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let instance = random_instance(&mut r, &SMALL);
        let schedule = random_schedule(&mut r, instance.slots, 3);
        let mut scaled = instance.clone();
        for f in &mut scaled.followers {
            f.gamma *= c;
        }
        let a = attention_potential(&schedule, &instance).unwrap().total;
        let b = attention_potential(&schedule, &scaled).unwrap().total;
        prop_assert!(close(a * c, b, 1e-12));
    }

    #[test]
    fn exact_search_bounds_greedy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let instance = random_instance(&mut r, &SMALL);
        let zero = Schedule::zeros(instance.slots);
        let greedy = marginal_allocation(&instance, &zero).unwrap();
        let exact = brute_force(&instance, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!(exact.total >= greedy.total - 1e-12);
    }

    #[test]
    fn greedy_is_exact_for_a_lone_tolerant_follower(seed in any::<u64>()) {
        let mut r = rng(seed);
        let instance = greedy_optimal_instance(&mut r, &SMALL);
        let zero = Schedule::zeros(instance.slots);
        let greedy = marginal_allocation(&instance, &zero).unwrap();
        let exact = brute_force(&instance, DEFAULT_ENUMERATION_CAP).unwrap();
        // Every full-budget schedule reads as depths 1..N here, so the optimum
        // is a tie; stacking everything at the login slot must reach it.
        let mut stacked = Schedule::zeros(instance.slots);
        stacked.posts[instance.followers[0].sigma] = instance.budget;
        let stacked_total = attention_potential(&stacked, &instance).unwrap().total;
        prop_assert!(close(stacked_total, exact.total, 1e-12));
        prop_assert!(close(greedy.total, exact.total, 1e-12));
        prop_assert_eq!(greedy.schedule.total(), instance.budget);
    }

    #[test]
    fn gamma_scaling_keeps_greedy_choices(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let instance = random_instance(&mut r, &SMALL);
        let mut scaled = instance.clone();
        for f in &mut scaled.followers {
            f.gamma *= c;
        }
        let zero = Schedule::zeros(instance.slots);
        let a = marginal_allocation(&instance, &zero).unwrap();
        let b = marginal_allocation(&scaled, &zero).unwrap();
        let slots_a: Vec<usize> = a.trajectory.iter().map(|s| s.slot).collect();
        let slots_b: Vec<usize> = b.trajectory.iter().map(|s| s.slot).collect();
        prop_assert_eq!(slots_a, slots_b);
    }

    #[test]
    fn greedy_trajectory_gains_are_positive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let instance = random_instance(&mut r, &SMALL);
        let report = marginal_allocation(&instance, &Schedule::zeros(instance.slots)).unwrap();
        prop_assert!(report.trajectory.iter().all(|s| s.gain > 0.0));
        prop_assert!(report.schedule.total() <= instance.budget);
    }

    #[test]
    fn clusters_partition_the_timeline(authors in prop::collection::vec(0u8..3, 0..40)) {
        let timeline: Vec<TimelinePost> = authors
            .iter()
            .enumerate()
            .map(|(k, a)| TimelinePost {
                event: k,
                author: format!("a{a}"),
                ts: 1000 - k as i64,
                reacted: k % 3 == 0,
            })
            .collect();
        let clusters = extract_clusters(&timeline);
        prop_assert_eq!(clusters.iter().map(|c| c.size).sum::<usize>(), timeline.len());
        let rebuilt: Vec<&str> = clusters
            .iter()
            .flat_map(|c| std::iter::repeat(c.author.as_str()).take(c.size))
            .collect();
        let original: Vec<&str> = timeline.iter().map(|p| p.author.as_str()).collect();
        prop_assert_eq!(rebuilt, original);
        for pair in clusters.windows(2) {
            prop_assert_ne!(&pair[0].author, &pair[1].author);
        }
    }

    #[test]
    fn permutation_test_is_label_symmetric(
        a_total in 1u32..60,
        b_total in 1u32..60,
        a_frac in 0.0f64..=1.0,
        b_frac in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let a_hits = (a_total as f64 * a_frac).round() as u32;
        let b_hits = (b_total as f64 * b_frac).round() as u32;
        let mut obs = Vec::new();
        for k in 0..a_total {
            obs.push(TweetObservation { size: 1, position: 1, reacted: k < a_hits });
        }
        for k in 0..b_total {
            obs.push(TweetObservation { size: 2, position: 1, reacted: k < b_hits });
        }
        let permutations = 200;
        let forward = permutation_test(&obs, 1, 2, permutations, seed).unwrap();
        let backward = permutation_test(&obs, 2, 1, permutations, seed).unwrap();
        prop_assert!((forward.t_obs + backward.t_obs).abs() < 1e-15);
        prop_assert!(forward.p_value + backward.p_value >= 1.0 - 2.0 / permutations as f64);
    }

    #[test]
    fn duplicating_competitor_posts_doubles_loads(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut events = vec![TraceEvent::post("f", 0)];
        for _ in 0..r.random_range(1..30) {
            let who = if r.random::<bool>() { "c1" } else { "c2" };
            events.push(TraceEvent::post(who, r.random_range(0..5 * SECONDS_PER_DAY)));
        }
        let graph = FollowGraph::from_edges([("f", "p"), ("f", "c1"), ("f", "c2")]);
        let once = ActivityTrace::new(events.clone(), 0).unwrap();
        let doubled_events: Vec<TraceEvent> = events
            .iter()
            .cloned()
            .chain(events.iter().filter(|e| e.user != "f").cloned())
            .collect();
        let twice = ActivityTrace::new(doubled_events, 0).unwrap();
        let a = aggregate_competitors("f", "p", &graph, &once, 24).unwrap();
        let b = aggregate_competitors("f", "p", &graph, &twice, 24).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn login_slot_ignores_events_inside_sessions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut stamps: Vec<i64> = Vec::new();
        for day in 0..r.random_range(1..10i64) {
            let start = day * SECONDS_PER_DAY + r.random_range(6..11) * 3600;
            stamps.push(start);
            stamps.push(start + r.random_range(0..4 * 3600));
        }
        stamps.sort_unstable();
        let base = estimate_login_slot(&stamps, 24, 0, 8.0).unwrap();
        // Insert between neighbours that are less than 8 h apart.
        let mut extended = stamps.clone();
        for w in stamps.windows(2) {
            if w[1] - w[0] <= 8 * 3600 && r.random::<bool>() {
                extended.push(r.random_range(w[0]..=w[1]));
            }
        }
        prop_assert_eq!(estimate_login_slot(&extended, 24, 0, 8.0).unwrap(), base);
    }

    #[test]
    fn estimated_parameters_stay_in_range(seed in any::<u64>()) {
        let pop = attnsched_core::synthetic::generate(&attnsched_core::synthetic::SyntheticSpec {
            followers: 6,
            competitors: 5,
            competitors_per_follower: 3,
            days: 5,
            seed,
            ..Default::default()
        });
        let graph = FollowGraph::from_edges(pop.edges.iter().cloned());
        let trace = ActivityTrace::new(pop.events, 0).unwrap();
        let config = EstimateConfig { mu_fallback: Some(1.0), ..EstimateConfig::default() };
        let estimation = build_instance(&pop.producer, &graph, &trace, 24, 4, &config).unwrap();
        for f in &estimation.instance.followers {
            prop_assert!(f.sigma < 24);
            prop_assert!((0.0..=1.0).contains(&f.rho));
            prop_assert!((0.0..=1.0).contains(&f.delta));
            prop_assert!(f.gamma >= 0.0);
            prop_assert!(f.competitor_load.iter().all(|&c| c >= 0.0));
        }
    }
}
