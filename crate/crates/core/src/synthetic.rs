//! Seeded synthetic populations for demonstrations and benchmarks.
//!
//! Competitors post with a circadian profile: busy working hours with a dip
//! at noon, a quieter evening and an almost silent night. Followers log in
//! once a day during waking hours, read a geometric number of posts and
//! sometimes react to the deepest one they read, which is exactly the signal
//! the estimators consume.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimate::{EventKind, TraceEvent, SECONDS_PER_DAY};

/// Mean posts per competitor per clock hour.
pub fn circadian_competitor_profile() -> [f64; 24] {
    let mut profile = [0.0; 24];
    for (hour, rate) in profile.iter_mut().enumerate() {
        *rate = match hour {
            12 => 0.3,
            7..=17 => 1.0,
            18..=22 => 0.4,
            _ => 0.02,
        };
    }
    profile
}

/// Relative propensity of the first login of the day per clock hour: some
/// morning readers, most at lunch or on the evening commute.
pub fn follower_login_profile() -> [f64; 24] {
    let mut profile = [0.0; 24];
    for (hour, weight) in profile.iter_mut().enumerate() {
        *weight = match hour {
            7 | 8 => 0.8,
            12 => 2.5,
            9..=17 => 0.2,
            18..=21 => 1.0,
            _ => 0.0,
        };
    }
    profile
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub followers: usize,
    pub competitors: usize,
    pub competitors_per_follower: usize,
    pub days: i64,
    pub producer_posts_per_day: usize,
    /// Day 0 midnight, UTC seconds.
    pub start_ts: i64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            followers: 40,
            competitors: 30,
            competitors_per_follower: 8,
            days: 28,
            producer_posts_per_day: 2,
            start_ts: 1_293_840_000,
            seed: 2011,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPopulation {
    pub producer: String,
    pub edges: Vec<(String, String)>,
    pub events: Vec<TraceEvent>,
}

pub const SYNTHETIC_PRODUCER: &str = "producer";

fn draw_hour(rng: &mut ChaCha8Rng, weights: &[f64; 24]) -> i64 {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (hour, w) in weights.iter().enumerate() {
        if u < *w {
            return hour as i64;
        }
        u -= w;
    }
    23
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticPopulation {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let producer = SYNTHETIC_PRODUCER.to_string();
    let competitor_ids: Vec<String> = (0..spec.competitors).map(|c| format!("c{c:03}")).collect();
    let follower_ids: Vec<String> = (0..spec.followers).map(|f| format!("f{f:03}")).collect();

    let mut edges = Vec::new();
    let mut followees: Vec<Vec<usize>> = Vec::new();
    for f in &follower_ids {
        edges.push((f.clone(), producer.clone()));
        let chosen = rand::seq::index::sample(
            &mut rng,
            spec.competitors,
            spec.competitors_per_follower.min(spec.competitors),
        )
        .into_vec();
        for &c in &chosen {
            edges.push((f.clone(), competitor_ids[c].clone()));
        }
        followees.push(chosen);
    }

    let day_ts = |day: i64| spec.start_ts + day * SECONDS_PER_DAY;
    let profile = circadian_competitor_profile();
    let mut events = Vec::new();
    // Competitor posts: up to four chances per hour.
    let mut competitor_posts: Vec<Vec<i64>> = vec![Vec::new(); spec.competitors];
    for (c, id) in competitor_ids.iter().enumerate() {
        for day in 0..spec.days {
            for (hour, rate) in profile.iter().enumerate() {
                for _ in 0..4 {
                    if rng.random::<f64>() < rate / 4.0 {
                        let ts = day_ts(day) + hour as i64 * 3600 + rng.random_range(0..3600);
                        competitor_posts[c].push(ts);
                        events.push(TraceEvent::post(id.clone(), ts));
                    }
                }
            }
        }
        competitor_posts[c].sort_unstable();
    }
    let mut producer_posts = Vec::new();
    for day in 0..spec.days {
        for _ in 0..spec.producer_posts_per_day {
            let ts = day_ts(day) + rng.random_range(8..20) * 3600 + rng.random_range(0..3600);
            producer_posts.push(ts);
            events.push(TraceEvent::post(producer.clone(), ts));
        }
    }
    producer_posts.sort_unstable();

    let logins = follower_login_profile();
    for (f, id) in follower_ids.iter().enumerate() {
        let login_hour = draw_hour(&mut rng, &logins);
        let rho: f64 = rng.random_range(0.2..0.5);
        let tie: f64 = rng.random_range(0.0..0.5);
        // (ts, author) of every followee post, newest first when scanned
        // from the back.
        let mut feed: Vec<(i64, &str)> = producer_posts
            .iter()
            .map(|&ts| (ts, producer.as_str()))
            .collect();
        for &c in &followees[f] {
            feed.extend(
                competitor_posts[c]
                    .iter()
                    .map(|&ts| (ts, competitor_ids[c].as_str())),
            );
        }
        feed.sort_unstable();

        for day in 0..spec.days {
            let login = day_ts(day) + login_hour * 3600 + rng.random_range(0..1800);
            events.push(TraceEvent::post(id.clone(), login));
            let mut read = 0usize;
            while rng.random::<f64>() >= rho {
                read += 1;
            }
            let visible = feed.partition_point(|(ts, _)| *ts <= login);
            if read >= 1 && read <= visible && rng.random::<f64>() < 0.7 {
                let (ts, author) = feed[visible - read];
                events.push(TraceEvent::reaction(
                    id.clone(),
                    login + 60,
                    EventKind::Retweet,
                    author,
                    Some(ts),
                ));
            }
            if rng.random::<f64>() < tie {
                let newest = producer_posts.partition_point(|&ts| ts <= login);
                if newest > 0 {
                    events.push(TraceEvent::reaction(
                        id.clone(),
                        login + 120,
                        EventKind::Reply,
                        producer.clone(),
                        Some(producer_posts[newest - 1]),
                    ));
                }
            }
        }
    }
    SyntheticPopulation {
        producer,
        edges,
        events,
    }
}
