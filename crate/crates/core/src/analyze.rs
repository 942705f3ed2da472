//! Timeline cluster statistics and the significance machinery behind the
//! monotony-aversion model, plus inter-event time analysis.

use std::collections::{BTreeMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{timeline_indices, ActivityTrace, FollowGraph};

pub const DEFAULT_PERMUTATIONS: usize = 1000;
pub const MIN_POWERLAW_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelinePost {
    /// Index of the post in the trace.
    pub event: usize,
    pub author: String,
    pub ts: i64,
    /// Whether the timeline owner retweeted or replied to this post.
    pub reacted: bool,
}

/// Every followee post of `user`, newest first.
pub fn reconstruct_timeline(
    user: &str,
    graph: &FollowGraph,
    trace: &ActivityTrace,
) -> Result<Vec<TimelinePost>> {
    if !graph.contains_user(user) {
        return Err(Error::UnknownUser(user.to_owned()));
    }
    let reacted: HashSet<usize> = trace
        .user_events(user)
        .filter(|e| e.kind.is_reaction())
        .filter_map(|e| trace.resolve_target(e))
        .collect();
    Ok(timeline_indices(user, graph, trace)
        .into_iter()
        .map(|i| {
            let e = trace.event(i);
            TimelinePost {
                event: i,
                author: e.user.clone(),
                ts: e.ts,
                reacted: reacted.contains(&i),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMember {
    /// 1 = newest post of the cluster.
    pub position: usize,
    pub reacted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub author: String,
    pub size: usize,
    pub members: Vec<ClusterMember>,
}

impl ClusterRecord {
    pub fn observations(&self) -> impl Iterator<Item = TweetObservation> + '_ {
        self.members.iter().map(move |m| TweetObservation {
            size: self.size as u32,
            position: m.position as u32,
            reacted: m.reacted,
        })
    }
}

/// Maximal runs of same-author posts, top-down.
pub fn extract_clusters(timeline: &[TimelinePost]) -> Vec<ClusterRecord> {
    timeline
        .chunk_by(|a, b| a.author == b.author)
        .map(|run| ClusterRecord {
            author: run[0].author.clone(),
            size: run.len(),
            members: run
                .iter()
                .enumerate()
                .map(|(k, p)| ClusterMember {
                    position: k + 1,
                    reacted: p.reacted,
                })
                .collect(),
        })
        .collect()
}

/// One tweet seen through its cluster: the compact unit the statistics run
/// on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetObservation {
    pub size: u32,
    pub position: u32,
    pub reacted: bool,
}

pub fn observations(records: &[ClusterRecord]) -> Vec<TweetObservation> {
    records
        .iter()
        .flat_map(ClusterRecord::observations)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeBucket {
    Size(usize),
    Over10,
}

impl SizeBucket {
    pub fn of(size: usize) -> SizeBucket {
        if size > 10 {
            SizeBucket::Over10
        } else {
            SizeBucket::Size(size)
        }
    }
}

impl std::fmt::Display for SizeBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SizeBucket::Size(s) => write!(f, "{s}"),
            SizeBucket::Over10 => f.write_str(">10"),
        }
    }
}

impl std::str::FromStr for SizeBucket {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            ">10" => Ok(SizeBucket::Over10),
            other => match other.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(SizeBucket::of(n)),
                _ => Err(format!("invalid cluster size {other:?}")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RateCell {
    pub reactions: u64,
    pub total: u64,
}

impl RateCell {
    pub fn probability(&self) -> f64 {
        self.reactions as f64 / self.total as f64
    }

    fn add(&mut self, reacted: bool) {
        self.total += 1;
        self.reactions += u64::from(reacted);
    }
}

/// `P(R | C = c)` per size bucket. Buckets without tweets are absent.
pub fn reaction_prob_by_size(obs: &[TweetObservation]) -> BTreeMap<SizeBucket, RateCell> {
    let mut table: BTreeMap<SizeBucket, RateCell> = BTreeMap::new();
    for o in obs {
        table
            .entry(SizeBucket::of(o.size as usize))
            .or_default()
            .add(o.reacted);
    }
    table
}

/// `P(R | C = c, position = k)` keyed by exact `(c, k)`.
pub fn reaction_prob_by_size_position(
    obs: &[TweetObservation],
) -> BTreeMap<(usize, usize), RateCell> {
    let mut table: BTreeMap<(usize, usize), RateCell> = BTreeMap::new();
    for o in obs {
        table
            .entry((o.size as usize, o.position as usize))
            .or_default()
            .add(o.reacted);
    }
    table
}

/// One row of an aggregate count table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub size: SizeBucket,
    pub reactions: u64,
    pub total: u64,
}

/// Cluster statistics of the Twitter-Friends timelines, by cluster size.
pub const TWITTER_FRIENDS_COUNTS: [(SizeBucket, u64, u64); 11] = [
    (SizeBucket::Size(1), 15897, 8435832),
    (SizeBucket::Size(2), 2756, 1819014),
    (SizeBucket::Size(3), 710, 586665),
    (SizeBucket::Size(4), 304, 243536),
    (SizeBucket::Size(5), 126, 126125),
    (SizeBucket::Size(6), 79, 72486),
    (SizeBucket::Size(7), 54, 49119),
    (SizeBucket::Size(8), 21, 26376),
    (SizeBucket::Size(9), 16, 17019),
    (SizeBucket::Size(10), 15, 13600),
    (SizeBucket::Over10, 28, 49673),
];

pub fn twitter_friends_counts() -> Vec<CountRow> {
    TWITTER_FRIENDS_COUNTS
        .iter()
        .map(|&(size, reactions, total)| CountRow {
            size,
            reactions,
            total,
        })
        .collect()
}

/// Expands aggregate counts into one observation per tweet. Positions cycle
/// through `1..=size`; the first `reactions` tweets carry the reaction. The
/// `>10` bucket expands as size 11.
pub fn expand_counts(rows: &[CountRow]) -> Result<Vec<TweetObservation>> {
    let capacity = rows.iter().map(|r| r.total as usize).sum();
    let mut out = Vec::with_capacity(capacity);
    for row in rows {
        if row.reactions > row.total {
            return Err(Error::InvalidArgument(format!(
                "size {}: {} reactions exceed {} tweets",
                row.size, row.reactions, row.total
            )));
        }
        let size = match row.size {
            SizeBucket::Size(s) => s as u32,
            SizeBucket::Over10 => 11,
        };
        out.extend((0..row.total).map(|k| TweetObservation {
            size,
            position: (k % size as u64) as u32 + 1,
            reacted: k < row.reactions,
        }));
    }
    Ok(out)
}

fn bucket_counts(obs: &[TweetObservation], i: usize, j: usize) -> Result<(RateCell, RateCell)> {
    let (mut a, mut b) = (RateCell::default(), RateCell::default());
    for o in obs {
        let s = o.size as usize;
        if s == i {
            a.add(o.reacted);
        }
        if s == j {
            b.add(o.reacted);
        }
    }
    if a.total == 0 {
        return Err(Error::EmptyBucket(i));
    }
    if b.total == 0 {
        return Err(Error::EmptyBucket(j));
    }
    Ok((a, b))
}

/// `T_obs(i, j) = P(R | C = i) - P(R | C = j)`.
pub fn difference_statistic(obs: &[TweetObservation], i: usize, j: usize) -> Result<f64> {
    let (a, b) = bucket_counts(obs, i, j)?;
    Ok(a.probability() - b.probability())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t_obs: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
}

/// One-sided randomization test of `P(R | C = i) > P(R | C = j)`.
///
/// Each permutation shuffles the reaction labels over the pooled tweets of
/// both buckets. The shuffled statistic only depends on how many reacted
/// labels land in bucket `i`, so a permutation draws the positions of the
/// smaller label class uniformly without replacement from the pooled
/// sequence. The pool is laid out with the smaller size first and every
/// permutation uses its own counter-derived stream, so `(i, j)` and `(j, i)`
/// see identical shuffles.
pub fn permutation_test(
    obs: &[TweetObservation],
    i: usize,
    j: usize,
    permutations: usize,
    seed: u64,
) -> Result<TestResult> {
    if permutations < 1 {
        return Err(Error::InvalidArgument(
            "permutations must be at least 1".into(),
        ));
    }
    let (a, b) = bucket_counts(obs, i, j)?;
    let t_obs = a.probability() - b.probability();

    let (first, second) = if i <= j { (a, b) } else { (b, a) };
    let pooled = first.total + second.total;
    let reacted = first.reactions + second.reactions;
    // Sample whichever label class is rarer.
    let sample_reacted = reacted <= pooled - reacted;
    let amount = if sample_reacted {
        reacted
    } else {
        pooled - reacted
    };

    let exceed: usize = (0..permutations)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let hits = rand::seq::index::sample(&mut rng, pooled as usize, amount as usize)
                .into_iter()
                .filter(|&p| (p as u64) < first.total)
                .count() as u64;
            let first_reacted = if sample_reacted {
                hits
            } else {
                first.total - hits
            };
            let shuffled_first = RateCell {
                reactions: first_reacted,
                total: first.total,
            };
            let shuffled_second = RateCell {
                reactions: reacted - first_reacted,
                total: second.total,
            };
            let t = if i <= j {
                shuffled_first.probability() - shuffled_second.probability()
            } else {
                shuffled_second.probability() - shuffled_first.probability()
            };
            usize::from(t >= t_obs)
        })
        .sum();

    Ok(TestResult {
        t_obs,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        permutations,
        seed,
    })
}

/// Gaps between consecutive events in hours; zero gaps are dropped.
pub fn interevent_times(timestamps: &[i64]) -> Result<Vec<f64>> {
    if timestamps.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: timestamps.len(),
        });
    }
    let mut sorted = timestamps.to_vec();
    sorted.sort_unstable();
    Ok(sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&gap| gap > 0)
        .map(|gap| gap as f64 / 3600.0)
        .collect())
}

/// Counts of gaps per whole-hour bin `[k, k + 1)`; the last bin collects
/// everything from `max_hours` on.
pub fn interevent_histogram(taus: &[f64], max_hours: usize) -> Vec<u64> {
    let mut bins = vec![0u64; max_hours + 1];
    for &t in taus {
        let k = (t.floor() as usize).min(max_hours);
        bins[k] += 1;
    }
    bins
}

/// Continuous maximum-likelihood power-law exponent over samples
/// `>= tau_min`: `alpha = 1 + n / sum ln(tau / tau_min)`.
pub fn powerlaw_alpha(taus: &[f64], tau_min: f64) -> Result<f64> {
    if !(tau_min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tau_min must be positive, got {tau_min}"
        )));
    }
    let tail: Vec<f64> = taus.iter().copied().filter(|t| *t >= tau_min).collect();
    if tail.len() < MIN_POWERLAW_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_POWERLAW_SAMPLES,
            got: tail.len(),
        });
    }
    let log_sum: f64 = tail.iter().map(|t| (t / tau_min).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::InvalidArgument(
            "all samples equal tau_min; the exponent is unbounded".into(),
        ));
    }
    Ok(1.0 + tail.len() as f64 / log_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{EventKind, TraceEvent};

    fn post(author: &str, ts: i64) -> TimelinePost {
        TimelinePost {
            event: 0,
            author: author.into(),
            ts,
            reacted: false,
        }
    }

    #[test]
    fn timeline_order() {
        let graph = FollowGraph::from_edges([("u", "a"), ("u", "b"), ("v", "u")]);
        let trace = ActivityTrace::new(
            vec![
                TraceEvent::post("a", 10),
                TraceEvent::post("b", 20),
                TraceEvent::post("b", 30),
                TraceEvent::post("a", 30),
                TraceEvent::post("x", 40),
            ],
            0,
        )
        .unwrap();
        let t = reconstruct_timeline("u", &graph, &trace).unwrap();
        let got: Vec<_> = t.iter().map(|p| (p.author.as_str(), p.ts)).collect();
        assert_eq!(got, vec![("a", 30), ("b", 30), ("b", 20), ("a", 10)]);

        // v follows only u, who never posts
        assert!(reconstruct_timeline("v", &graph, &trace)
            .unwrap()
            .is_empty());
        assert_eq!(
            reconstruct_timeline("nobody", &graph, &trace),
            Err(Error::UnknownUser("nobody".into()))
        );
    }

    #[test]
    fn timeline_marks_owner_reactions() {
        let graph = FollowGraph::from_edges([("u", "a"), ("w", "a")]);
        let trace = ActivityTrace::new(
            vec![
                TraceEvent::post("a", 10),
                TraceEvent::post("a", 20),
                TraceEvent::reaction("u", 25, EventKind::Retweet, "a", Some(10)),
                TraceEvent::reaction("w", 26, EventKind::Reply, "a", None),
            ],
            0,
        )
        .unwrap();
        let t = reconstruct_timeline("u", &graph, &trace).unwrap();
        assert_eq!(
            t.iter().map(|p| p.reacted).collect::<Vec<_>>(),
            vec![false, true]
        );
        let t = reconstruct_timeline("w", &graph, &trace).unwrap();
        assert_eq!(
            t.iter().map(|p| p.reacted).collect::<Vec<_>>(),
            vec![true, false]
        );
    }

    #[test]
    fn cluster_extraction() {
        let timeline: Vec<_> = ["p", "q", "q", "p"].iter().map(|a| post(a, 0)).collect();
        let sizes: Vec<_> = extract_clusters(&timeline).iter().map(|c| c.size).collect();
        assert_eq!(sizes, vec![1, 2, 1]);

        assert!(extract_clusters(&[]).is_empty());

        let timeline: Vec<_> = (0..5).map(|k| post("p", k)).collect();
        let clusters = extract_clusters(&timeline);
        assert_eq!(clusters.len(), 1);
        let positions: Vec<_> = clusters[0].members.iter().map(|m| m.position).collect();
        assert_eq!(positions, vec![1, 2, 3, 4, 5]);
    }

    fn table3() -> Vec<TweetObservation> {
        expand_counts(&twitter_friends_counts()).unwrap()
    }

    #[test]
    fn rates_from_counts() {
        let rows = [
            CountRow {
                size: SizeBucket::Size(1),
                reactions: 15897,
                total: 8435832,
            },
            CountRow {
                size: SizeBucket::Size(5),
                reactions: 126,
                total: 126125,
            },
        ];
        let table = reaction_prob_by_size(&expand_counts(&rows).unwrap());
        assert!((table[&SizeBucket::Size(1)].probability() - 0.0018845).abs() < 5e-8);
        assert!((table[&SizeBucket::Size(5)].probability() - 0.0009990).abs() < 5e-8);
        assert!(!table.contains_key(&SizeBucket::Size(2)));
    }

    #[test]
    fn all_reacted_gives_one() {
        let rows = [
            CountRow {
                size: SizeBucket::Size(1),
                reactions: 4,
                total: 4,
            },
            CountRow {
                size: SizeBucket::Size(3),
                reactions: 6,
                total: 6,
            },
            CountRow {
                size: SizeBucket::Over10,
                reactions: 11,
                total: 11,
            },
        ];
        let table = reaction_prob_by_size(&expand_counts(&rows).unwrap());
        assert_eq!(table.len(), 3);
        assert!(table.values().all(|c| c.probability() == 1.0));
    }

    #[test]
    fn size_position_table() {
        assert!(reaction_prob_by_size_position(&[]).is_empty());
        let obs: Vec<_> = (1..=4u32)
            .flat_map(|size| {
                (1..=size).map(move |position| TweetObservation {
                    size,
                    position,
                    reacted: position == 1,
                })
            })
            .collect();
        let table = reaction_prob_by_size_position(&obs);
        for (&(_, k), cell) in &table {
            assert_eq!(cell.probability(), if k == 1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn size_position_ordering_preserved() {
        // (2, 1): 3 of 10 reacted; (3, 1): 1 of 10 reacted.
        let mut obs = Vec::new();
        for k in 0..10 {
            for position in 1..=2 {
                obs.push(TweetObservation {
                    size: 2,
                    position,
                    reacted: position == 1 && k < 3,
                });
            }
            for position in 1..=3 {
                obs.push(TweetObservation {
                    size: 3,
                    position,
                    reacted: position == 1 && k < 1,
                });
            }
        }
        let table = reaction_prob_by_size_position(&obs);
        assert!(table[&(2, 1)].probability() > table[&(3, 1)].probability());
        assert_eq!(table[&(2, 1)].probability(), 0.3);
    }

    #[test]
    fn difference_examples() {
        let obs = table3();
        let t12 = difference_statistic(&obs, 1, 2).unwrap();
        assert!((t12 - 0.00036935).abs() < 1e-8);
        assert!((t12 - 0.0004).abs() <= 5e-5);
        let t13 = difference_statistic(&obs, 1, 3).unwrap();
        assert!((t13 - 0.00067423).abs() < 1e-8);
        assert_eq!(difference_statistic(&obs, 3, 3).unwrap(), 0.0);
        assert_eq!(
            difference_statistic(&obs, 1, 42),
            Err(Error::EmptyBucket(42))
        );
    }

    #[test]
    fn count_bucket_parsing() {
        assert_eq!(">10".parse::<SizeBucket>().unwrap(), SizeBucket::Over10);
        assert_eq!("3".parse::<SizeBucket>().unwrap(), SizeBucket::Size(3));
        assert_eq!("12".parse::<SizeBucket>().unwrap(), SizeBucket::Over10);
        assert!("0".parse::<SizeBucket>().is_err());
        let bad = [CountRow {
            size: SizeBucket::Size(1),
            reactions: 5,
            total: 4,
        }];
        assert!(expand_counts(&bad).is_err());
    }

    fn two_buckets(r1: u64, n1: u64, r2: u64, n2: u64) -> Vec<TweetObservation> {
        expand_counts(&[
            CountRow {
                size: SizeBucket::Size(1),
                reactions: r1,
                total: n1,
            },
            CountRow {
                size: SizeBucket::Size(2),
                reactions: r2,
                total: n2,
            },
        ])
        .unwrap()
    }

    #[test]
    fn permutation_null_true() {
        let obs = two_buckets(100, 2000, 100, 2000);
        let r = permutation_test(&obs, 1, 2, 1000, 11).unwrap();
        assert_eq!(r.t_obs, 0.0);
        assert!((0.3..=0.7).contains(&r.p_value), "p = {}", r.p_value);
    }

    #[test]
    fn permutation_detects_difference() {
        let obs = two_buckets(200, 2000, 100, 2000);
        let r = permutation_test(&obs, 1, 2, 500, 3).unwrap();
        assert_eq!(r.p_value, 1.0 / 501.0);
        let flipped = permutation_test(&obs, 2, 1, 500, 3).unwrap();
        assert!(flipped.p_value > 0.99);
    }

    #[test]
    fn permutation_is_seed_stable_and_validated() {
        let obs = two_buckets(30, 500, 20, 400);
        let a = permutation_test(&obs, 1, 2, 200, 5).unwrap();
        let b = permutation_test(&obs, 1, 2, 200, 5).unwrap();
        assert_eq!(a, b);
        assert!(permutation_test(&obs, 1, 2, 0, 5).is_err());
        assert_eq!(
            permutation_test(&obs, 1, 7, 10, 5),
            Err(Error::EmptyBucket(7))
        );
    }

    #[test]
    fn interevent_examples() {
        let h = 3600;
        assert_eq!(
            interevent_times(&[0, 7 * h, 17 * h]).unwrap(),
            vec![7.0, 10.0]
        );
        assert_eq!(
            interevent_times(&[5]),
            Err(Error::TooFewSamples { needed: 2, got: 1 })
        );
        assert_eq!(interevent_times(&[0, 0, h]).unwrap(), vec![1.0]);
        assert_eq!(
            interevent_histogram(&[0.5, 7.0, 10.2, 99.0], 24)[..],
            {
                let mut v = vec![0u64; 25];
                v[0] = 1;
                v[7] = 1;
                v[10] = 1;
                v[24] = 1;
                v
            }[..]
        );
    }

    #[test]
    fn alpha_closed_form() {
        let taus = vec![2.0 * std::f64::consts::E; 50];
        assert!((powerlaw_alpha(&taus, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            powerlaw_alpha(&[5.0; 9], 1.0),
            Err(Error::TooFewSamples { needed: 10, got: 9 })
        ));
        assert!(powerlaw_alpha(&[1.0; 20], 1.0).is_err());
        assert!(powerlaw_alpha(&[1.0; 20], 0.0).is_err());
    }
}
