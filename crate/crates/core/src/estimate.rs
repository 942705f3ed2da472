//! Follower parameter estimation from activity traces.
//!
//! * login slot: lower median of the slots of session-start events, where a
//!   session starts after an inactive gap longer than `gap_hours`;
//! * quit tendency: `rho = 1 / (1 + mu)` with `mu` the mean per-session depth
//!   of the deepest followee post the follower reacted to;
//! * monotony tolerance: reaction rate towards the producer, normalized by
//!   the strongest tie in the follower population;
//! * competitor load: followee posts per slot per day, excluding the producer.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FollowerProfile, ProblemInstance, SurvivalConfig};
use crate::objective::mean_center_rows;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Post,
    Retweet,
    Reply,
}

impl EventKind {
    pub fn is_reaction(self) -> bool {
        self != EventKind::Post
    }
}

/// One line of a trace. Reactions name the author they target and, when
/// known, the timestamp of the targeted post; without it the newest post of
/// that author at reaction time is assumed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    pub user: String,
    pub ts: i64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ts: Option<i64>,
}

impl TraceEvent {
    pub fn post(user: impl Into<String>, ts: i64) -> Self {
        TraceEvent {
            user: user.into(),
            ts,
            kind: EventKind::Post,
            target_author: None,
            target_ts: None,
        }
    }

    pub fn reaction(
        user: impl Into<String>,
        ts: i64,
        kind: EventKind,
        target_author: impl Into<String>,
        target_ts: Option<i64>,
    ) -> Self {
        TraceEvent {
            user: user.into(),
            ts,
            kind,
            target_author: Some(target_author.into()),
            target_ts,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        match (self.kind.is_reaction(), &self.target_author) {
            (true, None) => Err(format!("{:?} event needs target_author", self.kind)),
            (false, Some(_)) => Err("post events cannot have target_author".into()),
            (false, None) if self.target_ts.is_some() => {
                Err("post events cannot have target_ts".into())
            }
            _ => Ok(()),
        }
    }
}

/// Events sorted by timestamp (stable), indexed by user and by author.
#[derive(Debug, Clone, Default)]
pub struct ActivityTrace {
    events: Vec<TraceEvent>,
    tz_offset_minutes: i32,
    by_user: HashMap<String, Vec<usize>>,
    posts_by_author: HashMap<String, Vec<usize>>,
}

impl ActivityTrace {
    pub fn new(mut events: Vec<TraceEvent>, tz_offset_minutes: i32) -> Result<Self> {
        for (line, e) in events.iter().enumerate() {
            e.validate().map_err(|message| Error::Parse {
                line: line + 1,
                message,
            })?;
        }
        events.sort_by_key(|e| e.ts);
        let mut by_user: HashMap<String, Vec<usize>> = HashMap::new();
        let mut posts_by_author: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in events.iter().enumerate() {
            by_user.entry(e.user.clone()).or_default().push(i);
            if e.kind == EventKind::Post {
                posts_by_author.entry(e.user.clone()).or_default().push(i);
            }
        }
        Ok(ActivityTrace {
            events,
            tz_offset_minutes,
            by_user,
            posts_by_author,
        })
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn event(&self, index: usize) -> &TraceEvent {
        &self.events[index]
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn tz_offset_minutes(&self) -> i32 {
        self.tz_offset_minutes
    }

    /// Indices of a user's events, ascending in time.
    pub fn user_event_indices(&self, user: &str) -> &[usize] {
        self.by_user.get(user).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn user_events(&self, user: &str) -> impl Iterator<Item = &TraceEvent> + '_ {
        self.user_event_indices(user)
            .iter()
            .map(|&i| &self.events[i])
    }

    /// Indices of an author's posts, ascending in time.
    pub fn post_indices(&self, author: &str) -> &[usize] {
        self.posts_by_author
            .get(author)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn local_day(&self, ts: i64) -> i64 {
        (ts + 60 * self.tz_offset_minutes as i64).div_euclid(SECONDS_PER_DAY)
    }

    /// Local calendar days covered from the first to the last event.
    pub fn window_days(&self) -> Option<u64> {
        let first = self.events.first()?;
        let last = self.events.last()?;
        Some((self.local_day(last.ts) - self.local_day(first.ts) + 1) as u64)
    }

    /// The post a reaction refers to: the newest post by its target author
    /// no later than `target_ts` (or the reaction time).
    pub fn resolve_target(&self, reaction: &TraceEvent) -> Option<usize> {
        let author = reaction.target_author.as_deref()?;
        let limit = reaction.target_ts.unwrap_or(reaction.ts).min(reaction.ts);
        let posts = self.post_indices(author);
        let upto = posts.partition_point(|&i| self.events[i].ts <= limit);
        upto.checked_sub(1).map(|k| posts[k])
    }
}

/// Directed follow edges (follower -> followee).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FollowGraph {
    followees: BTreeMap<String, BTreeSet<String>>,
    followers: BTreeMap<String, BTreeSet<String>>,
}

impl FollowGraph {
    pub fn new() -> Self {
        FollowGraph::default()
    }

    pub fn from_edges<I, A, B>(edges: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut graph = FollowGraph::new();
        for (a, b) in edges {
            graph.add_edge(a, b);
        }
        graph
    }

    /// Adds an edge; self-loops and duplicates are ignored. Returns whether
    /// the graph changed.
    pub fn add_edge(&mut self, follower: impl Into<String>, followee: impl Into<String>) -> bool {
        let (follower, followee) = (follower.into(), followee.into());
        if follower == followee {
            return false;
        }
        let added = self
            .followees
            .entry(follower.clone())
            .or_default()
            .insert(followee.clone());
        self.followers.entry(followee).or_default().insert(follower);
        added
    }

    pub fn followees_of(&self, user: &str) -> impl Iterator<Item = &str> + '_ {
        self.followees
            .get(user)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn followers_of(&self, user: &str) -> impl Iterator<Item = &str> + '_ {
        self.followers
            .get(user)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn follows(&self, follower: &str, followee: &str) -> bool {
        self.followees
            .get(follower)
            .is_some_and(|s| s.contains(followee))
    }

    /// Users that follow at least one account, in sorted order.
    pub fn readers(&self) -> impl Iterator<Item = &str> + '_ {
        self.followees.keys().map(String::as_str)
    }

    pub fn contains_user(&self, user: &str) -> bool {
        self.followees.contains_key(user) || self.followers.contains_key(user)
    }

    pub fn edge_count(&self) -> usize {
        self.followees.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.followees.is_empty()
    }
}

pub fn slot_of(ts: i64, slots: usize, tz_offset_minutes: i32) -> Result<usize> {
    if slots == 0 || SECONDS_PER_DAY % slots as i64 != 0 {
        return Err(Error::BadSlotCount(slots));
    }
    let width = SECONDS_PER_DAY / slots as i64;
    let local = (ts + 60 * tz_offset_minutes as i64).rem_euclid(SECONDS_PER_DAY);
    Ok((local / width) as usize)
}

fn gap_seconds(gap_hours: f64) -> f64 {
    gap_hours * 3600.0
}

/// Splits ascending timestamps into sessions separated by gaps longer than
/// `gap_hours`. Returns the index of the first event of each session.
pub fn session_starts(timestamps: &[i64], gap_hours: f64) -> Vec<usize> {
    let gap = gap_seconds(gap_hours);
    (0..timestamps.len())
        .filter(|&k| k == 0 || (timestamps[k] - timestamps[k - 1]) as f64 > gap)
        .collect()
}

/// Lower median of the session-start slots.
pub fn estimate_login_slot(
    timestamps: &[i64],
    slots: usize,
    tz_offset_minutes: i32,
    gap_hours: f64,
) -> Result<usize> {
    if timestamps.is_empty() {
        return Err(Error::Estimation(
            "login slot needs at least one event".into(),
        ));
    }
    let mut sorted = timestamps.to_vec();
    sorted.sort_unstable();
    let mut start_slots = session_starts(&sorted, gap_hours)
        .into_iter()
        .map(|k| slot_of(sorted[k], slots, tz_offset_minutes))
        .collect::<Result<Vec<_>>>()?;
    Ok(lower_median(&mut start_slots))
}

pub(crate) fn lower_median<T: Ord + Copy>(values: &mut [T]) -> T {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn estimate_rho(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean consumption depth must be non-negative, got {mu}"
        )));
    }
    Ok(1.0 / (1.0 + mu))
}

/// Event indices of every post on `user`'s timeline, newest first; equal
/// timestamps order by author, then by trace position.
pub fn timeline_indices(user: &str, graph: &FollowGraph, trace: &ActivityTrace) -> Vec<usize> {
    let mut posts: Vec<usize> = graph
        .followees_of(user)
        .flat_map(|author| trace.post_indices(author).iter().copied())
        .collect();
    posts.sort_by(|&a, &b| {
        let (ea, eb) = (trace.event(a), trace.event(b));
        eb.ts
            .cmp(&ea.ts)
            .then_with(|| ea.user.cmp(&eb.user))
            .then_with(|| a.cmp(&b))
    });
    posts
}

/// Per-session depth of the deepest followee post `follower` reacted to.
/// Sessions without a locatable reaction contribute no sample.
pub fn consumption_depth_samples(
    follower: &str,
    graph: &FollowGraph,
    trace: &ActivityTrace,
    gap_hours: f64,
) -> Vec<u64> {
    let timeline = timeline_indices(follower, graph, trace);
    let position: HashMap<usize, usize> = timeline
        .iter()
        .enumerate()
        .map(|(p, &idx)| (idx, p))
        .collect();
    let own = trace.user_event_indices(follower);
    let stamps: Vec<i64> = own.iter().map(|&i| trace.event(i).ts).collect();
    let starts = session_starts(&stamps, gap_hours);

    let mut samples = Vec::new();
    for (s, &begin) in starts.iter().enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(own.len());
        let deepest = own[begin..end]
            .iter()
            .map(|&i| trace.event(i))
            .filter(|e| e.kind.is_reaction())
            .filter_map(|e| {
                let target = trace.resolve_target(e)?;
                let p = *position.get(&target)?;
                // posts newer than the reaction are not yet on the timeline
                let newer = timeline.partition_point(|&k| trace.event(k).ts > e.ts);
                Some((p - newer + 1) as u64)
            })
            .max();
        samples.extend(deepest);
    }
    samples
}

/// Mean per-session consumption depth, or `fallback` for followers who
/// never reacted to a locatable post.
pub fn consumption_depth_mu(
    follower: &str,
    graph: &FollowGraph,
    trace: &ActivityTrace,
    gap_hours: f64,
    fallback: Option<f64>,
) -> Result<f64> {
    let samples = consumption_depth_samples(follower, graph, trace, gap_hours);
    if samples.is_empty() {
        return fallback.ok_or_else(|| {
            Error::Estimation(format!(
                "follower {follower:?} has no reactions and no fallback depth is configured"
            ))
        });
    }
    Ok(samples.iter().sum::<u64>() as f64 / samples.len() as f64)
}

/// Raw tie strength: reactions by `follower` targeting `producer`, per
/// producer post in the trace.
pub fn estimate_delta(follower: &str, producer: &str, trace: &ActivityTrace) -> Result<f64> {
    let posts = trace.post_indices(producer).len();
    if posts == 0 {
        return Err(Error::Estimation(format!(
            "producer {producer:?} has no posts in the trace window"
        )));
    }
    let reactions = trace
        .user_events(follower)
        .filter(|e| e.kind.is_reaction() && e.target_author.as_deref() == Some(producer))
        .count();
    Ok(reactions as f64 / posts as f64)
}

/// Scales raw tie strengths by the population maximum; `default` when
/// every tie is zero.
pub fn normalize_ties(raw: &[f64], default: f64) -> Vec<f64> {
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![default; raw.len()];
    }
    raw.iter().map(|s| (s / max).clamp(0.0, 1.0)).collect()
}

pub fn aggregate_competitors(
    follower: &str,
    producer: &str,
    graph: &FollowGraph,
    trace: &ActivityTrace,
    slots: usize,
) -> Result<Vec<f64>> {
    let days = trace
        .window_days()
        .ok_or_else(|| Error::Estimation("empty trace window".into()))?;
    let mut load = vec![0.0; slots];
    for competitor in graph.followees_of(follower).filter(|c| *c != producer) {
        for &i in trace.post_indices(competitor) {
            load[slot_of(trace.event(i).ts, slots, trace.tz_offset_minutes())?] += 1.0;
        }
    }
    for c in &mut load {
        *c /= days as f64;
    }
    Ok(load)
}

/// Event counts per (user, slot), one row per requested user.
pub fn activity_histogram(
    users: &[&str],
    trace: &ActivityTrace,
    slots: usize,
    mean_center: bool,
) -> Result<Vec<Vec<f64>>> {
    slot_of(0, slots, 0)?;
    let mut rows = Vec::with_capacity(users.len());
    for user in users {
        let mut row = vec![0.0; slots];
        for e in trace.user_events(user) {
            row[slot_of(e.ts, slots, trace.tz_offset_minutes())?] += 1.0;
        }
        rows.push(row);
    }
    if mean_center {
        mean_center_rows(&mut rows);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    #[default]
    Uniform,
    /// Share of the follower's events that are reactions.
    ReactionRate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub gap_hours: f64,
    pub delta_fallback: f64,
    /// Depth used when no follower reacted at all.
    pub mu_fallback: Option<f64>,
    pub gamma: GammaMode,
    pub survival: SurvivalConfig,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            gap_hours: 8.0,
            delta_fallback: 0.5,
            mu_fallback: None,
            gamma: GammaMode::Uniform,
            survival: SurvivalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimation {
    pub instance: ProblemInstance,
    /// Followers of the producer with no events, left out of the instance.
    pub skipped: Vec<String>,
    /// Followers whose depth came from the population fallback.
    pub depth_fallbacks: Vec<String>,
}

/// Assembles the producer's follower population into a problem instance.
pub fn build_instance(
    producer: &str,
    graph: &FollowGraph,
    trace: &ActivityTrace,
    slots: usize,
    budget: u64,
    config: &EstimateConfig,
) -> Result<Estimation> {
    slot_of(0, slots, 0)?;
    if !graph.contains_user(producer) {
        return Err(Error::Estimation(format!(
            "producer {producer:?} not found in the follow graph"
        )));
    }
    let all_followers: Vec<&str> = graph.followers_of(producer).collect();
    if all_followers.is_empty() {
        return Err(Error::Estimation(format!(
            "producer {producer:?} has no followers"
        )));
    }
    let (active, skipped): (Vec<&str>, Vec<&str>) = all_followers
        .iter()
        .partition(|f| !trace.user_event_indices(f).is_empty());
    if active.is_empty() {
        return Err(Error::Estimation(format!(
            "none of the {} followers of {producer:?} has any activity",
            all_followers.len()
        )));
    }

    let tz = trace.tz_offset_minutes();
    let mut sigmas = Vec::with_capacity(active.len());
    for f in &active {
        let stamps: Vec<i64> = trace.user_events(f).map(|e| e.ts).collect();
        sigmas.push(estimate_login_slot(&stamps, slots, tz, config.gap_hours)?);
    }

    let measured: Vec<Option<f64>> = active
        .iter()
        .map(|f| consumption_depth_mu(f, graph, trace, config.gap_hours, None).ok())
        .collect();
    let mut observed: Vec<f64> = measured.iter().flatten().copied().collect();
    let population_mu = if observed.is_empty() {
        config.mu_fallback
    } else {
        Some(median(&mut observed))
    };
    let mut depth_fallbacks = Vec::new();
    let mut rhos = Vec::with_capacity(active.len());
    for (f, mu) in active.iter().zip(&measured) {
        let mu = match mu {
            Some(mu) => *mu,
            None => {
                depth_fallbacks.push(f.to_string());
                population_mu.ok_or_else(|| {
                    Error::Estimation(
                        "no follower reacted to any timeline post and no fallback depth is configured"
                            .into(),
                    )
                })?
            }
        };
        rhos.push(estimate_rho(mu)?);
    }

    let deltas = if trace.post_indices(producer).is_empty() {
        vec![config.delta_fallback; active.len()]
    } else {
        let raw = active
            .iter()
            .map(|f| estimate_delta(f, producer, trace))
            .collect::<Result<Vec<_>>>()?;
        normalize_ties(&raw, config.delta_fallback)
    };

    let mut followers = Vec::with_capacity(active.len());
    for (k, f) in active.iter().enumerate() {
        let gamma = match config.gamma {
            GammaMode::Uniform => 1.0,
            GammaMode::ReactionRate => {
                let events = trace.user_event_indices(f).len();
                let reactions = trace
                    .user_events(f)
                    .filter(|e| e.kind.is_reaction())
                    .count();
                reactions as f64 / events as f64
            }
        };
        let load = aggregate_competitors(f, producer, graph, trace, slots)?;
        followers.push(FollowerProfile::new(
            *f, sigmas[k], rhos[k], deltas[k], gamma, load,
        ));
    }

    let instance =
        ProblemInstance::new(slots, budget, followers)?.with_survival(config.survival)?;
    Ok(Estimation {
        instance,
        skipped: skipped.into_iter().map(str::to_owned).collect(),
        depth_fallbacks,
    })
}
