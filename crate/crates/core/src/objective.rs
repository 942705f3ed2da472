//! Attention potential of a broadcast schedule.
//!
//! For follower `j` logging in at the end of slot `sigma_j`, the producer
//! cluster at position `i` from the top of the timeline was broadcast in slot
//! `(sigma_j - i) mod S`. Above it sit `v_ij` competitor posts from the same
//! slot, and above those every newer cluster. With `z_ij` posts above the
//! first post of the cluster, its attention potential is
//!
//! ```text
//! f_ij = C(x_ij; delta_j) * sum_{k=1..x_ij} F(z_ij + k; rho_j)
//! ```
//!
//! and the schedule total is `sum_j gamma_j sum_i f_ij`. Only the last day of
//! posts is evaluated: the follower never scrolls past the previous login.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ClusterExponent, FollowerProfile, Kernel, ProblemInstance, Schedule, SurvivalConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterView {
    /// Position from the top of the timeline, 0 = newest.
    pub position: usize,
    pub producer_count: u64,
    /// Competitor posts directly above this cluster.
    pub competitor_above: f64,
    /// Posts above the first producer post of the cluster.
    pub depth_offset: f64,
    /// Broadcast slot the cluster came from.
    pub source_slot: usize,
}

#[inline]
pub(crate) fn source_slot(sigma: usize, position: usize, slots: usize) -> usize {
    (sigma + slots - position % slots) % slots
}

pub fn timeline_view(schedule: &Schedule, follower: &FollowerProfile) -> Result<Vec<ClusterView>> {
    let slots = schedule.len();
    if follower.competitor_load.len() != slots {
        return Err(Error::LengthMismatch {
            what: format!("competitor_load of follower {:?}", follower.id),
            expected: slots,
            actual: follower.competitor_load.len(),
        });
    }
    if follower.sigma >= slots {
        return Err(Error::InvalidInstance(format!(
            "login slot {} outside 0..{}",
            follower.sigma, slots
        )));
    }
    let mut depth = 0.0;
    let mut views = Vec::with_capacity(slots);
    for position in 0..slots {
        let slot = source_slot(follower.sigma, position, slots);
        let x = schedule.posts[slot];
        let v = follower.competitor_load[slot];
        depth += v;
        views.push(ClusterView {
            position,
            producer_count: x,
            competitor_above: v,
            depth_offset: depth,
            source_slot: slot,
        });
        depth += x as f64;
    }
    Ok(views)
}

/// Resolved survival kernels for one follower.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FollowerKernels {
    pub(crate) follower: Kernel,
    pub(crate) cluster: Kernel,
    pub(crate) exponent: ClusterExponent,
}

impl FollowerKernels {
    pub(crate) fn resolve(follower: &FollowerProfile, config: &SurvivalConfig) -> Result<Self> {
        Ok(FollowerKernels {
            follower: follower.follower_kernel(config.follower_family)?,
            cluster: follower.cluster_kernel(config.cluster_family)?,
            exponent: config.cluster_exponent,
        })
    }

    #[inline]
    pub(crate) fn cluster_survival(&self, x: u64) -> f64 {
        let arg = match self.exponent {
            ClusterExponent::SizeMinusOne => (x - 1) as f64,
            ClusterExponent::Size => x as f64,
        };
        self.cluster.at(arg).clamp(0.0, 1.0)
    }

    #[inline]
    pub(crate) fn depth_survival(&self, d: f64) -> f64 {
        self.follower.at(d).clamp(0.0, 1.0)
    }

    #[inline]
    fn cluster_value(&self, x: u64, depth: f64) -> f64 {
        if x == 0 {
            return 0.0;
        }
        let reach: f64 = (1..=x).map(|k| self.depth_survival(depth + k as f64)).sum();
        self.cluster_survival(x) * reach
    }
}

pub fn cluster_attention(
    view: &ClusterView,
    follower: &FollowerProfile,
    config: &SurvivalConfig,
) -> Result<f64> {
    let kernels = FollowerKernels::resolve(follower, config)?;
    Ok(kernels.cluster_value(view.producer_count, view.depth_offset))
}

/// Reusable evaluator for one instance; kernels are resolved once.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    instance: &'a ProblemInstance,
    kernels: Vec<FollowerKernels>,
}

impl<'a> Objective<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Result<Self> {
        instance.validate()?;
        let config = instance.survival_config();
        let kernels = instance
            .followers
            .iter()
            .map(|f| FollowerKernels::resolve(f, &config))
            .collect::<Result<Vec<_>>>()?;
        Ok(Objective { instance, kernels })
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.instance
    }

    /// Unweighted `f_ij` for every cluster position of follower `j`.
    fn follower_clusters(&self, j: usize, posts: &[u64], mut visit: impl FnMut(usize, usize, f64)) {
        let follower = &self.instance.followers[j];
        let kernels = &self.kernels[j];
        let slots = self.instance.slots;
        let mut depth = 0.0;
        for position in 0..slots {
            let slot = source_slot(follower.sigma, position, slots);
            let x = posts[slot];
            depth += follower.competitor_load[slot];
            visit(position, slot, kernels.cluster_value(x, depth));
            depth += x as f64;
        }
    }

    /// `F(X)`, summed in follower order. The caller guarantees the length.
    pub fn total_unchecked(&self, posts: &[u64]) -> f64 {
        let mut total = 0.0;
        for (j, follower) in self.instance.followers.iter().enumerate() {
            let mut sum = 0.0;
            self.follower_clusters(j, posts, |_, _, f| sum += f);
            total += follower.gamma * sum;
        }
        total
    }

    pub fn total(&self, schedule: &Schedule) -> Result<f64> {
        self.instance.check_schedule(schedule)?;
        Ok(self.total_unchecked(&schedule.posts))
    }

    pub fn breakdown(&self, schedule: &Schedule) -> Result<AttentionBreakdown> {
        self.instance.check_schedule(schedule)?;
        let slots = self.instance.slots;
        let users = self.instance.followers.len();
        let mut per_cluster = vec![vec![0.0; users]; slots];
        let mut per_follower = vec![0.0; users];
        let mut per_source_slot = vec![0.0; slots];
        let mut total = 0.0;
        for (j, follower) in self.instance.followers.iter().enumerate() {
            let mut sum = 0.0;
            self.follower_clusters(j, &schedule.posts, |i, slot, f| {
                per_cluster[i][j] = f;
                per_source_slot[slot] += follower.gamma * f;
                sum += f;
            });
            per_follower[j] = sum;
            total += follower.gamma * sum;
        }
        Ok(AttentionBreakdown {
            per_cluster,
            per_follower,
            per_source_slot,
            total,
        })
    }
}

/// Per-cluster and aggregated attention of one schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionBreakdown {
    /// Unweighted `f_ij`, indexed `[cluster position][follower]`.
    pub per_cluster: Vec<Vec<f64>>,
    /// Unweighted `sum_i f_ij` per follower.
    pub per_follower: Vec<f64>,
    /// `gamma_j * f_ij` re-attributed to the broadcast slot of the cluster.
    pub per_source_slot: Vec<f64>,
    pub total: f64,
}

pub fn attention_potential(
    schedule: &Schedule,
    instance: &ProblemInstance,
) -> Result<AttentionBreakdown> {
    Objective::new(instance)?.breakdown(schedule)
}

/// Attention contributions as a (broadcast slot x login slot) matrix.
pub fn heatmap(
    schedule: &Schedule,
    instance: &ProblemInstance,
    mean_center: bool,
) -> Result<Vec<Vec<f64>>> {
    let objective = Objective::new(instance)?;
    instance.check_schedule(schedule)?;
    let slots = instance.slots;
    let mut cells = vec![vec![0.0; slots]; slots];
    for (j, follower) in instance.followers.iter().enumerate() {
        objective.follower_clusters(j, &schedule.posts, |_, slot, f| {
            cells[slot][follower.sigma] += follower.gamma * f;
        });
    }
    if mean_center {
        mean_center_rows(&mut cells);
    }
    Ok(cells)
}

pub fn mean_center_rows(rows: &mut [Vec<f64>]) {
    for row in rows.iter_mut() {
        if row.is_empty() {
            continue;
        }
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        for v in row.iter_mut() {
            *v -= mean;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_follower() -> FollowerProfile {
        FollowerProfile::new("u", 2, 0.5, 0.5, 1.0, vec![0.0, 1.0, 0.0])
    }

    fn hand_instance() -> ProblemInstance {
        ProblemInstance::new(3, 3, vec![hand_follower()]).unwrap()
    }

    #[test]
    fn view_of_hand_instance() {
        let views = timeline_view(&Schedule::new(vec![1, 0, 2]), &hand_follower()).unwrap();
        let got: Vec<_> = views
            .iter()
            .map(|v| {
                (
                    v.producer_count,
                    v.competitor_above,
                    v.depth_offset,
                    v.source_slot,
                )
            })
            .collect();
        assert_eq!(
            got,
            vec![(2, 0.0, 0.0, 2), (0, 1.0, 3.0, 1), (1, 0.0, 3.0, 0)]
        );
    }

    #[test]
    fn view_degenerate_cases() {
        let f = FollowerProfile::new("u", 0, 0.5, 0.5, 1.0, vec![0.0; 4]);
        let views = timeline_view(&Schedule::new(vec![3, 1, 4, 1]), &f).unwrap();
        assert_eq!(views[0].depth_offset, 0.0);

        let f = FollowerProfile::new("u", 0, 0.5, 0.5, 1.0, vec![2.5]);
        let views = timeline_view(&Schedule::new(vec![4]), &f).unwrap();
        assert_eq!(views.len(), 1);
        assert_eq!(views[0].producer_count, 4);
        assert_eq!(views[0].competitor_above, 2.5);
        assert_eq!(views[0].depth_offset, 2.5);

        assert!(matches!(
            timeline_view(&Schedule::new(vec![1, 2]), &f),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn source_slots_form_permutation_and_depth_grows() {
        let f = FollowerProfile::new("u", 3, 0.5, 0.5, 1.0, vec![0.5, 0.0, 2.0, 1.0, 0.0]);
        let views = timeline_view(&Schedule::new(vec![1, 0, 3, 0, 2]), &f).unwrap();
        let mut seen: Vec<_> = views.iter().map(|v| v.source_slot).collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
        assert!(views
            .windows(2)
            .all(|w| w[0].depth_offset <= w[1].depth_offset));
    }

    #[test]
    fn cluster_attention_examples() {
        let cfg = SurvivalConfig::default();
        let f = hand_follower();
        let view = |x, z| ClusterView {
            position: 0,
            producer_count: x,
            competitor_above: 0.0,
            depth_offset: z,
            source_slot: 0,
        };
        assert_eq!(cluster_attention(&view(2, 0.0), &f, &cfg).unwrap(), 0.375);
        assert_eq!(cluster_attention(&view(0, 5.0), &f, &cfg).unwrap(), 0.0);
        assert_eq!(cluster_attention(&view(1, 3.0), &f, &cfg).unwrap(), 0.0625);
    }

    #[test]
    fn hand_instance_total() {
        let b = attention_potential(&Schedule::new(vec![1, 0, 2]), &hand_instance()).unwrap();
        assert!((b.total - 0.4375).abs() < 1e-12);
        assert_eq!(b.per_cluster, vec![vec![0.375], vec![0.0], vec![0.0625]]);
        assert_eq!(b.per_source_slot, vec![0.0625, 0.0, 0.375]);
        assert_eq!(b.per_follower, vec![0.4375]);
    }

    #[test]
    fn zero_schedule_scores_zero() {
        let b = attention_potential(&Schedule::zeros(3), &hand_instance()).unwrap();
        assert_eq!(b.total, 0.0);
        assert!(b.per_cluster.iter().flatten().all(|f| *f == 0.0));
    }

    #[test]
    fn full_attention_counts_posts() {
        let f = FollowerProfile::new("u", 1, 0.0, 1.0, 1.0, vec![3.0, 0.5, 7.0]);
        let inst = ProblemInstance::new(3, 6, vec![f]).unwrap();
        let b = attention_potential(&Schedule::new(vec![2, 1, 3]), &inst).unwrap();
        assert_eq!(b.total, 6.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            attention_potential(&Schedule::zeros(2), &hand_instance()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn adding_a_post_can_lose_attention() {
        let f = FollowerProfile::new("u", 0, 0.5, 0.1, 1.0, vec![0.0, 0.0]);
        let inst = ProblemInstance::new(2, 2, vec![f]).unwrap();
        let one = attention_potential(&Schedule::new(vec![1, 0]), &inst)
            .unwrap()
            .total;
        let two = attention_potential(&Schedule::new(vec![2, 0]), &inst)
            .unwrap()
            .total;
        assert!((one - 0.5).abs() < 1e-15);
        assert!((two - 0.075).abs() < 1e-15);
        assert!(two < one);
    }

    #[test]
    fn heatmap_examples() {
        let inst = hand_instance();
        let zero = heatmap(&Schedule::zeros(3), &inst, false).unwrap();
        assert!(zero.iter().flatten().all(|v| *v == 0.0));

        let m = heatmap(&Schedule::new(vec![1, 0, 2]), &inst, false).unwrap();
        let column: Vec<f64> = m.iter().map(|row| row[2]).collect();
        assert_eq!(column, vec![0.0625, 0.0, 0.375]);
        assert!(m.iter().all(|row| row[0] == 0.0 && row[1] == 0.0));

        let centered = heatmap(&Schedule::new(vec![1, 0, 2]), &inst, true).unwrap();
        for row in &centered {
            assert!(row.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn breakdown_total_matches_weighted_sum() {
        let a = FollowerProfile::new("a", 0, 0.3, 0.7, 2.0, vec![1.0, 0.0, 2.0, 0.5]);
        let b = FollowerProfile::new("b", 2, 0.1, 0.2, 0.5, vec![0.0, 3.0, 0.0, 1.0]);
        let inst = ProblemInstance::new(4, 8, vec![a, b]).unwrap();
        let br = attention_potential(&Schedule::new(vec![2, 1, 0, 3]), &inst).unwrap();
        let mut sum = 0.0;
        for row in &br.per_cluster {
            for (j, f) in row.iter().enumerate() {
                assert!(*f >= 0.0);
                sum += inst.followers[j].gamma * f;
            }
        }
        assert!((sum - br.total).abs() <= 1e-9 * br.total.abs());
        let slot_sum: f64 = br.per_source_slot.iter().sum();
        assert!((slot_sum - br.total).abs() <= 1e-9 * br.total.abs());
    }
}
