//! Domain types and the parametric survival family.
//!
//! Two survival functions drive the objective. The follower survival
//! `F(d; rho)` is the probability that a follower scrolls at least down to the
//! post at depth `d`; the cluster survival `C(x; delta)` is the probability
//! that a run of `x` consecutive producer posts is not skipped. Both default
//! to geometric forms derived from the follower's `rho` and `delta`:
//!
//! * `F(d) = (1 - rho)^d`
//! * `C(x) = delta^(x - 1)` (singletons always survive), or `delta^x` when
//!   [`ClusterExponent::Size`] is selected.
//!
//! Other families need explicit per-follower parameters
//! ([`FollowerProfile::follower_params`] / [`FollowerProfile::cluster_params`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurvivalFamily {
    Exponential,
    #[default]
    Geometric,
    Weibull,
    #[serde(alias = "log-logistic", alias = "log_logistic")]
    LogLogistic,
    Rayleigh,
}

impl SurvivalFamily {
    pub const ALL: [SurvivalFamily; 5] = [
        SurvivalFamily::Exponential,
        SurvivalFamily::Geometric,
        SurvivalFamily::Weibull,
        SurvivalFamily::LogLogistic,
        SurvivalFamily::Rayleigh,
    ];

    pub fn uses_shape(self) -> bool {
        matches!(self, SurvivalFamily::Weibull | SurvivalFamily::LogLogistic)
    }
}

impl std::fmt::Display for SurvivalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SurvivalFamily::Exponential => "exponential",
            SurvivalFamily::Geometric => "geometric",
            SurvivalFamily::Weibull => "weibull",
            SurvivalFamily::LogLogistic => "loglogistic",
            SurvivalFamily::Rayleigh => "rayleigh",
        };
        f.write_str(name)
    }
}

/// A member of the survival family with its scale `lambda` and shape `p`.
/// `p` is ignored by the single-parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalModel {
    pub family: SurvivalFamily,
    pub lambda: f64,
    #[serde(default = "unit_shape")]
    pub p: f64,
}

fn unit_shape() -> f64 {
    1.0
}

impl SurvivalModel {
    pub fn new(family: SurvivalFamily, lambda: f64, p: f64) -> Result<Self> {
        let model = SurvivalModel { family, lambda, p };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let lambda = self.lambda;
        match self.family {
            SurvivalFamily::Geometric => {
                if !(lambda > 0.0 && lambda <= 1.0) {
                    return Err(Error::ParameterOutOfRange {
                        name: "lambda",
                        value: lambda,
                        bound: "geometric requires 0 < lambda <= 1",
                    });
                }
            }
            family => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::ParameterOutOfRange {
                        name: "lambda",
                        value: lambda,
                        bound: "lambda > 0",
                    });
                }
                if family.uses_shape() && !(self.p > 0.0 && self.p.is_finite()) {
                    return Err(Error::ParameterOutOfRange {
                        name: "p",
                        value: self.p,
                        bound: "p > 0",
                    });
                }
            }
        }
        Ok(())
    }

    /// Evaluates the survival function, assuming validated parameters and
    /// `x >= 0`.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let l = self.lambda;
        match self.family {
            SurvivalFamily::Exponential => (-l * x).exp(),
            SurvivalFamily::Geometric => (1.0 - l).powf(x),
            SurvivalFamily::Weibull => (-l * x.powf(self.p)).exp(),
            SurvivalFamily::LogLogistic => 1.0 / (1.0 + l * x.powf(self.p)),
            SurvivalFamily::Rayleigh => (-(x * x) / (2.0 * l * l)).exp(),
        }
    }
}

pub fn survival_eval(model: &SurvivalModel, x: f64) -> Result<f64> {
    model.validate()?;
    if !(x >= 0.0) {
        return Err(Error::NegativeArgument(x));
    }
    Ok(model.eval_unchecked(x).clamp(0.0, 1.0))
}

/// Whether a cluster of `x` posts is scored as `C(x - 1)` or `C(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterExponent {
    #[default]
    SizeMinusOne,
    Size,
}

impl ClusterExponent {
    fn argument(self, x: u64) -> f64 {
        match self {
            ClusterExponent::SizeMinusOne => (x - 1) as f64,
            ClusterExponent::Size => x as f64,
        }
    }
}

/// Family selectors shared by every follower of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurvivalConfig {
    pub follower_family: SurvivalFamily,
    pub cluster_family: SurvivalFamily,
    pub cluster_exponent: ClusterExponent,
}

/// Explicit `lambda`/`p` for a non-geometric family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalParams {
    pub lambda: f64,
    #[serde(default = "unit_shape")]
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub posts: Vec<u64>,
}

impl Schedule {
    pub fn new(posts: Vec<u64>) -> Self {
        Schedule { posts }
    }

    pub fn zeros(slots: usize) -> Self {
        Schedule {
            posts: vec![0; slots],
        }
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.posts.iter().sum()
    }

    pub fn with_added(&self, slot: usize) -> Schedule {
        let mut next = self.clone();
        next.posts[slot] += 1;
        next
    }

    /// Rotates forward by `offset`: the post count in slot `s` moves to slot
    /// `(s + offset) mod S`.
    pub fn rotated(&self, offset: usize) -> Schedule {
        Schedule {
            posts: rotate_forward(&self.posts, offset),
        }
    }
}

impl From<Vec<u64>> for Schedule {
    fn from(posts: Vec<u64>) -> Self {
        Schedule { posts }
    }
}

pub(crate) fn rotate_forward<T: Clone>(values: &[T], offset: usize) -> Vec<T> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out = values.to_vec();
    for (s, v) in values.iter().enumerate() {
        out[(s + offset) % n] = v.clone();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerProfile {
    pub id: String,
    /// Login slot: the follower reads the timeline at the end of this slot.
    pub sigma: usize,
    /// Per-post quit probability.
    pub rho: f64,
    /// Monotony tolerance; 1 never skips a cluster, 0 skips every multi-post one.
    pub delta: f64,
    pub gamma: f64,
    /// Mean daily competitor posts per slot.
    pub competitor_load: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follower_params: Option<SurvivalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_params: Option<SurvivalParams>,
}

impl FollowerProfile {
    pub fn new(
        id: impl Into<String>,
        sigma: usize,
        rho: f64,
        delta: f64,
        gamma: f64,
        competitor_load: Vec<f64>,
    ) -> Self {
        FollowerProfile {
            id: id.into(),
            sigma,
            rho,
            delta,
            gamma,
            competitor_load,
            follower_params: None,
            cluster_params: None,
        }
    }

    pub fn validate(&self, slots: usize) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInstance(what));
        if !(0.0..=1.0).contains(&self.rho) {
            return bad(format!(
                "follower {:?}: rho {} not in [0, 1]",
                self.id, self.rho
            ));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return bad(format!(
                "follower {:?}: delta {} not in [0, 1]",
                self.id, self.delta
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("follower {:?}: gamma {} < 0", self.id, self.gamma));
        }
        if self.sigma >= slots {
            return bad(format!(
                "follower {:?}: sigma {} outside 0..{}",
                self.id, self.sigma, slots
            ));
        }
        if self.competitor_load.len() != slots {
            return Err(Error::LengthMismatch {
                what: format!("competitor_load of follower {:?}", self.id),
                expected: slots,
                actual: self.competitor_load.len(),
            });
        }
        if let Some(c) = self
            .competitor_load
            .iter()
            .find(|c| !(**c >= 0.0 && c.is_finite()))
        {
            return bad(format!(
                "follower {:?}: negative competitor load {}",
                self.id, c
            ));
        }
        Ok(())
    }

    pub(crate) fn follower_kernel(&self, family: SurvivalFamily) -> Result<Kernel> {
        kernel(
            family,
            self.follower_params,
            1.0 - self.rho,
            &self.id,
            "follower",
        )
    }

    pub(crate) fn cluster_kernel(&self, family: SurvivalFamily) -> Result<Kernel> {
        kernel(family, self.cluster_params, self.delta, &self.id, "cluster")
    }
}

fn kernel(
    family: SurvivalFamily,
    params: Option<SurvivalParams>,
    retain: f64,
    id: &str,
    which: &str,
) -> Result<Kernel> {
    match (family, params) {
        (_, Some(params)) => {
            let model = SurvivalModel::new(family, params.lambda, params.p)?;
            Ok(Kernel::Model(model))
        }
        // rho = 0 and delta = 1 are degenerate geometric members (constant 1)
        // outside the open lambda range, so evaluate the retention power
        // directly.
        (SurvivalFamily::Geometric, None) => Ok(Kernel::Retain(retain)),
        (family, None) => Err(Error::InvalidInstance(format!(
            "follower {id:?}: {which} family {family} needs explicit lambda parameters"
        ))),
    }
}

/// A resolved survival function ready for repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kernel {
    /// `q^x`
    Retain(f64),
    Model(SurvivalModel),
}

impl Kernel {
    #[inline]
    pub(crate) fn at(&self, x: f64) -> f64 {
        match self {
            Kernel::Retain(q) => q.powf(x),
            Kernel::Model(m) => m.eval_unchecked(x),
        }
    }
}

/// Probability that `follower` scrolls at least to depth `d`.
pub fn follower_survival(
    follower: &FollowerProfile,
    config: &SurvivalConfig,
    d: f64,
) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::NegativeArgument(d));
    }
    let kernel = follower.follower_kernel(config.follower_family)?;
    Ok(kernel.at(d).clamp(0.0, 1.0))
}

/// Probability that a cluster of `x >= 1` producer posts is not skipped.
pub fn cluster_survival(
    follower: &FollowerProfile,
    config: &SurvivalConfig,
    x: u64,
) -> Result<f64> {
    if x == 0 {
        return Err(Error::EmptyCluster);
    }
    let kernel = follower.cluster_kernel(config.cluster_family)?;
    Ok(kernel
        .at(config.cluster_exponent.argument(x))
        .clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub slots: usize,
    pub budget: u64,
    pub followers: Vec<FollowerProfile>,
    #[serde(default)]
    pub follower_survival_family: SurvivalFamily,
    #[serde(default)]
    pub cluster_survival_family: SurvivalFamily,
    #[serde(default)]
    pub cluster_exponent: ClusterExponent,
}

impl ProblemInstance {
    /// Builds an instance with geometric follower and cluster survival.
    pub fn new(slots: usize, budget: u64, followers: Vec<FollowerProfile>) -> Result<Self> {
        let instance = ProblemInstance {
            slots,
            budget,
            followers,
            follower_survival_family: SurvivalFamily::Geometric,
            cluster_survival_family: SurvivalFamily::Geometric,
            cluster_exponent: ClusterExponent::SizeMinusOne,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn with_survival(mut self, config: SurvivalConfig) -> Result<Self> {
        self.follower_survival_family = config.follower_family;
        self.cluster_survival_family = config.cluster_family;
        self.cluster_exponent = config.cluster_exponent;
        self.validate()?;
        Ok(self)
    }

    pub fn survival_config(&self) -> SurvivalConfig {
        SurvivalConfig {
            follower_family: self.follower_survival_family,
            cluster_family: self.cluster_survival_family,
            cluster_exponent: self.cluster_exponent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(Error::InvalidInstance(
                "slot count must be at least 1".into(),
            ));
        }
        for f in &self.followers {
            f.validate(self.slots)?;
            f.follower_kernel(self.follower_survival_family)?;
            f.cluster_kernel(self.cluster_survival_family)?;
        }
        Ok(())
    }

    pub fn check_schedule(&self, schedule: &Schedule) -> Result<()> {
        if schedule.len() != self.slots {
            return Err(Error::LengthMismatch {
                what: "schedule".into(),
                expected: self.slots,
                actual: schedule.len(),
            });
        }
        Ok(())
    }

    pub fn check_feasible(&self, schedule: &Schedule) -> Result<()> {
        self.check_schedule(schedule)?;
        let used = schedule.total();
        if used > self.budget {
            return Err(Error::Infeasible {
                used,
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// The same population with every competitor load rounded half-up.
    pub fn with_rounded_loads(&self) -> ProblemInstance {
        let mut out = self.clone();
        for f in &mut out.followers {
            for c in &mut f.competitor_load {
                *c = (*c + 0.5).floor();
            }
        }
        out
    }

    /// Rotates the schedule frame by `offset` slots: every competitor load
    /// and login slot moves forward by `offset`.
    pub fn rotated(&self, offset: usize) -> ProblemInstance {
        let mut out = self.clone();
        for f in &mut out.followers {
            f.sigma = (f.sigma + offset) % self.slots;
            f.competitor_load = rotate_forward(&f.competitor_load, offset);
        }
        out
    }
}
