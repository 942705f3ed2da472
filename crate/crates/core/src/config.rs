use serde::{Deserialize, Serialize};

use crate::analyze::DEFAULT_PERMUTATIONS;
use crate::error::{Error, Result};
use crate::estimate::{EstimateConfig, GammaMode, SECONDS_PER_DAY};
use crate::model::{ClusterExponent, SurvivalConfig, SurvivalFamily};
use crate::optimize::{HeuristicWindows, HourWindow, DEFAULT_ENUMERATION_CAP};

/// Run-wide settings, loadable from a JSON file. Every field has a default
/// except the post budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub slots: usize,
    pub budget: Option<u64>,
    pub tz_offset_minutes: i32,
    pub gap_hours: f64,
    pub follower_survival_family: SurvivalFamily,
    pub cluster_survival_family: SurvivalFamily,
    pub cluster_exponent: ClusterExponent,
    pub delta_fallback: f64,
    pub mu_fallback: Option<f64>,
    pub gamma: GammaMode,
    pub night: HourWindow,
    pub lunch: HourWindow,
    pub seed: u64,
    pub restarts: usize,
    pub enumeration_cap: u64,
    pub permutations: usize,
    pub days: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let windows = HeuristicWindows::default();
        RunConfig {
            slots: 24,
            budget: None,
            tz_offset_minutes: 0,
            gap_hours: 8.0,
            follower_survival_family: SurvivalFamily::Geometric,
            cluster_survival_family: SurvivalFamily::Geometric,
            cluster_exponent: ClusterExponent::SizeMinusOne,
            delta_fallback: 0.5,
            mu_fallback: None,
            gamma: GammaMode::Uniform,
            night: windows.night,
            lunch: windows.lunch,
            seed: 0,
            restarts: 16,
            enumeration_cap: DEFAULT_ENUMERATION_CAP as u64,
            permutations: DEFAULT_PERMUTATIONS,
            days: 100_000,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 || SECONDS_PER_DAY % self.slots as i64 != 0 {
            return Err(Error::BadSlotCount(self.slots));
        }
        if !(self.gap_hours > 0.0) {
            return Err(Error::InvalidArgument("gap_hours must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.delta_fallback) {
            return Err(Error::InvalidArgument(
                "delta_fallback must lie in [0, 1]".into(),
            ));
        }
        if self.mu_fallback.is_some_and(|mu| !(mu >= 0.0)) {
            return Err(Error::InvalidArgument(
                "mu_fallback must be non-negative".into(),
            ));
        }
        for w in [self.night, self.lunch] {
            if w.start > 23 || w.end > 23 {
                return Err(Error::InvalidArgument(format!(
                    "hour window {}-{} outside 0..23",
                    w.start, w.end
                )));
            }
        }
        Ok(())
    }

    pub fn survival(&self) -> SurvivalConfig {
        SurvivalConfig {
            follower_family: self.follower_survival_family,
            cluster_family: self.cluster_survival_family,
            cluster_exponent: self.cluster_exponent,
        }
    }

    pub fn windows(&self) -> HeuristicWindows {
        HeuristicWindows {
            night: self.night,
            lunch: self.lunch,
        }
    }

    pub fn estimate_config(&self) -> EstimateConfig {
        EstimateConfig {
            gap_hours: self.gap_hours,
            delta_fallback: self.delta_fallback,
            mu_fallback: self.mu_fallback,
            gamma: self.gamma,
            survival: self.survival(),
        }
    }
}
