use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Momentum-penalty weight. Starts at `alpha0` and grows geometrically to
/// `alpha_max`, changing only every `step_every` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub alpha0: f64,
    pub step_every: u64,
    /// 0 turns the penalty off entirely.
    pub alpha_max: f64,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule {
            alpha0: 1e-4,
            step_every: 10_000,
            alpha_max: 0.0,
        }
    }
}

impl AlphaSchedule {
    pub fn with_max(alpha_max: f64) -> Self {
        AlphaSchedule {
            alpha_max,
            ..Self::default()
        }
    }

    pub fn enabled(&self) -> bool {
        self.alpha_max > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_every == 0 {
            return Err(Error::InvalidInput("alpha step_every must be positive".into()));
        }
        if !(self.alpha_max >= 0.0) || !self.alpha_max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha_max",
                value: self.alpha_max,
                reason: "must be finite and non-negative",
            });
        }
        if self.enabled() && !(self.alpha0 > 0.0 && self.alpha0 <= self.alpha_max) {
            return Err(Error::InvalidParameter {
                name: "alpha0",
                value: self.alpha0,
                reason: "must satisfy 0 < alpha0 <= alpha_max",
            });
        }
        Ok(())
    }

    /// Number of constant-α stages in a run of `total` iterations.
    pub fn stages(&self, total: u64) -> u64 {
        total.div_ceil(self.step_every).max(1)
    }

    /// α used at iteration `t` (0-based) of a run of `total` iterations.
    pub fn alpha(&self, t: u64, total: u64) -> f64 {
        if !self.enabled() {
            return 0.0;
        }
        let stages = self.stages(total);
        if stages == 1 {
            return self.alpha0;
        }
        let k = (t / self.step_every).min(stages - 1);
        if k == stages - 1 {
            return self.alpha_max;
        }
        let frac = k as f64 / (stages - 1) as f64;
        (self.alpha0 * (self.alpha_max / self.alpha0).powf(frac)).min(self.alpha_max)
    }
}
