//! Shoulder-harness intent detector.
//!
//! Shrugging the contralateral shoulder raises harness tension and asks the
//! motor to extend so the hand can close; depressing it lowers tension and
//! asks the motor to retract, opening the hand. Between the two thresholds
//! the previous decision is held.

use serde::{Deserialize, Serialize};

use super::{Intent, IntentError};
use crate::math::median;
use crate::signals::{LoadCellSample, LoadTrace};

/// Dual thresholds in newtons; `t_open < t_close`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShConfig {
    pub t_open: f64,
    pub t_close: f64,
}

impl ShConfig {
    pub fn new(t_open: f64, t_close: f64) -> Result<Self, IntentError> {
        if !(t_open.is_finite() && t_close.is_finite() && t_open < t_close) {
            return Err(IntentError::InvalidThresholds);
        }
        Ok(ShConfig { t_open, t_close })
    }

    pub fn band_width(&self) -> f64 {
        self.t_close - self.t_open
    }
}

pub fn sh_detect(sample: &LoadCellSample, cfg: &ShConfig, prev: Intent) -> Intent {
    if sample.tension >= cfg.t_close {
        Intent::Close
    } else if sample.tension <= cfg.t_open {
        Intent::Open
    } else {
        prev
    }
}

/// Stateful per-stream wrapper around [`sh_detect`]; starts in RELAX.
#[derive(Debug, Clone)]
pub struct ShDetector {
    cfg: ShConfig,
    current: Intent,
}

impl ShDetector {
    pub fn new(cfg: ShConfig) -> Self {
        ShDetector {
            cfg,
            current: Intent::Relax,
        }
    }

    pub fn current(&self) -> Intent {
        self.current
    }

    pub fn update(&mut self, sample: &LoadCellSample) -> Intent {
        self.current = sh_detect(sample, &self.cfg, self.current);
        self.current
    }
}

/// Thresholds at the midpoints between the rest median and the shrug and
/// depression medians.
pub fn calibrate_sh(
    rest: &LoadTrace,
    shrug: &LoadTrace,
    depress: &LoadTrace,
) -> Result<ShConfig, IntentError> {
    let med = |t: &LoadTrace| {
        let v: alloc::vec::Vec<f64> = t.samples.iter().map(|s| s.tension).collect();
        median(&v).ok_or(IntentError::UncalibratableHarness(
            "empty calibration trace",
        ))
    };
    let (r, s, d) = (med(rest)?, med(shrug)?, med(depress)?);
    if !(d < r && r < s) {
        return Err(IntentError::UncalibratableHarness(
            "medians must satisfy depress < rest < shrug",
        ));
    }
    ShConfig::new(0.5 * (d + r), 0.5 * (r + s))
}
