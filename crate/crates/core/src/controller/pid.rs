use serde::{Deserialize, Serialize};

use super::ControllerError;

/// Position-loop gains; error is in millimetres of tendon excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on |integral| (mm·s).
    pub integral_clamp: f64,
    /// Bound on |effort|; at most 1.
    pub output_clamp: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains {
            kp: 0.25,
            ki: 0.4,
            kd: 0.004,
            integral_clamp: 2.0,
            output_clamp: 1.0,
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let finite = [
            self.kp,
            self.ki,
            self.kd,
            self.integral_clamp,
            self.output_clamp,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite
            || self.kp < 0.0
            || self.ki < 0.0
            || self.kd < 0.0
            || self.integral_clamp < 0.0
            || !(self.output_clamp > 0.0 && self.output_clamp <= 1.0)
        {
            return Err(ControllerError::InvalidGains);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PidInternal {
    pub integral: f64,
    /// `None` before the first step, so the derivative starts at zero.
    pub prev_error: Option<f64>,
}

/// One PID update. The integral only accumulates when that does not push a
/// saturated output further into saturation.
pub fn pid_step(
    gains: &PidGains,
    setpoint: f64,
    measured: f64,
    dt: f64,
    internal: &mut PidInternal,
) -> Result<f64, ControllerError> {
    if !(setpoint.is_finite() && measured.is_finite() && dt.is_finite()) {
        return Err(ControllerError::NonFinite("pid input"));
    }
    if dt <= 0.0 {
        return Err(ControllerError::InvalidTimestep(dt));
    }
    let error = setpoint - measured;
    let derivative = internal.prev_error.map_or(0.0, |prev| (error - prev) / dt);
    let base = gains.kp * error + gains.kd * derivative;
    let candidate =
        (internal.integral + error * dt).clamp(-gains.integral_clamp, gains.integral_clamp);
    let unsaturated = base + gains.ki * candidate;
    let limit = gains.output_clamp;
    let winding_up = unsaturated.abs() > limit && unsaturated.signum() == error.signum();
    if !winding_up {
        internal.integral = candidate;
    }
    internal.prev_error = Some(error);
    Ok((base + gains.ki * internal.integral).clamp(-limit, limit))
}
