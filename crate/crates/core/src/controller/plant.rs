//! Tendon spool and four-digit hand.
//!
//! Each digit has an MCP and a PIP joint (degrees, 0 = straight). The DIP is
//! blocked and the thumb is splinted, so neither is simulated. One dorsal
//! cable runs from the spool over all four digits; the path it has to cover
//! grows with flexion through the joint moment arms. Any cable shortfall
//! against the spool payout stretches the cable linearly.
//!
//! Joints are first order: `b·q' = tau_vol - k·(q - q_rest) - (F/4)·r`, with
//! the stiffness term integrated implicitly. A slip clutch caps the tension
//! at the force limit by letting cable out.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ControllerError;
use crate::math::deg_to_rad;

pub const DIGITS: usize = 4;
pub const MCP: usize = 0;
pub const PIP: usize = 1;

/// Mechanical tension limit of the actuator, N.
pub const FORCE_CAP_N: f64 = 100.0;

/// Modified Ashworth grade; scales baseline joint stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mas {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "1+")]
    OnePlus,
    #[serde(rename = "2")]
    Two,
}

impl Mas {
    pub fn stiffness_multiplier(self) -> f64 {
        match self {
            Mas::Zero => 1.0,
            Mas::One => 2.0,
            Mas::OnePlus => 3.0,
            Mas::Two => 4.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "0" => Some(Mas::Zero),
            "1" => Some(Mas::One),
            "1+" => Some(Mas::OnePlus),
            "2" => Some(Mas::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandParams {
    /// Baseline passive stiffness per joint `[MCP, PIP]`, N·mm/deg.
    pub stiffness: [f64; 2],
    pub stiffness_multiplier: f64,
    /// N·mm·s/deg.
    pub damping: [f64; 2],
    /// Passive equilibrium pose, deg.
    pub rest_pose: [f64; 2],
    /// Anatomical flexion limit, deg.
    pub max_angle: [f64; 2],
    /// Dorsal cable moment arm, mm.
    pub moment_arm: [f64; 2],
}

impl Default for HandParams {
    fn default() -> Self {
        HandParams {
            stiffness: [1.0, 0.6],
            stiffness_multiplier: 1.0,
            damping: [0.4, 0.25],
            rest_pose: [40.0, 50.0],
            max_angle: [90.0, 100.0],
            moment_arm: [10.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TendonParams {
    /// N/mm.
    pub stiffness: f64,
    /// Cable path with the hand straight, mm. Gives pretension when the
    /// spool is fully retracted.
    pub path_open_mm: f64,
    pub force_cap_n: f64,
}

impl Default for TendonParams {
    fn default() -> Self {
        TendonParams {
            stiffness: 10.0,
            path_open_mm: 5.0,
            force_cap_n: FORCE_CAP_N,
        }
    }
}

/// Gear motor driving the spool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    pub no_load_rpm: f64,
    pub gear_ratio: f64,
    pub spool_radius_mm: f64,
    /// Cable tension that stalls the motor at full effort, N.
    pub stall_force_n: f64,
    /// Spool travel limits, mm of payout.
    pub travel_mm: (f64, f64),
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams {
            no_load_rpm: 5800.0,
            gear_ratio: 47.0,
            spool_radius_mm: 1.8,
            stall_force_n: 200.0,
            travel_mm: (0.0, 60.0),
        }
    }
}

impl MotorParams {
    /// Free-running cable speed at full effort, mm/s.
    pub fn max_speed(&self) -> f64 {
        self.no_load_rpm / 60.0 / self.gear_ratio * 2.0 * PI * self.spool_radius_mm
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub hand: HandParams,
    pub tendon: TendonParams,
    pub motor: MotorParams,
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let h = &self.hand;
        let positive = h
            .stiffness
            .iter()
            .chain(&h.damping)
            .chain(&h.moment_arm)
            .chain(&h.max_angle)
            .chain([
                &h.stiffness_multiplier,
                &self.tendon.stiffness,
                &self.tendon.force_cap_n,
                &self.motor.no_load_rpm,
                &self.motor.gear_ratio,
                &self.motor.spool_radius_mm,
                &self.motor.stall_force_n,
            ])
            .all(|v| v.is_finite() && *v > 0.0);
        let rest_ok = (0..2).all(|j| h.rest_pose[j] >= 0.0 && h.rest_pose[j] <= h.max_angle[j]);
        let (lo, hi) = self.motor.travel_mm;
        if !positive
            || !rest_ok
            || self.tendon.path_open_mm < 0.0
            || self.tendon.force_cap_n > FORCE_CAP_N
            || !(lo.is_finite() && hi.is_finite() && lo < hi)
        {
            return Err(ControllerError::InvalidPlant);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorState {
    /// Cable payout, mm; small = retracted = hand pulled open.
    pub excursion: f64,
    /// mm/s over the last step.
    pub velocity: f64,
    /// Normalized command in [-1, 1]; negative retracts.
    pub effort: f64,
    pub tension: f64,
}

impl MotorState {
    pub fn at(excursion: f64) -> Self {
        MotorState {
            excursion,
            velocity: 0.0,
            effort: 0.0,
            tension: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandPlant {
    pub params: PlantParams,
    /// `[digit][MCP, PIP]`, deg.
    pub q: [[f64; 2]; DIGITS],
    /// Voluntary flexor torque applied to every joint, N·mm.
    pub voluntary_torque: f64,
}

impl HandPlant {
    pub fn at_rest(params: PlantParams) -> Self {
        HandPlant {
            params,
            q: [params.hand.rest_pose; DIGITS],
            voluntary_torque: 0.0,
        }
    }

    pub fn fully_flexed(params: PlantParams) -> Self {
        HandPlant {
            q: [params.hand.max_angle; DIGITS],
            ..Self::at_rest(params)
        }
    }

    pub fn angles(&self) -> [f64; 2 * DIGITS] {
        let mut out = [0.0; 2 * DIGITS];
        for (d, joints) in self.q.iter().enumerate() {
            out[2 * d] = joints[MCP];
            out[2 * d + 1] = joints[PIP];
        }
        out
    }

    pub fn max_angle(&self) -> f64 {
        self.angles().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_angle(&self) -> f64 {
        self.angles().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Cable path demanded by the current pose, mm.
    pub fn cable_path(&self) -> f64 {
        let r = self.params.hand.moment_arm;
        let sum: f64 = self
            .q
            .iter()
            .map(|j| r[MCP] * deg_to_rad(j[MCP]) + r[PIP] * deg_to_rad(j[PIP]))
            .sum();
        self.params.tendon.path_open_mm + sum / DIGITS as f64
    }

    /// Uncapped elastic tension for a given payout.
    pub fn raw_tension(&self, excursion: f64) -> f64 {
        self.params.tendon.stiffness * (self.cable_path() - excursion).max(0.0)
    }

    /// Stored elastic energy of joints and cable, N·mm.
    pub fn stored_energy(&self, excursion: f64) -> f64 {
        let h = &self.params.hand;
        let mut e = 0.0;
        for joints in &self.q {
            for j in 0..2 {
                // k in N·mm/deg -> N·mm/rad
                let k_rad = h.stiffness[j] * h.stiffness_multiplier * 180.0 / PI;
                let dq = deg_to_rad(joints[j] - h.rest_pose[j]);
                e += 0.5 * k_rad * dq * dq;
            }
        }
        let f = self.raw_tension(excursion);
        e + 0.5 * f * f / self.params.tendon.stiffness
    }
}

// Lets cable out until the tension equals the cap.
fn slip(plant: &HandPlant, excursion: f64) -> (f64, f64) {
    let t = &plant.params.tendon;
    let raw = plant.raw_tension(excursion);
    if raw > t.force_cap_n {
        (
            plant.cable_path() - t.force_cap_n / t.stiffness,
            t.force_cap_n,
        )
    } else {
        (excursion, raw)
    }
}

/// Advances the spool and the hand by `dt` under `motor.effort`.
pub fn step_plant(plant: &HandPlant, motor: &MotorState, dt: f64) -> (HandPlant, MotorState) {
    let p = &plant.params;
    let h = &p.hand;
    let (lo, hi) = p.motor.travel_mm;
    let effort = motor.effort.clamp(-1.0, 1.0);

    // Motor: linear torque-speed line, cable tension back-drives it.
    let tension_now = plant.raw_tension(motor.excursion).min(p.tendon.force_cap_n);
    let v_cmd = p.motor.max_speed() * (effort + tension_now / p.motor.stall_force_n);
    let x_moved = (motor.excursion + v_cmd * dt).clamp(lo, hi);
    let (x, tension) = slip(plant, x_moved);

    // Joints, stiffness implicit, tendon torque from the pre-step tension.
    let mut next = *plant;
    let share = tension / DIGITS as f64;
    for (d, joints) in plant.q.iter().enumerate() {
        for j in 0..2 {
            let k = h.stiffness[j] * h.stiffness_multiplier;
            let b = h.damping[j];
            let torque =
                plant.voluntary_torque - k * (joints[j] - h.rest_pose[j]) - share * h.moment_arm[j];
            let q = joints[j] + dt * torque / (b + dt * k);
            next.q[d][j] = q.clamp(0.0, h.max_angle[j]);
        }
    }
    let (x, tension) = slip(&next, x);
    let next_motor = MotorState {
        excursion: x,
        velocity: (x - motor.excursion) / dt,
        effort,
        tension,
    };
    (next, next_motor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_pose_with_slack_cable_is_equilibrium() {
        let plant = HandPlant::at_rest(PlantParams::default());
        let motor = MotorState::at(45.0);
        assert_eq!(plant.raw_tension(45.0), 0.0);
        let (p2, m2) = step_plant(&plant, &motor, 0.005);
        assert_eq!(p2.q, plant.q);
        assert_eq!(m2.excursion, 45.0);
        assert_eq!(m2.tension, 0.0);
    }

    #[test]
    fn tension_pinned_at_cap_against_stiff_hand() {
        let mut params = PlantParams::default();
        params.hand.stiffness_multiplier = 1e4;
        let mut plant = HandPlant::fully_flexed(params);
        let mut motor = MotorState::at(45.0);
        motor.effort = -1.0;
        let mut peak: f64 = 0.0;
        for _ in 0..2000 {
            (plant, motor) = step_plant(&plant, &motor, 0.005);
            peak = peak.max(motor.tension);
        }
        assert_eq!(motor.tension, FORCE_CAP_N);
        assert_eq!(peak, FORCE_CAP_N);
    }

    #[test]
    fn joints_never_hyperextend() {
        let mut plant = HandPlant::at_rest(PlantParams::default());
        plant.voluntary_torque = -500.0;
        let mut motor = MotorState::at(0.0);
        motor.effort = -1.0;
        for _ in 0..1000 {
            (plant, motor) = step_plant(&plant, &motor, 0.005);
            assert!(plant.min_angle() >= 0.0);
        }
        assert_eq!(plant.min_angle(), 0.0);
    }

    #[test]
    fn passive_energy_never_increases() {
        for mult in [1.0, 2.5, 4.0] {
            let mut params = PlantParams::default();
            params.hand.stiffness_multiplier = mult;
            let mut plant = HandPlant::fully_flexed(params);
            // Start with the cable taut so both terms matter.
            let mut motor = MotorState::at(20.0);
            let mut prev = plant.stored_energy(motor.excursion);
            for _ in 0..4000 {
                (plant, motor) = step_plant(&plant, &motor, 0.005);
                let e = plant.stored_energy(motor.excursion);
                assert!(
                    e <= prev + 1e-9 * prev.max(1.0),
                    "energy rose {prev} -> {e}"
                );
                prev = e;
            }
        }
    }

    #[test]
    fn motor_speed_includes_gear_ratio() {
        let m = MotorParams::default();
        let want = 5800.0 / 60.0 / 47.0 * 2.0 * PI * 1.8;
        assert!((m.max_speed() - want).abs() < 1e-12);
    }

    #[test]
    fn mas_mapping() {
        let m: [f64; 4] =
            [Mas::Zero, Mas::One, Mas::OnePlus, Mas::Two].map(Mas::stiffness_multiplier);
        assert_eq!(m, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(Mas::parse("1+"), Some(Mas::OnePlus));
        assert_eq!(Mas::parse("3"), None);
    }

    #[test]
    fn plant_validation() {
        assert!(PlantParams::default().validate().is_ok());
        let mut p = PlantParams::default();
        p.tendon.force_cap_n = 120.0;
        assert!(p.validate().is_err());
        let mut p = PlantParams::default();
        p.hand.damping[1] = 0.0;
        assert!(p.validate().is_err());
    }
}
