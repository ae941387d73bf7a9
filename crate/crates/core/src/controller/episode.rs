//! Closed-loop episodes: intent stream -> FSM -> PID -> plant.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fsm::{select_setpoint, settle, ControllerState, FsmState};
use super::pid::{pid_step, PidGains};
use super::plant::{step_plant, HandPlant, MotorState, PlantParams};
use super::rom::{RomCalibration, RomTable};
use super::ControllerError;
use crate::intent::Intent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Control tick, s.
    pub dt: f64,
    pub gains: PidGains,
    pub plant: PlantParams,
    pub rom_table: RomTable,
    /// Distance to the target at which a move counts as finished, mm.
    pub hold_tolerance_mm: f64,
    /// Tension that aborts an episode, N; at most the mechanical cap.
    pub safety_limit_n: f64,
    /// Flexor torque the wearer adds while intending CLOSE, N·mm.
    pub voluntary_torque_nmm: f64,
    /// Cable speeds below this are treated as stationary, mm/s.
    pub reversal_deadband: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            dt: 0.005,
            gains: PidGains::default(),
            plant: PlantParams::default(),
            rom_table: RomTable::default(),
            hold_tolerance_mm: 0.5,
            safety_limit_n: super::plant::FORCE_CAP_N,
            voluntary_torque_nmm: 40.0,
            reversal_deadband: 1.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ControllerError::InvalidTimestep(self.dt));
        }
        self.gains.validate()?;
        self.plant.validate()?;
        let cap = self.plant.tendon.force_cap_n;
        if !(self.safety_limit_n > 0.0 && self.safety_limit_n <= cap)
            || !(self.hold_tolerance_mm > 0.0)
            || !self.voluntary_torque_nmm.is_finite()
            || !(self.reversal_deadband >= 0.0)
        {
            return Err(ControllerError::InvalidConfig);
        }
        Ok(())
    }
}

/// Intents at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentStream {
    pub rate_hz: f64,
    pub intents: Vec<Intent>,
}

impl IntentStream {
    /// Expands `(intent, seconds)` segments at `rate_hz`.
    pub fn from_script(script: &[(Intent, f64)], rate_hz: f64) -> Self {
        let mut intents = Vec::new();
        for &(i, dur) in script {
            let n = libm::round(dur * rate_hz) as usize;
            intents.extend(core::iter::repeat_n(i, n));
        }
        IntentStream { rate_hz, intents }
    }

    pub fn duration(&self) -> f64 {
        self.intents.len() as f64 / self.rate_hz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub t: f64,
    pub intent: Intent,
    pub fsm: FsmState,
    pub sp: f64,
    pub x: f64,
    #[serde(rename = "F")]
    pub tension: f64,
    pub q: [f64; 8],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub ticks: Vec<TickRecord>,
}

impl TrajectoryLog {
    pub fn max_tension(&self) -> f64 {
        self.ticks.iter().map(|t| t.tension).fold(0.0, f64::max)
    }

    pub fn min_angle(&self) -> f64 {
        self.ticks
            .iter()
            .flat_map(|t| t.q)
            .fold(f64::INFINITY, f64::min)
    }

    /// Sign changes of cable velocity, ignoring speeds within `deadband`.
    pub fn direction_reversals(&self, deadband: f64) -> usize {
        let mut last_sign = 0i8;
        let mut count = 0;
        for w in self.ticks.windows(2) {
            let dt = w[1].t - w[0].t;
            let v = (w[1].x - w[0].x) / dt;
            let sign = if v > deadband {
                1
            } else if v < -deadband {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    count += 1;
                }
                last_sign = sign;
            }
        }
        count
    }

    /// First time after `from` at which every joint is below `deg`.
    pub fn first_open_time(&self, from: f64, deg: f64) -> Option<f64> {
        self.ticks
            .iter()
            .find(|t| t.t >= from && t.q.iter().all(|&q| q < deg))
            .map(|t| t.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AbortReason {
    TensionLimit { tension: f64, limit: f64 },
    NonFiniteState,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("safety abort at t = {t:.3} s: {reason:?}")]
pub struct EpisodeAbort {
    pub t: f64,
    pub reason: AbortReason,
    /// Ticks logged up to and including the violation.
    pub partial: TrajectoryLog,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Config(#[from] ControllerError),
    #[error(transparent)]
    Abort(#[from] EpisodeAbort),
}

/// Simulates the closed loop from `plant` and `motor` for the length of the
/// intent stream. Ticks are logged after each step.
pub fn run_episode(
    stream: &IntentStream,
    rom: &RomCalibration,
    cfg: &ControllerConfig,
    plant: HandPlant,
    motor: MotorState,
) -> Result<TrajectoryLog, EpisodeError> {
    cfg.validate()?;
    let per_intent = 1.0 / (stream.rate_hz * cfg.dt);
    let ticks_per_intent = libm::round(per_intent);
    if !(stream.rate_hz > 0.0)
        || ticks_per_intent < 1.0
        || (per_intent - ticks_per_intent).abs() > 1e-9
    {
        return Err(ControllerError::InconsistentRates {
            intent_hz: stream.rate_hz,
            dt: cfg.dt,
        }
        .into());
    }
    let ticks_per_intent = ticks_per_intent as usize;

    let mut plant = plant;
    let mut motor = motor;
    let mut state = ControllerState::idle_at(motor.excursion);
    let mut log = TrajectoryLog {
        ticks: Vec::with_capacity(stream.intents.len() * ticks_per_intent),
    };
    let mut tick = 0usize;
    for &intent in &stream.intents {
        for _ in 0..ticks_per_intent {
            state = select_setpoint(intent, state, rom);
            motor.effort = pid_step(
                &cfg.gains,
                state.setpoint,
                motor.excursion,
                cfg.dt,
                &mut state.pid,
            )
            .map_err(EpisodeError::Config)?;
            plant.voluntary_torque = if intent == Intent::Close {
                cfg.voluntary_torque_nmm
            } else {
                0.0
            };
            (plant, motor) = step_plant(&plant, &motor, cfg.dt);
            state = settle(state, motor.excursion, cfg.hold_tolerance_mm);
            tick += 1;
            let t = tick as f64 * cfg.dt;
            log.ticks.push(TickRecord {
                t,
                intent,
                fsm: state.fsm,
                sp: state.setpoint,
                x: motor.excursion,
                tension: motor.tension,
                q: plant.angles(),
            });
            let finite = motor.excursion.is_finite()
                && motor.tension.is_finite()
                && plant.angles().iter().all(|q| q.is_finite());
            let reason = if !finite {
                Some(AbortReason::NonFiniteState)
            } else if motor.tension > cfg.safety_limit_n {
                Some(AbortReason::TensionLimit {
                    tension: motor.tension,
                    limit: cfg.safety_limit_n,
                })
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(EpisodeAbort {
                    t,
                    reason,
                    partial: log,
                }
                .into());
            }
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::plant::DIGITS;
    use crate::controller::rom::{calibrate_rom, HandSize};

    fn m_setup(mult: f64) -> (ControllerConfig, RomCalibration) {
        let mut cfg = ControllerConfig::default();
        cfg.plant = HandSize::M.plant_params(cfg.plant);
        cfg.plant.hand.stiffness_multiplier = mult;
        (cfg, calibrate_rom(HandSize::M, &cfg.rom_table))
    }

    #[test]
    fn flexed_to_open_takes_about_1_8_s() {
        let (cfg, rom) = m_setup(1.0);
        let stream = IntentStream::from_script(&[(Intent::Open, 3.0)], 50.0);
        let plant = HandPlant::fully_flexed(cfg.plant);
        let log = run_episode(
            &stream,
            &rom,
            &cfg,
            plant,
            MotorState::at(rom.extended_setpoint),
        )
        .unwrap();
        let t = log.first_open_time(0.0, 5.0).expect("hand opens");
        assert!((1.62..=1.98).contains(&t), "open after {t} s");
    }

    #[test]
    fn all_relax_keeps_excursion() {
        let (cfg, rom) = m_setup(1.0);
        let stream = IntentStream::from_script(&[(Intent::Relax, 3.0)], 50.0);
        let plant = HandPlant::at_rest(cfg.plant);
        let log = run_episode(
            &stream,
            &rom,
            &cfg,
            plant,
            MotorState::at(rom.extended_setpoint),
        )
        .unwrap();
        assert!(log
            .ticks
            .iter()
            .all(|t| t.x == rom.extended_setpoint && t.fsm == FsmState::Idle));
    }

    #[test]
    fn open_then_close() {
        let (cfg, rom) = m_setup(1.0);
        let stream = IntentStream::from_script(&[(Intent::Open, 2.0), (Intent::Close, 2.0)], 50.0);
        let plant = HandPlant::at_rest(cfg.plant);
        let log = run_episode(
            &stream,
            &rom,
            &cfg,
            plant,
            MotorState::at(rom.extended_setpoint),
        )
        .unwrap();
        let mean_q = |t: &TickRecord| t.q.iter().sum::<f64>() / t.q.len() as f64;
        let at = |s: f64| log.ticks.iter().find(|t| t.t >= s - 1e-9).unwrap();
        let opened = log.first_open_time(0.0, 5.0).unwrap();
        assert!(opened < 2.0, "open pose only at {opened}");
        assert!(mean_q(at(1.6)) < mean_q(at(0.005)) - 20.0);
        assert!(mean_q(at(4.0)) > mean_q(at(2.0)) + 20.0);
        assert_eq!(log.ticks.last().unwrap().sp, rom.extended_setpoint);
    }

    #[test]
    fn hold_is_stable_under_constant_voluntary_torque() {
        let (mut cfg, rom) = m_setup(2.0);
        cfg.voluntary_torque_nmm = 0.0;
        // Open, then RELAX with the wearer pushing into flexion.
        let stream = IntentStream::from_script(&[(Intent::Open, 2.5)], 50.0);
        let log = run_episode(
            &stream,
            &rom,
            &cfg,
            HandPlant::at_rest(cfg.plant),
            MotorState::at(45.0),
        )
        .unwrap();
        let end = log.ticks.last().unwrap();
        let mut plant = HandPlant::at_rest(cfg.plant);
        for d in 0..DIGITS {
            plant.q[d] = [end.q[2 * d], end.q[2 * d + 1]];
        }
        cfg.voluntary_torque_nmm = 60.0;
        // The voluntary torque is only applied on CLOSE, so hold it in the plant directly.
        let relax = IntentStream::from_script(&[(Intent::Relax, 4.0)], 50.0);
        let mut held = plant;
        held.voluntary_torque = 60.0;
        let mut motor = MotorState::at(end.x);
        let mut state = ControllerState::idle_at(end.x);
        let mut xs = Vec::new();
        for _ in 0..relax.intents.len() * 4 {
            motor.effort = pid_step(
                &cfg.gains,
                state.setpoint,
                motor.excursion,
                cfg.dt,
                &mut state.pid,
            )
            .unwrap();
            (held, motor) = step_plant(&held, &motor, cfg.dt);
            xs.push(motor.excursion);
        }
        let settled = &xs[xs.len() / 4..];
        let (lo, hi) = settled
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        assert!(hi - lo < 0.5, "excursion wandered {lo}..{hi}");
    }

    #[test]
    fn bit_identical_logs() {
        let (cfg, rom) = m_setup(3.0);
        let stream = IntentStream::from_script(
            &[
                (Intent::Open, 1.3),
                (Intent::Relax, 0.4),
                (Intent::Close, 1.1),
                (Intent::Open, 0.9),
            ],
            50.0,
        );
        let run = || {
            run_episode(
                &stream,
                &rom,
                &cfg,
                HandPlant::at_rest(cfg.plant),
                MotorState::at(45.0),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.ticks.len(), b.ticks.len());
        for (x, y) in a.ticks.iter().zip(&b.ticks) {
            assert_eq!(x.x.to_bits(), y.x.to_bits());
            assert!(x
                .q
                .iter()
                .zip(&y.q)
                .all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn lowered_safety_limit_aborts() {
        let (mut cfg, rom) = m_setup(4.0);
        cfg.safety_limit_n = 30.0;
        let stream = IntentStream::from_script(&[(Intent::Open, 2.0)], 50.0);
        let err = run_episode(
            &stream,
            &rom,
            &cfg,
            HandPlant::fully_flexed(cfg.plant),
            MotorState::at(45.0),
        )
        .unwrap_err();
        match err {
            EpisodeError::Abort(a) => {
                assert!(matches!(a.reason, AbortReason::TensionLimit { .. }));
                assert_eq!(a.partial.ticks.last().unwrap().t, a.t);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_rates_rejected() {
        let (cfg, rom) = m_setup(1.0);
        let stream = IntentStream {
            rate_hz: 30.0,
            intents: alloc::vec![Intent::Relax; 10],
        };
        assert!(matches!(
            run_episode(
                &stream,
                &rom,
                &cfg,
                HandPlant::at_rest(cfg.plant),
                MotorState::at(45.0)
            ),
            Err(EpisodeError::Config(
                ControllerError::InconsistentRates { .. }
            ))
        ));
    }

    #[test]
    fn step_response_matches_fine_reference() {
        // Same loop at dt and dt/100; both settle on the setpoint.
        let (cfg, _) = m_setup(1.0);
        let simulate = |dt: f64, seconds: f64| {
            let mut plant = HandPlant::at_rest(cfg.plant);
            let mut motor = MotorState::at(45.0);
            let mut pid = Default::default();
            let steps = libm::round(seconds / dt) as usize;
            for _ in 0..steps {
                motor.effort = pid_step(&cfg.gains, 20.0, motor.excursion, dt, &mut pid).unwrap();
                (plant, motor) = step_plant(&plant, &motor, dt);
            }
            motor.excursion
        };
        let coarse = simulate(cfg.dt, 6.0);
        let fine = simulate(cfg.dt / 100.0, 6.0);
        assert!((coarse - 20.0).abs() < 0.02, "coarse {coarse}");
        assert!((fine - 20.0).abs() < 0.02, "fine {fine}");
        assert!((coarse - fine).abs() < 0.02);
    }
}
