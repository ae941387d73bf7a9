//! Orthosis controller: intent-driven state machine, PID position loop on
//! the tendon spool, and a simulated tendon/finger plant.

mod episode;
mod fsm;
mod pid;
mod plant;
mod rom;

use thiserror::Error;

pub use episode::{
    run_episode, AbortReason, ControllerConfig, EpisodeAbort, EpisodeError, IntentStream,
    TickRecord, TrajectoryLog,
};
pub use fsm::{select_setpoint, settle, ControllerState, FsmState};
pub use pid::{pid_step, PidGains, PidInternal};
pub use plant::{
    step_plant, HandParams, HandPlant, Mas, MotorParams, MotorState, PlantParams, TendonParams,
    DIGITS, FORCE_CAP_N, MCP, PIP,
};
pub use rom::{calibrate_rom, HandSize, RomCalibration, RomTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("time step must be positive, got {0}")]
    InvalidTimestep(f64),
    #[error("invalid PID gains")]
    InvalidGains,
    #[error("invalid plant parameters")]
    InvalidPlant,
    #[error("invalid controller configuration")]
    InvalidConfig,
    #[error("hand size must be S, M or L")]
    InvalidHandSize,
    #[error("range of motion must satisfy retracted < extended within spool travel")]
    InvalidRom,
    #[error("intent rate {intent_hz} Hz is not a whole number of {dt} s ticks")]
    InconsistentRates { intent_hz: f64, dt: f64 },
}
