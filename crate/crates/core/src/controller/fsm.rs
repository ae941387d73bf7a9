use serde::{Deserialize, Serialize};

use super::pid::PidInternal;
use super::rom::RomCalibration;
use crate::intent::Intent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FsmState {
    Idle,
    /// Retracting the cable to open the hand.
    Extending,
    HoldOpen,
    /// Paying out cable so the hand can close.
    Releasing,
    HoldClosed,
}

impl FsmState {
    pub fn as_str(self) -> &'static str {
        match self {
            FsmState::Idle => "IDLE",
            FsmState::Extending => "EXTENDING",
            FsmState::HoldOpen => "HOLD_OPEN",
            FsmState::Releasing => "RELEASING",
            FsmState::HoldClosed => "HOLD_CLOSED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub fsm: FsmState,
    pub setpoint: f64,
    pub pid: PidInternal,
}

impl ControllerState {
    /// Idle, holding the current payout.
    pub fn idle_at(excursion: f64) -> Self {
        ControllerState {
            fsm: FsmState::Idle,
            setpoint: excursion,
            pid: PidInternal::default(),
        }
    }
}

/// Maps an intent onto the motor target. RELAX keeps whatever target is
/// active.
pub fn select_setpoint(
    intent: Intent,
    state: ControllerState,
    rom: &RomCalibration,
) -> ControllerState {
    match intent {
        Intent::Relax => state,
        Intent::Open => ControllerState {
            fsm: if state.fsm == FsmState::HoldOpen {
                FsmState::HoldOpen
            } else {
                FsmState::Extending
            },
            setpoint: rom.retracted_setpoint,
            ..state
        },
        Intent::Close => ControllerState {
            fsm: if state.fsm == FsmState::HoldClosed {
                FsmState::HoldClosed
            } else {
                FsmState::Releasing
            },
            setpoint: rom.extended_setpoint,
            ..state
        },
    }
}

/// Moves to the matching hold state once the payout is within `tolerance`.
pub fn settle(state: ControllerState, excursion: f64, tolerance: f64) -> ControllerState {
    let arrived = (excursion - state.setpoint).abs() <= tolerance;
    let fsm = match state.fsm {
        FsmState::Extending if arrived => FsmState::HoldOpen,
        FsmState::Releasing if arrived => FsmState::HoldClosed,
        other => other,
    };
    ControllerState { fsm, ..state }
}
