//! Twelve-session training protocol.
//!
//! [`build_protocol`] gives the fixed task sequence. [`run_session`] runs
//! each task as a closed-loop grasp-release episode driven by the subject's
//! intent method. It accrues active time from a [`DurationModel`] and stops
//! after the task during which the 30 minute budget is reached. A session
//! that finishes early logs one free-training event for the remainder.

mod calibration;
mod durations;
mod session;
mod tasks;

use thiserror::Error;

pub use calibration::{
    session_calibration, CalibrationBundle, IntentCalibration, SubjectModel, ThumbTension,
};
pub use durations::{
    lognormal_with_median_total, DurationModel, LognormalDurations, ProportionalDurations,
};
pub use session::{
    replay_last_completed, run_session, sh_intent_stream, EpisodeSummary, EventKind, ProgramPlan,
    SessionEvent, SessionLog, SessionPlan, SessionRun, CYCLE_S, SESSIONS_PER_WEEK,
    SESSION_BUDGET_S, SESSION_COUNT, WEEKS,
};
pub use tasks::{
    build_protocol, Support, TaskPhase, TrainingTask, BIMANUAL_REPS, BIMANUAL_TASKS, DRILL_OBJECTS,
    DRILL_REPS, IRREGULAR_OBJECTS, IRREGULAR_REPS, TRAY_PASSES, TRAY_REPS,
};

use crate::controller::ControllerError;
use crate::intent::IntentError;
pub(crate) use crate::math::mix_seed;
use crate::signals::SignalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid session plan: {0}")]
    InvalidPlan(&'static str),
    #[error("invalid subject model: {0}")]
    InvalidSubject(&'static str),
    #[error("invalid duration model")]
    InvalidDurationModel,
    #[error("task {task}: duration {value} s is not a finite non-negative number")]
    InvalidDuration { task: u16, value: f64 },
    #[error("session blocked by calibration failure: {0}")]
    Calibration(#[from] IntentError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
}
