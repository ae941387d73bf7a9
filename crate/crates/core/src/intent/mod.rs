//! Intent inferral: EMG pattern classification with eligibility screening,
//! and the shoulder-harness dual-threshold detector.

mod classifier;
mod features;
mod harness;
mod screening;
mod smoothing;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signals::SignalError;

pub use classifier::{train_classifier, ClassifierParams, EmgClassifier, RIDGE_FRACTION};
pub use features::{
    extract_features, feature_stream, labeled_features, FeatureVector, FeatureWindow,
};
pub use harness::{calibrate_sh, sh_detect, ShConfig, ShDetector};
pub use screening::{
    decode_trace, max_correct_hold, screen_decisions, screen_emg_eligibility, screen_profile,
    screening_script, screening_traces, training_script, ArmSupport, Condition, ConditionResult,
    DecisionTrace, ScreeningReport, ATTEMPTS_PER_CONDITION, MIN_HOLD_S, SCREENING_CONDITIONS,
    SH_FLIP_CROSSTALK, SH_FLIP_DRIFT,
};
pub use smoothing::{smooth_intents, VoteSmoother, DEFAULT_VOTE_FRAMES};

/// What the wearer wants the hand to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Intent {
    Open,
    Relax,
    Close,
}

impl Intent {
    pub const ALL: [Intent; 3] = [Intent::Open, Intent::Relax, Intent::Close];

    pub fn index(self) -> usize {
        match self {
            Intent::Open => 0,
            Intent::Relax => 1,
            Intent::Close => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Intent::Open => "OPEN",
            Intent::Relax => "RELAX",
            Intent::Close => "CLOSE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl core::fmt::Display for Intent {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which intent-inferral method a wearer is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlGroup {
    #[serde(rename = "EMG")]
    Emg,
    #[serde(rename = "SH")]
    Sh,
}

impl ControlGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlGroup::Emg => "EMG",
            ControlGroup::Sh => "SH",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EMG" => Some(ControlGroup::Emg),
            "SH" => Some(ControlGroup::Sh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntentError {
    #[error("empty feature window")]
    EmptyWindow,
    #[error("non-finite feature value")]
    NonFinite,
    #[error("insufficient training data: no samples for {0}")]
    InsufficientTrainingData(Intent),
    #[error("training data is not separable: class means coincide")]
    NonSeparable,
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("missing screening conditions: {0:?}")]
    MissingConditions(Vec<Condition>),
    #[error("condition {condition:?}: expected {expected} attempts, found {found}")]
    WrongAttemptCount {
        condition: Condition,
        expected: usize,
        found: usize,
    },
    #[error("uncalibratable harness: {0}")]
    UncalibratableHarness(&'static str),
    #[error("invalid threshold configuration: T_open must be strictly below T_close")]
    InvalidThresholds,
    #[error(transparent)]
    Signal(#[from] SignalError),
}
