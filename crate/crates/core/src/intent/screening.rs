//! EMG eligibility screening.
//!
//! The wearer opens, relaxes and closes three times each with the forearm on
//! and off the table. The EMG method is kept only if every attempt in every
//! condition shows at least two seconds of continuous correct decoding.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    feature_stream, labeled_features, train_classifier, ControlGroup, EmgClassifier, FeatureWindow,
    Intent, IntentError, VoteSmoother,
};
use crate::math::mix_seed;
use crate::signals::{gen_emg_trace, Annotation, EmgTrace, SignalError, SignalProfile};

pub const ATTEMPTS_PER_CONDITION: usize = 3;

/// Crosstalk at which [`screen_profile`] moves a separable wearer to SH.
pub const SH_FLIP_CROSSTALK: f64 = 0.98;

/// Fatigue drift rate, 1/s, at which [`screen_profile`] moves a separable
/// wearer to SH.
pub const SH_FLIP_DRIFT: f64 = 0.06;

/// Shortest continuous correct hold that counts as a successful attempt.
pub const MIN_HOLD_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmSupport {
    OnTable,
    OffTable,
}

impl ArmSupport {
    pub fn as_str(self) -> &'static str {
        match self {
            ArmSupport::OnTable => "on_table",
            ArmSupport::OffTable => "off_table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub intent: Intent,
    pub arm: ArmSupport,
}

impl Condition {
    /// File-name style key, e.g. `open_off_table`.
    pub fn key(&self) -> alloc::string::String {
        let mut s = alloc::string::String::from(self.intent.as_str());
        s.make_ascii_lowercase();
        s.push('_');
        s.push_str(self.arm.as_str());
        s
    }
}

pub const SCREENING_CONDITIONS: [Condition; 6] = [
    Condition {
        intent: Intent::Open,
        arm: ArmSupport::OnTable,
    },
    Condition {
        intent: Intent::Relax,
        arm: ArmSupport::OnTable,
    },
    Condition {
        intent: Intent::Close,
        arm: ArmSupport::OnTable,
    },
    Condition {
        intent: Intent::Open,
        arm: ArmSupport::OffTable,
    },
    Condition {
        intent: Intent::Relax,
        arm: ArmSupport::OffTable,
    },
    Condition {
        intent: Intent::Close,
        arm: ArmSupport::OffTable,
    },
];

/// Script for one screening condition: three 3 s attempts, separated by
/// 1 s of rest for the active intents.
pub fn screening_script(intent: Intent) -> Vec<(Intent, f64)> {
    let mut script = Vec::with_capacity(2 * ATTEMPTS_PER_CONDITION);
    for _ in 0..ATTEMPTS_PER_CONDITION {
        if intent != Intent::Relax {
            script.push((Intent::Relax, 1.0));
        }
        script.push((intent, 3.0));
    }
    script
}

/// Classifier training recording: two passes over the three intents, 3 s
/// each.
pub fn training_script() -> Vec<(Intent, f64)> {
    let mut s = Vec::with_capacity(6);
    for _ in 0..2 {
        for i in Intent::ALL {
            s.push((i, 3.0));
        }
    }
    s
}

/// One recording per screening condition, each with its own noise stream.
pub fn screening_traces(
    profile: &SignalProfile,
) -> Result<Vec<(Condition, EmgTrace)>, SignalError> {
    SCREENING_CONDITIONS
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let p = profile.with_seed(mix_seed(profile.seed, &[0x5c, k as u64]));
            Ok((c, gen_emg_trace(&p, &screening_script(c.intent))?))
        })
        .collect()
}

/// Full screening of a synthetic wearer: train on a fresh recording, then
/// decode the six condition recordings.
pub fn screen_profile(profile: &SignalProfile) -> Result<ScreeningReport, IntentError> {
    let train = gen_emg_trace(
        &profile.with_seed(mix_seed(profile.seed, &[0x7a])),
        &training_script(),
    )?;
    let classifier = train_classifier(&labeled_features(&train, &FeatureWindow::default())?)?;
    screen_emg_eligibility(&screening_traces(profile)?, &classifier)
}

/// Smoothed decoder output for one condition, with the attempt intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub decision_rate_hz: f64,
    pub decisions: Vec<(f64, Intent)>,
    pub attempts: Vec<Annotation<Intent>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    /// Longest continuous correct hold per attempt, seconds.
    pub hold_s: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub conditions: Vec<ConditionResult>,
    pub verdict: ControlGroup,
}

/// Longest run of `target` decisions inside `attempt`, in seconds.
pub fn max_correct_hold(
    decisions: &[(f64, Intent)],
    attempt: &Annotation<Intent>,
    rate_hz: f64,
) -> f64 {
    let mut best = 0usize;
    let mut run = 0usize;
    for &(_, label) in decisions.iter().filter(|(t, _)| attempt.contains(*t)) {
        if label == attempt.label {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best as f64 / rate_hz
}

/// Classifies and vote-smooths a whole condition trace.
pub fn decode_trace(
    trace: &EmgTrace,
    classifier: &EmgClassifier,
) -> Result<Vec<(f64, Intent)>, IntentError> {
    let mut smoother = VoteSmoother::new(classifier.vote_frames());
    feature_stream(trace, classifier.window())?
        .into_iter()
        .map(|(t, f)| Ok((t, smoother.push(classifier.classify(&f)?))))
        .collect()
}

pub fn screen_decisions(
    per_condition: &[(Condition, DecisionTrace)],
) -> Result<ScreeningReport, IntentError> {
    let missing: Vec<Condition> = SCREENING_CONDITIONS
        .into_iter()
        .filter(|c| !per_condition.iter().any(|(have, _)| have == c))
        .collect();
    if !missing.is_empty() {
        return Err(IntentError::MissingConditions(missing));
    }
    let mut conditions = Vec::with_capacity(SCREENING_CONDITIONS.len());
    for condition in SCREENING_CONDITIONS {
        let (_, dt) = per_condition
            .iter()
            .find(|(c, _)| *c == condition)
            .expect("checked above");
        let attempts: Vec<&Annotation<Intent>> = dt
            .attempts
            .iter()
            .filter(|a| a.label == condition.intent)
            .collect();
        if attempts.len() != ATTEMPTS_PER_CONDITION {
            return Err(IntentError::WrongAttemptCount {
                condition,
                expected: ATTEMPTS_PER_CONDITION,
                found: attempts.len(),
            });
        }
        let hold_s: Vec<f64> = attempts
            .iter()
            .map(|a| max_correct_hold(&dt.decisions, a, dt.decision_rate_hz))
            .collect();
        let passed = hold_s.iter().all(|&h| h >= MIN_HOLD_S);
        conditions.push(ConditionResult {
            condition,
            hold_s,
            passed,
        });
    }
    let verdict = if conditions.iter().all(|c| c.passed) {
        ControlGroup::Emg
    } else {
        ControlGroup::Sh
    };
    Ok(ScreeningReport {
        conditions,
        verdict,
    })
}

/// Decodes the six condition traces with `classifier` and applies the
/// two-second hold rule.
pub fn screen_emg_eligibility(
    traces: &[(Condition, EmgTrace)],
    classifier: &EmgClassifier,
) -> Result<ScreeningReport, IntentError> {
    let missing: Vec<Condition> = SCREENING_CONDITIONS
        .into_iter()
        .filter(|c| !traces.iter().any(|(have, _)| have == c))
        .collect();
    if !missing.is_empty() {
        return Err(IntentError::MissingConditions(missing));
    }
    let mut decoded = vec![];
    for (condition, trace) in traces {
        decoded.push((
            *condition,
            DecisionTrace {
                decision_rate_hz: classifier.window().decision_rate(trace.rate_hz),
                decisions: decode_trace(trace, classifier)?,
                attempts: trace.annotations.clone(),
            },
        ));
    }
    screen_decisions(&decoded)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decisions_with_hold(intent: Intent, hold_frames: usize, rate: f64) -> DecisionTrace {
        // Three 3 s attempts; each shows `hold_frames` correct decisions then noise.
        let mut decisions = Vec::new();
        let mut attempts = Vec::new();
        let per = (3.0 * rate) as usize;
        let other = if intent == Intent::Open {
            Intent::Close
        } else {
            Intent::Open
        };
        for a in 0..3 {
            let start = a * per;
            attempts.push(Annotation {
                start: start as f64 / rate,
                end: (start + per) as f64 / rate,
                label: intent,
            });
            for i in 0..per {
                let label = if i < hold_frames {
                    intent
                } else if (i - hold_frames) % 2 == 0 {
                    other
                } else {
                    intent
                };
                decisions.push(((start + i) as f64 / rate, label));
            }
        }
        DecisionTrace {
            decision_rate_hz: rate,
            decisions,
            attempts,
        }
    }

    fn all_conditions(hold_frames: usize) -> Vec<(Condition, DecisionTrace)> {
        SCREENING_CONDITIONS
            .into_iter()
            .map(|c| (c, decisions_with_hold(c.intent, hold_frames, 50.0)))
            .collect()
    }

    #[test]
    fn two_second_rule_is_a_strict_boundary() {
        assert_eq!(
            screen_decisions(&all_conditions(100)).unwrap().verdict,
            ControlGroup::Emg
        );
        let report = screen_decisions(&all_conditions(95)).unwrap();
        assert_eq!(report.verdict, ControlGroup::Sh);
        assert!((report.conditions[0].hold_s[0] - 1.9).abs() < 1e-12);
    }

    #[test]
    fn single_short_attempt_fails_screening() {
        let mut conds = all_conditions(150);
        conds[4].1 = decisions_with_hold(Intent::Relax, 150, 50.0);
        // Break only the second attempt of the last condition.
        let dt = &mut conds[5].1;
        for d in dt
            .decisions
            .iter_mut()
            .filter(|(t, _)| *t >= 3.0 + 1.9 && *t < 3.0 + 2.1)
        {
            d.1 = Intent::Relax;
        }
        let report = screen_decisions(&conds).unwrap();
        assert_eq!(report.verdict, ControlGroup::Sh);
        assert!(!report.conditions[5].passed);
        assert!(report.conditions[..5].iter().all(|c| c.passed));
    }

    #[test]
    fn missing_conditions_listed() {
        let mut conds = all_conditions(150);
        conds.remove(3);
        match screen_decisions(&conds) {
            Err(IntentError::MissingConditions(m)) => assert_eq!(m, [SCREENING_CONDITIONS[3]]),
            other => panic!("unexpected {other:?}"),
        }
        match screen_decisions(&[]) {
            Err(IntentError::MissingConditions(m)) => assert_eq!(m.len(), 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_attempt_count_rejected() {
        let mut conds = all_conditions(150);
        conds[0].1.attempts.pop();
        assert!(matches!(
            screen_decisions(&conds),
            Err(IntentError::WrongAttemptCount { found: 2, .. })
        ));
    }

    #[test]
    fn scripts_have_three_attempts() {
        for i in Intent::ALL {
            let s = screening_script(i);
            assert_eq!(s.iter().filter(|(l, d)| *l == i && *d == 3.0).count(), 3);
        }
        assert_eq!(SCREENING_CONDITIONS[3].key(), "open_off_table");
    }
}
