use alloc::string::String;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mix_seed, ProtocolError};
use crate::controller::{calibrate_rom, ControllerConfig, HandSize, Mas, RomCalibration};
use crate::intent::{
    calibrate_sh, labeled_features, train_classifier, training_script, ClassifierParams,
    ControlGroup, ShConfig,
};
use crate::signals::{gen_emg_trace, gen_load_trace, LoadProfile, Posture, SignalProfile};

/// Synthetic participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectModel {
    pub id: String,
    pub group: ControlGroup,
    pub hand_size: HandSize,
    pub mas: Mas,
    pub emg: SignalProfile,
    pub load: LoadProfile,
    /// Chance of a rest break after each task.
    pub break_probability: f64,
    pub seed: u64,
}

impl SubjectModel {
    pub fn new(id: &str, group: ControlGroup, seed: u64) -> Self {
        SubjectModel {
            id: id.into(),
            group,
            hand_size: HandSize::M,
            mas: Mas::One,
            emg: SignalProfile::separable(seed),
            load: LoadProfile {
                seed,
                ..LoadProfile::default()
            },
            break_probability: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..=1.0).contains(&self.break_probability) {
            return Err(ProtocolError::InvalidSubject(
                "break_probability must lie in [0, 1]",
            ));
        }
        self.emg.validate()?;
        self.load.validate()?;
        Ok(())
    }

    /// Controller settings for this wearer: hand-size moment arms and MAS
    /// stiffness.
    pub fn controller_config(&self, base: &ControllerConfig) -> ControllerConfig {
        let mut cfg = *base;
        cfg.plant = self.hand_size.plant_params(cfg.plant);
        cfg.plant.hand.stiffness_multiplier = self.mas.stiffness_multiplier();
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum IntentCalibration {
    Emg { classifier: ClassifierParams },
    Sh { thresholds: ShConfig },
}

impl IntentCalibration {
    pub fn group(&self) -> ControlGroup {
        match self {
            IntentCalibration::Emg { .. } => ControlGroup::Emg,
            IntentCalibration::Sh { .. } => ControlGroup::Sh,
        }
    }
}

/// Passive thumb cable pretensions, N; fixed for the session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThumbTension {
    pub extension_n: f64,
    pub abduction_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBundle {
    pub intent: IntentCalibration,
    pub rom: RomCalibration,
    pub thumb: ThumbTension,
}

/// Start-of-session calibration from fresh synthetic recordings drawn with
/// `seed`.
pub fn session_calibration(
    subject: &SubjectModel,
    cfg: &ControllerConfig,
    seed: u64,
) -> Result<CalibrationBundle, ProtocolError> {
    subject.validate()?;
    let intent = match subject.group {
        ControlGroup::Emg => {
            let profile = subject.emg.with_seed(mix_seed(seed, &[1]));
            let trace = gen_emg_trace(&profile, &training_script())?;
            let labeled = labeled_features(&trace, &Default::default())?;
            IntentCalibration::Emg {
                classifier: train_classifier(&labeled)?.params().clone(),
            }
        }
        ControlGroup::Sh => {
            let rec = |posture, k| {
                let p = LoadProfile {
                    seed: mix_seed(seed, &[2, k]),
                    ..subject.load
                };
                gen_load_trace(&p, &[(posture, 3.0)])
            };
            let rest = rec(Posture::Rest, 0)?;
            let shrug = rec(Posture::Elevated, 1)?;
            let depress = rec(Posture::Depressed, 2)?;
            IntentCalibration::Sh {
                thresholds: calibrate_sh(&rest, &shrug, &depress)?,
            }
        }
    };
    let rom = calibrate_rom(subject.hand_size, &cfg.rom_table);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[3]));
    let scale = subject.hand_size.moment_arm_scale();
    let thumb = ThumbTension {
        extension_n: 6.0 * scale + rng.random_range(-0.5..0.5),
        abduction_n: 4.0 * scale + rng.random_range(-0.5..0.5),
    };
    Ok(CalibrationBundle { intent, rom, thumb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::IntentError;

    #[test]
    fn sh_subject_gets_thresholds_only() {
        let s = SubjectModel::new("S01", ControlGroup::Sh, 4);
        let b = session_calibration(&s, &ControllerConfig::default(), 17).unwrap();
        assert!(matches!(b.intent, IntentCalibration::Sh { .. }));
        assert_eq!(
            b.rom,
            calibrate_rom(HandSize::M, &ControllerConfig::default().rom_table)
        );
    }

    #[test]
    fn emg_subject_gets_classifier() {
        let s = SubjectModel::new("E01", ControlGroup::Emg, 4);
        let b = session_calibration(&s, &ControllerConfig::default(), 17).unwrap();
        assert_eq!(b.intent.group(), ControlGroup::Emg);
    }

    #[test]
    fn same_seed_same_bundle() {
        let cfg = ControllerConfig::default();
        for group in [ControlGroup::Emg, ControlGroup::Sh] {
            let s = SubjectModel::new("X", group, 8);
            let a = session_calibration(&s, &cfg, 99).unwrap();
            assert_eq!(a, session_calibration(&s, &cfg, 99).unwrap());
            assert_ne!(a.thumb, session_calibration(&s, &cfg, 100).unwrap().thumb);
        }
    }

    #[test]
    fn flat_harness_blocks_session() {
        let mut s = SubjectModel::new("S02", ControlGroup::Sh, 1);
        s.load.elevated_n = s.load.rest_n;
        let err = session_calibration(&s, &ControllerConfig::default(), 0).unwrap_err();
        assert!(matches!(
            err,
            ProtocolError::Calibration(IntentError::UncalibratableHarness(_))
        ));
    }
}
