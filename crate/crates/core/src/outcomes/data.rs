//! Cohort data model: per-subject subscale scores per assessment phase.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::OutcomeError;
use crate::intent::ControlGroup;

pub const FM_DISTAL_MAX: u32 = 24;
pub const FM_PROXIMAL_MAX: u32 = 42;
pub const FM_MAX: u32 = 66;
pub const ARAT_GRASP_MAX: u32 = 18;
pub const ARAT_GRIP_MAX: u32 = 12;
pub const ARAT_PINCH_MAX: u32 = 18;
pub const ARAT_GROSS_MAX: u32 = 9;
pub const ARAT_MAX: u32 = 57;

/// Minimal clinically important differences, reported next to gains.
pub const FM_MCID_RANGE: (f64, f64) = (4.25, 7.25);
pub const ARAT_MCID: f64 = 5.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Baseline,
    PostUnassisted,
    PostAssisted,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Baseline, Phase::PostUnassisted, Phase::PostAssisted];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Baseline => "baseline",
            Phase::PostUnassisted => "post_unassisted",
            Phase::PostAssisted => "post_assisted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s.trim())
    }
}

/// Gain comparison between two phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Comparison {
    /// Post-training unassisted minus baseline.
    A,
    /// Post-training assisted minus baseline.
    B,
    /// Post-training assisted minus post-training unassisted.
    C,
}

impl Comparison {
    pub const ALL: [Comparison; 3] = [Comparison::A, Comparison::B, Comparison::C];

    /// `(from, to)`; the gain is `to - from`.
    pub fn phases(self) -> (Phase, Phase) {
        match self {
            Comparison::A => (Phase::Baseline, Phase::PostUnassisted),
            Comparison::B => (Phase::Baseline, Phase::PostAssisted),
            Comparison::C => (Phase::PostUnassisted, Phase::PostAssisted),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::A => "A",
            Comparison::B => "B",
            Comparison::C => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    FmDistal,
    FmProximal,
    FmTotal,
    AratGrasp,
    AratGrip,
    AratPinch,
    AratGross,
    AratTotal,
    Bbt,
}

impl Measure {
    pub const FM: [Measure; 3] = [Measure::FmDistal, Measure::FmProximal, Measure::FmTotal];
    pub const ARAT: [Measure; 5] = [
        Measure::AratGrasp,
        Measure::AratGrip,
        Measure::AratPinch,
        Measure::AratGross,
        Measure::AratTotal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Measure::FmDistal => "FM-distal",
            Measure::FmProximal => "FM-proximal",
            Measure::FmTotal => "FM-total",
            Measure::AratGrasp => "ARAT-grasp",
            Measure::AratGrip => "ARAT-grip",
            Measure::AratPinch => "ARAT-pinch",
            Measure::AratGross => "ARAT-gross",
            Measure::AratTotal => "ARAT-total",
            Measure::Bbt => "BBT",
        }
    }

    /// Comparisons that are defined for this measure. FM is never scored
    /// with the device on.
    pub fn comparisons(self) -> &'static [Comparison] {
        match self {
            Measure::FmDistal | Measure::FmProximal | Measure::FmTotal => &[Comparison::A],
            _ => &Comparison::ALL,
        }
    }

    pub fn phases(self) -> &'static [Phase] {
        match self {
            Measure::FmDistal | Measure::FmProximal | Measure::FmTotal => {
                &[Phase::Baseline, Phase::PostUnassisted]
            }
            _ => &Phase::ALL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmScores {
    pub distal: u32,
    pub proximal: u32,
}

impl FmScores {
    pub fn total(&self) -> u32 {
        self.distal + self.proximal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AratScores {
    pub grasp: u32,
    pub grip: u32,
    pub pinch: u32,
    pub gross: u32,
}

impl AratScores {
    pub fn total(&self) -> u32 {
        self.grasp + self.grip + self.pinch + self.gross
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseScores {
    pub fm: Option<FmScores>,
    pub arat: Option<AratScores>,
    pub bbt: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectOutcomes {
    pub id: String,
    pub group: ControlGroup,
    /// Indexed by [`Phase::index`].
    pub phases: [PhaseScores; 3],
}

impl SubjectOutcomes {
    pub fn new(id: impl Into<String>, group: ControlGroup) -> Self {
        SubjectOutcomes {
            id: id.into(),
            group,
            phases: Default::default(),
        }
    }

    pub fn phase(&self, phase: Phase) -> &PhaseScores {
        &self.phases[phase.index()]
    }

    pub fn phase_mut(&mut self, phase: Phase) -> &mut PhaseScores {
        &mut self.phases[phase.index()]
    }

    pub fn score(&self, measure: Measure, phase: Phase) -> Option<i64> {
        let p = self.phase(phase);
        let v = match measure {
            Measure::FmDistal => p.fm?.distal,
            Measure::FmProximal => p.fm?.proximal,
            Measure::FmTotal => p.fm?.total(),
            Measure::AratGrasp => p.arat?.grasp,
            Measure::AratGrip => p.arat?.grip,
            Measure::AratPinch => p.arat?.pinch,
            Measure::AratGross => p.arat?.gross,
            Measure::AratTotal => p.arat?.total(),
            Measure::Bbt => p.bbt?,
        };
        Some(v as i64)
    }

    /// Any blocks moved at baseline.
    pub fn functional(&self) -> Option<bool> {
        self.phase(Phase::Baseline).bbt.map(|b| b > 0)
    }

    pub fn validate(&self) -> Result<(), OutcomeError> {
        let bad = |what: &'static str| OutcomeError::InvalidScore {
            subject: self.id.clone(),
            what,
        };
        if self.phase(Phase::PostAssisted).fm.is_some() {
            return Err(bad("FM is not assessed with the device on"));
        }
        for p in &self.phases {
            if let Some(fm) = p.fm {
                if fm.distal > FM_DISTAL_MAX || fm.proximal > FM_PROXIMAL_MAX {
                    return Err(bad("FM subscale out of range"));
                }
            }
            if let Some(a) = p.arat {
                if a.grasp > ARAT_GRASP_MAX
                    || a.grip > ARAT_GRIP_MAX
                    || a.pinch > ARAT_PINCH_MAX
                    || a.gross > ARAT_GROSS_MAX
                {
                    return Err(bad("ARAT subscale out of range"));
                }
            }
        }
        Ok(())
    }
}

/// Individually ingestible score fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreField {
    FmDistal,
    FmProximal,
    FmTotal,
    AratGrasp,
    AratGrip,
    AratPinch,
    AratGross,
    AratTotal,
    Bbt,
}

impl ScoreField {
    /// Parses the `measure,subscale` column pair of the cohort CSV.
    pub fn parse(measure: &str, subscale: &str) -> Option<Self> {
        let m = measure.trim().to_ascii_lowercase();
        let s = subscale.trim().to_ascii_lowercase();
        Some(match (m.as_str(), s.as_str()) {
            ("fm", "distal") => ScoreField::FmDistal,
            ("fm", "proximal") => ScoreField::FmProximal,
            ("fm", "total") => ScoreField::FmTotal,
            ("arat", "grasp") => ScoreField::AratGrasp,
            ("arat", "grip") => ScoreField::AratGrip,
            ("arat", "pinch") => ScoreField::AratPinch,
            ("arat", "gross") => ScoreField::AratGross,
            ("arat", "total") => ScoreField::AratTotal,
            ("bbt", "" | "total") => ScoreField::Bbt,
            _ => return None,
        })
    }

    pub fn columns(self) -> (&'static str, &'static str) {
        match self {
            ScoreField::FmDistal => ("FM", "distal"),
            ScoreField::FmProximal => ("FM", "proximal"),
            ScoreField::FmTotal => ("FM", "total"),
            ScoreField::AratGrasp => ("ARAT", "grasp"),
            ScoreField::AratGrip => ("ARAT", "grip"),
            ScoreField::AratPinch => ("ARAT", "pinch"),
            ScoreField::AratGross => ("ARAT", "gross"),
            ScoreField::AratTotal => ("ARAT", "total"),
            ScoreField::Bbt => ("BBT", "total"),
        }
    }
}

#[derive(Debug, Default, Clone)]
struct Partial {
    fm: [Option<u32>; 2],
    arat: [Option<u32>; 4],
    bbt: Option<u32>,
    fm_total: Option<u32>,
    arat_total: Option<u32>,
}

/// Accumulates long-format score rows into [`SubjectOutcomes`].
///
/// Subscales of one instrument must be all present or all absent per phase;
/// optional total rows are checked against the subscale sum.
#[derive(Debug, Default)]
pub struct CohortBuilder {
    subjects: Vec<(String, ControlGroup, [Partial; 3])>,
}

impl CohortBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        subject: &str,
        group: ControlGroup,
        field: ScoreField,
        phase: Phase,
        score: u32,
    ) -> Result<(), OutcomeError> {
        let idx = match self.subjects.iter().position(|(id, _, _)| id == subject) {
            Some(i) => i,
            None => {
                self.subjects
                    .push((subject.into(), group, Default::default()));
                self.subjects.len() - 1
            }
        };
        let (id, g, phases) = &mut self.subjects[idx];
        if *g != group {
            return Err(OutcomeError::InvalidScore {
                subject: id.clone(),
                what: "subject listed under two groups",
            });
        }
        let p = &mut phases[phase.index()];
        let slot = match field {
            ScoreField::FmDistal => &mut p.fm[0],
            ScoreField::FmProximal => &mut p.fm[1],
            ScoreField::FmTotal => &mut p.fm_total,
            ScoreField::AratGrasp => &mut p.arat[0],
            ScoreField::AratGrip => &mut p.arat[1],
            ScoreField::AratPinch => &mut p.arat[2],
            ScoreField::AratGross => &mut p.arat[3],
            ScoreField::AratTotal => &mut p.arat_total,
            ScoreField::Bbt => &mut p.bbt,
        };
        if slot.is_some() {
            return Err(OutcomeError::InvalidScore {
                subject: id.clone(),
                what: "duplicate score row",
            });
        }
        *slot = Some(score);
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<SubjectOutcomes>, OutcomeError> {
        let mut out = Vec::with_capacity(self.subjects.len());
        for (id, group, partials) in self.subjects {
            let mut s = SubjectOutcomes::new(id.clone(), group);
            for (phase, p) in Phase::ALL.into_iter().zip(partials) {
                let bad = |what| OutcomeError::InvalidScore {
                    subject: id.clone(),
                    what,
                };
                let fm = match p.fm {
                    [Some(distal), Some(proximal)] => Some(FmScores { distal, proximal }),
                    [None, None] => None,
                    _ => return Err(bad("incomplete FM subscales")),
                };
                let arat = match p.arat {
                    [Some(grasp), Some(grip), Some(pinch), Some(gross)] => Some(AratScores {
                        grasp,
                        grip,
                        pinch,
                        gross,
                    }),
                    [None, None, None, None] => None,
                    _ => return Err(bad("incomplete ARAT subscales")),
                };
                if p.fm_total.is_some() && p.fm_total != fm.map(|f| f.total()) {
                    return Err(bad("FM total does not equal distal + proximal"));
                }
                if p.arat_total.is_some() && p.arat_total != arat.map(|a| a.total()) {
                    return Err(bad("ARAT total does not equal the subscale sum"));
                }
                *s.phase_mut(phase) = PhaseScores {
                    fm,
                    arat,
                    bbt: p.bbt,
                };
            }
            s.validate()?;
            out.push(s);
        }
        Ok(out)
    }
}
