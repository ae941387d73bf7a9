//! Full cohort pipeline: gains, gating, per-test choice, BH and the
//! descriptive secondary tables.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::bh::bh_procedure;
use super::data::{Comparison, Measure, SubjectOutcomes, ARAT_MCID, FM_MCID_RANGE};
use super::gains::{compute_gains, display_gain, GainSet};
use super::stats::{levene, paired_t_diffs, shapiro_wilk};
use super::wilcoxon::{wilcoxon_diffs, WilcoxonMethod};
use super::{OutcomeError, StatsError};
use crate::intent::ControlGroup;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// FDR level.
    pub q: f64,
    /// Level for the normality and homogeneity gates.
    pub alpha: f64,
    pub wilcoxon: WilcoxonMethod,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            q: 0.05,
            alpha: 0.05,
            wilcoxon: WilcoxonMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestKind {
    PairedT,
    Wilcoxon,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::PairedT => "paired-t",
            TestKind::Wilcoxon => "wilcoxon",
        }
    }
}

/// Normality and homogeneity gate for one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureGate {
    pub measure: Measure,
    /// Shapiro-Wilk p on each comparison's gains; `None` if the test failed.
    pub normality_p: Vec<(Comparison, Option<f64>)>,
    /// Levene p across the phase score groups.
    pub levene_p: Option<f64>,
    pub parametric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub label: String,
    pub measure: Measure,
    pub comparison: Comparison,
    pub n: usize,
    pub gain_sum: i64,
    pub mean_gain: f64,
    /// Mean gain at display precision.
    pub mean_display: String,
    pub kind: TestKind,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub rank: Option<usize>,
    pub threshold: Option<f64>,
    pub significant: bool,
    pub error: Option<String>,
}

/// Mean gain for a subgroup; no inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMean {
    pub group: String,
    pub measure: Measure,
    pub comparison: Comparison,
    pub n: usize,
    pub gain_sum: i64,
    pub mean_gain: Option<f64>,
    pub mean_display: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub q: f64,
    pub alpha: f64,
    /// Number of tests entering BH.
    pub m: usize,
    pub n_subjects: usize,
    pub gates: Vec<MeasureGate>,
    pub fm: Vec<TestResult>,
    pub arat: Vec<TestResult>,
    pub by_group: Vec<GroupMean>,
    pub bbt_by_function: Vec<GroupMean>,
    pub warnings: Vec<String>,
    pub fm_mcid: (f64, f64),
    pub arat_mcid: f64,
}

impl CohortReport {
    pub fn primary(&self) -> impl Iterator<Item = &TestResult> {
        self.fm.iter().chain(&self.arat)
    }

    pub fn find(&self, measure: Measure, comparison: Comparison) -> Option<&TestResult> {
        self.primary()
            .find(|r| r.measure == measure && r.comparison == comparison)
    }
}

/// The primary tests in table order.
pub fn primary_tests() -> Vec<(Measure, Comparison)> {
    Measure::FM
        .into_iter()
        .chain(Measure::ARAT)
        .flat_map(|m| m.comparisons().iter().map(move |&c| (m, c)))
        .collect()
}

pub fn test_label(measure: Measure, comparison: Comparison) -> String {
    format!("{} ({})", measure.label(), comparison.as_str())
}

fn gate(
    cohort: &[SubjectOutcomes],
    measure: Measure,
    gains: &[&GainSet],
    alpha: f64,
) -> MeasureGate {
    let normality_p: Vec<(Comparison, Option<f64>)> = gains
        .iter()
        .map(|g| (g.comparison, shapiro_wilk(&g.values()).ok().map(|r| r.p)))
        .collect();
    // Phase groups over subjects scored in every phase of the measure.
    let phases = measure.phases();
    let complete: Vec<&SubjectOutcomes> = cohort
        .iter()
        .filter(|s| phases.iter().all(|&p| s.score(measure, p).is_some()))
        .collect();
    let groups: Vec<Vec<f64>> = phases
        .iter()
        .map(|&p| {
            complete
                .iter()
                .map(|s| s.score(measure, p).expect("filtered") as f64)
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
    let levene_p = levene(&refs).ok().map(|r| r.p);
    let parametric = normality_p
        .iter()
        .all(|(_, p)| p.is_some_and(|p| p >= alpha))
        && levene_p.is_some_and(|p| p >= alpha);
    MeasureGate {
        measure,
        normality_p,
        levene_p,
        parametric,
    }
}

fn run_test(
    kind: TestKind,
    gains: &GainSet,
    method: WilcoxonMethod,
) -> Result<(f64, f64), StatsError> {
    let d = gains.values();
    match kind {
        TestKind::PairedT => paired_t_diffs(&d).map(|r| (r.t, r.p)),
        TestKind::Wilcoxon => wilcoxon_diffs(&d, method).map(|r| (r.statistic, r.p)),
    }
}

fn group_means(
    cohort: &[SubjectOutcomes],
    name: &str,
    measures: &[Measure],
) -> Result<Vec<GroupMean>, OutcomeError> {
    let mut out = Vec::new();
    for &m in measures {
        for &c in m.comparisons() {
            let g = compute_gains(cohort, m, c)?;
            out.push(GroupMean {
                group: name.into(),
                measure: m,
                comparison: c,
                n: g.n(),
                gain_sum: g.sum(),
                mean_gain: g.mean(),
                mean_display: g.mean_exact().map(display_gain),
            });
        }
    }
    Ok(out)
}

/// Runs the primary inference and the descriptive secondary tables.
pub fn analyze_cohort(
    cohort: &[SubjectOutcomes],
    config: &AnalysisConfig,
) -> Result<CohortReport, OutcomeError> {
    if !(config.q > 0.0 && config.q <= 1.0) {
        return Err(OutcomeError::Stats {
            label: "BH".into(),
            source: StatsError::InvalidLevel(config.q),
        });
    }
    for s in cohort {
        s.validate()?;
    }
    let mut warnings = Vec::new();
    let tests = primary_tests();
    let mut gain_sets = Vec::with_capacity(tests.len());
    for &(m, c) in &tests {
        let g = compute_gains(cohort, m, c)?;
        if g.n() < 2 {
            return Err(OutcomeError::TooFewSubjects {
                label: test_label(m, c),
                n: g.n(),
            });
        }
        if !g.excluded.is_empty() {
            warnings.push(format!(
                "{}: {} subject(s) excluded for a missing phase",
                test_label(m, c),
                g.excluded.len()
            ));
        }
        gain_sets.push(g);
    }

    let mut measures: Vec<Measure> = tests.iter().map(|(m, _)| *m).collect();
    measures.dedup();
    let gates: Vec<MeasureGate> = measures
        .iter()
        .map(|&m| {
            let gs: Vec<&GainSet> = gain_sets.iter().filter(|g| g.measure == m).collect();
            gate(cohort, m, &gs, config.alpha)
        })
        .collect();

    let mut rows: Vec<TestResult> = gain_sets
        .iter()
        .map(|g| {
            let parametric = gates
                .iter()
                .find(|gt| gt.measure == g.measure)
                .is_some_and(|gt| gt.parametric);
            let kind = if parametric {
                TestKind::PairedT
            } else {
                TestKind::Wilcoxon
            };
            let mean = g.mean_exact().expect("n >= 2");
            let (statistic, p, error) = match run_test(kind, g, config.wilcoxon) {
                Ok((s, p)) => (Some(s), Some(p), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            TestResult {
                label: test_label(g.measure, g.comparison),
                measure: g.measure,
                comparison: g.comparison,
                n: g.n(),
                gain_sum: g.sum(),
                mean_gain: super::gains::ratio_to_f64(mean),
                mean_display: display_gain(mean),
                kind,
                statistic,
                p,
                rank: None,
                threshold: None,
                significant: false,
                error,
            }
        })
        .collect();

    let tested: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.p.map(|p| (i, p)))
        .collect();
    let m = tested.len();
    if m > 0 {
        let decisions = bh_procedure(&tested, config.q).map_err(|source| OutcomeError::Stats {
            label: "BH".into(),
            source,
        })?;
        for d in decisions {
            let r = &mut rows[d.label];
            r.rank = Some(d.rank);
            r.threshold = Some(d.threshold);
            r.significant = d.significant;
        }
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        warnings.push(format!(
            "{}: {}",
            r.label,
            r.error.as_deref().unwrap_or_default()
        ));
    }

    let n_fm = tests
        .iter()
        .filter(|(m, _)| Measure::FM.contains(m))
        .count();
    let arat = rows.split_off(n_fm);

    let mut by_group = Vec::new();
    for group in [ControlGroup::Emg, ControlGroup::Sh] {
        let sub: Vec<SubjectOutcomes> = cohort
            .iter()
            .filter(|s| s.group == group)
            .cloned()
            .collect();
        let measures: Vec<Measure> = Measure::FM.into_iter().chain(Measure::ARAT).collect();
        by_group.extend(group_means(&sub, group.as_str(), &measures)?);
    }
    let mut bbt_by_function = Vec::new();
    for (name, flag) in [("functional", true), ("non-functional", false)] {
        let sub: Vec<SubjectOutcomes> = cohort
            .iter()
            .filter(|s| s.functional() == Some(flag))
            .cloned()
            .collect();
        bbt_by_function.extend(group_means(&sub, name, &[Measure::Bbt])?);
    }

    Ok(CohortReport {
        q: config.q,
        alpha: config.alpha,
        m,
        n_subjects: cohort.len(),
        gates,
        fm: rows,
        arat,
        by_group,
        bbt_by_function,
        warnings,
        fm_mcid: FM_MCID_RANGE,
        arat_mcid: ARAT_MCID,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcomes::data::{AratScores, FmScores};

    fn flat_subject(id: &str) -> SubjectOutcomes {
        let mut s = SubjectOutcomes::new(id, ControlGroup::Sh);
        for (i, p) in s.phases.iter_mut().enumerate() {
            if i < 2 {
                p.fm = Some(FmScores {
                    distal: 3,
                    proximal: 20,
                });
            }
            p.arat = Some(AratScores {
                grasp: 4,
                grip: 2,
                pinch: 1,
                gross: 3,
            });
            p.bbt = Some(0);
        }
        s
    }

    #[test]
    fn eighteen_primary_tests_in_table_order() {
        let t = primary_tests();
        assert_eq!(t.len(), 18);
        assert_eq!(t[0], (Measure::FmDistal, Comparison::A));
        assert_eq!(t[3], (Measure::AratGrasp, Comparison::A));
        assert_eq!(t[17], (Measure::AratTotal, Comparison::C));
        assert_eq!(
            test_label(Measure::AratGrip, Comparison::C),
            "ARAT-grip (C)"
        );
    }

    #[test]
    fn identical_subjects_report_row_errors() {
        let cohort: Vec<SubjectOutcomes> = (0..5).map(|i| flat_subject(&format!("s{i}"))).collect();
        let report = analyze_cohort(&cohort, &AnalysisConfig::default()).unwrap();
        assert_eq!(report.fm.len(), 3);
        assert_eq!(report.arat.len(), 15);
        assert_eq!(report.m, 0);
        for r in report.primary() {
            assert_eq!(r.mean_gain, 0.0);
            assert_eq!(r.kind, TestKind::Wilcoxon);
            assert!(r.error.is_some() && r.p.is_none() && !r.significant);
        }
        assert_eq!(report.bbt_by_function[0].n, 0);
        assert_eq!(report.bbt_by_function[3].n, 5);
    }

    #[test]
    fn too_few_subjects_rejected() {
        let cohort = [flat_subject("only")];
        assert!(matches!(
            analyze_cohort(&cohort, &AnalysisConfig::default()),
            Err(OutcomeError::TooFewSubjects { n: 1, .. })
        ));
    }

    #[test]
    fn invalid_q_rejected() {
        let cohort: Vec<SubjectOutcomes> = (0..3).map(|i| flat_subject(&format!("s{i}"))).collect();
        let cfg = AnalysisConfig {
            q: 1.5,
            ..AnalysisConfig::default()
        };
        assert!(analyze_cohort(&cohort, &cfg).is_err());
    }
}
