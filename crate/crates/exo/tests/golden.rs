//! Frozen results for the bundled cohort. Reference p-values were computed
//! with scipy (ttest_1samp, and an exact signed-rank count with zeros
//! dropped and average ranks).

use std::path::PathBuf;

use exo::cohort::read_cohort;
use exo_core::outcomes::{analyze_cohort, AnalysisConfig, Comparison, Measure, TestKind};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/golden_cohort.csv")
}

use Comparison::{A, B, C};
use Measure::*;

// (measure, comparison, gain sum, p, parametric)
const EXPECTED: [(Measure, Comparison, i64, f64, bool); 18] = [
    (FmDistal, A, 25, 0.000_344_595_559_945_301_6, true),
    (FmProximal, A, 4, 0.706_041_024_258_477_8, true),
    (FmTotal, A, 29, 0.051_565_497_773_036_505, true),
    (AratGrasp, A, 1, 0.830_854_703_014_992_8, true),
    (AratGrasp, B, 19, 0.000_406_903_138_797_764_6, true),
    (AratGrasp, C, 18, 0.006_080_847_927_088_538, true),
    (AratGrip, A, 9, 0.146_039_293_967_868_86, true),
    (AratGrip, B, -7, 0.295_432_806_458_420_35, true),
    (AratGrip, C, -16, 0.007_355_028_857_805_139, true),
    (AratPinch, A, 1, 1.0, false),
    (AratPinch, B, -10, 0.175_781_25, false),
    (AratPinch, C, -11, 0.140_625, false),
    (AratGross, A, 4, 0.582_031_25, false),
    (AratGross, B, -6, 0.478_515_625, false),
    (AratGross, C, -10, 0.474_609_375, false),
    (AratTotal, A, 15, 0.053_097_818_313_555_66, true),
    (AratTotal, B, -4, 0.783_485_856_177_150_5, true),
    (AratTotal, C, -19, 0.241_987_733_390_992_92, true),
];

#[test]
fn golden_cohort_matches_frozen_values() {
    let cohort = read_cohort(&golden_path()).unwrap();
    assert_eq!(cohort.len(), 11);
    let report = analyze_cohort(&cohort, &AnalysisConfig::default()).unwrap();
    assert_eq!(report.m, 18);
    for (measure, cmp, sum, p, parametric) in EXPECTED {
        let r = report.find(measure, cmp).unwrap();
        assert_eq!(r.n, 11, "{}", r.label);
        assert_eq!(r.gain_sum, sum, "{}", r.label);
        let got = r.p.unwrap();
        assert!(
            (got - p).abs() <= 1e-6 * p.max(1e-3),
            "{}: {got} vs {p}",
            r.label
        );
        let want_kind = if parametric {
            TestKind::PairedT
        } else {
            TestKind::Wilcoxon
        };
        assert_eq!(r.kind, want_kind, "{}", r.label);
    }
}

#[test]
fn golden_cohort_rejections() {
    let report = analyze_cohort(
        &read_cohort(&golden_path()).unwrap(),
        &AnalysisConfig::default(),
    )
    .unwrap();
    let sig: Vec<&str> = report
        .primary()
        .filter(|r| r.significant)
        .map(|r| r.label.as_str())
        .collect();
    assert_eq!(sig.len(), 4, "{sig:?}");
    for (m, c) in [(FmDistal, A), (AratGrasp, B), (AratGrasp, C), (AratGrip, C)] {
        assert!(report.find(m, c).unwrap().significant);
    }
}

#[test]
fn golden_cohort_pooled_means_display() {
    let report = analyze_cohort(
        &read_cohort(&golden_path()).unwrap(),
        &AnalysisConfig::default(),
    )
    .unwrap();
    let shown = |m, c| report.find(m, c).unwrap().mean_display.clone();
    assert_eq!(shown(FmDistal, A), "2.27");
    assert_eq!(shown(FmProximal, A), "0.36");
    assert_eq!(shown(FmTotal, A), "2.64");
}

#[test]
fn golden_cohort_group_sums() {
    let report = analyze_cohort(
        &read_cohort(&golden_path()).unwrap(),
        &AnalysisConfig::default(),
    )
    .unwrap();
    let sum = |group: &str, m: Measure, c: Comparison| {
        let g = report
            .by_group
            .iter()
            .find(|g| g.group == group && g.measure == m && g.comparison == c)
            .unwrap();
        (g.n, g.gain_sum)
    };
    assert_eq!(sum("EMG", FmDistal, A), (6, 18));
    assert_eq!(sum("SH", FmDistal, A), (5, 7));
    assert_eq!(sum("EMG", AratGrip, B), (6, -11));
    assert_eq!(sum("SH", AratGrasp, C), (5, 15));
    assert_eq!(sum("EMG", AratTotal, C), (6, -23));
    assert_eq!(sum("SH", AratTotal, B), (5, 11));

    let bbt = |group: &str, c| {
        let g = report
            .bbt_by_function
            .iter()
            .find(|g| g.group == group && g.comparison == c)
            .unwrap();
        (g.n, g.gain_sum)
    };
    assert_eq!(bbt("functional", B), (4, -37));
    assert_eq!(bbt("non-functional", C), (7, 12));
}
