//! Clinical outcome statistics.
//!
//! Scores are ingested per subscale and phase. Gains are exact integer
//! differences and means are kept as rationals until display. Each measure
//! is gated on Shapiro-Wilk normality of its gains and Levene homogeneity of
//! its phase scores: a passing measure is tested with paired t, otherwise
//! with the Wilcoxon signed-rank test. The primary p-values are then
//! corrected together with Benjamini-Hochberg.

mod analysis;
mod bh;
mod data;
mod gains;
mod stats;
mod wilcoxon;

use alloc::string::String;

use thiserror::Error;

pub use analysis::{
    analyze_cohort, primary_tests, test_label, AnalysisConfig, CohortReport, GroupMean,
    MeasureGate, TestKind, TestResult,
};
pub use bh::{bh_procedure, BhDecision};
pub use data::*;
pub use gains::{
    compute_gains, display_gain, format_scaled, pooled_mean, ratio_to_f64, round_scaled, GainSet,
};
pub use num_rational::Ratio;
pub use stats::{levene, paired_t, paired_t_diffs, shapiro_wilk, Levene, PairedT, ShapiroWilk};
pub use wilcoxon::{
    doubled_abs_ranks, wilcoxon_diffs, wilcoxon_signed_rank, wilcoxon_signed_rank_with, Wilcoxon,
    WilcoxonMethod, EXACT_MAX_N,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("too many samples: at most {max}, got {got}")]
    TooManySamples { max: usize, got: usize },
    #[error("at least two groups required, got {0}")]
    TooFewGroups(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("degenerate pairs: differences have zero variance")]
    DegeneratePairs,
    #[error("all differences are zero")]
    AllZeroDifferences,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("p-value {value} at position {index} is outside [0, 1]")]
    PValueOutOfRange { index: usize, value: f64 },
    #[error("level {0} must lie in (0, 1]")]
    InvalidLevel(f64),
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutcomeError {
    #[error("subject {subject}: {what}")]
    InvalidScore { subject: String, what: &'static str },
    #[error("{measure:?} has no comparison {comparison:?}")]
    UndefinedComparison {
        measure: Measure,
        comparison: Comparison,
    },
    #[error("{label}: need at least 2 subjects, have {n}")]
    TooFewSubjects { label: String, n: usize },
    #[error("{label}: {source}")]
    Stats { label: String, source: StatsError },
}
