//! Per-subject gains and exact mean gains.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::data::{Comparison, Measure, SubjectOutcomes};
use super::OutcomeError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainSet {
    pub measure: Measure,
    pub comparison: Comparison,
    /// `(subject id, to - from)` for every subject with both phases.
    pub gains: Vec<(String, i64)>,
    /// Subjects skipped for a missing phase.
    pub excluded: Vec<String>,
}

impl GainSet {
    pub fn n(&self) -> usize {
        self.gains.len()
    }

    pub fn sum(&self) -> i64 {
        self.gains.iter().map(|(_, g)| g).sum()
    }

    pub fn mean_exact(&self) -> Option<Ratio<i64>> {
        (self.n() > 0).then(|| Ratio::new(self.sum(), self.n() as i64))
    }

    pub fn mean(&self) -> Option<f64> {
        self.mean_exact().map(ratio_to_f64)
    }

    pub fn values(&self) -> Vec<f64> {
        self.gains.iter().map(|(_, g)| *g as f64).collect()
    }
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Integer gains for one measure and comparison.
pub fn compute_gains(
    cohort: &[SubjectOutcomes],
    measure: Measure,
    comparison: Comparison,
) -> Result<GainSet, OutcomeError> {
    if !measure.comparisons().contains(&comparison) {
        return Err(OutcomeError::UndefinedComparison {
            measure,
            comparison,
        });
    }
    let (from, to) = comparison.phases();
    let mut gains = Vec::new();
    let mut excluded = Vec::new();
    for s in cohort {
        match (s.score(measure, from), s.score(measure, to)) {
            (Some(a), Some(b)) => gains.push((s.id.clone(), b - a)),
            _ => excluded.push(s.id.clone()),
        }
    }
    Ok(GainSet {
        measure,
        comparison,
        gains,
        excluded,
    })
}

/// `r` rounded half away from zero to `decimals` places, as a scaled integer.
pub fn round_scaled(r: Ratio<i64>, decimals: u32) -> i64 {
    let scale = 10i64.pow(decimals);
    let x = r * scale;
    let (n, d) = (*x.numer(), *x.denom());
    let q = n / d;
    let rem = (n % d).abs();
    if 2 * rem >= d {
        q + n.signum()
    } else {
        q
    }
}

/// Fixed-point text for a scaled integer, e.g. `(227, 2)` -> `"2.27"`.
pub fn format_scaled(v: i64, decimals: u32) -> String {
    let scale = 10i64.pow(decimals);
    let sign = if v < 0 { "-" } else { "" };
    let (whole, frac) = (v.abs() / scale, v.abs() % scale);
    if decimals == 0 {
        alloc::format!("{sign}{whole}")
    } else {
        alloc::format!("{sign}{whole}.{frac:0width$}", width = decimals as usize)
    }
}

/// Display form of an exact mean gain at two decimals.
pub fn display_gain(r: Ratio<i64>) -> String {
    format_scaled(round_scaled(r, 2), 2)
}

/// Mean of two groups recombined: `(n1·g1 + n2·g2) / (n1 + n2)`.
pub fn pooled_mean(n1: i64, g1: Ratio<i64>, n2: i64, g2: Ratio<i64>) -> Ratio<i64> {
    (g1 * n1 + g2 * n2) / (n1 + n2)
}
