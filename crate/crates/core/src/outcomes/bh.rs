//! Benjamini-Hochberg step-up procedure.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhDecision<L> {
    pub label: L,
    pub p: f64,
    /// 1-based position in the stable ascending p order.
    pub rank: usize,
    /// `rank · q / m`.
    pub threshold: f64,
    pub significant: bool,
}

/// Applies BH at FDR level `q`. Output follows input order; ties in p keep
/// input order when ranked.
pub fn bh_procedure<L: Clone>(
    tests: &[(L, f64)],
    q: f64,
) -> Result<Vec<BhDecision<L>>, StatsError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(StatsError::InvalidLevel(q));
    }
    if tests.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    for (i, (_, p)) in tests.iter().enumerate() {
        if !(0.0..=1.0).contains(p) {
            return Err(StatsError::PValueOutOfRange {
                index: i,
                value: *p,
            });
        }
    }
    let m = tests.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| tests[a].1.total_cmp(&tests[b].1));
    let threshold = |rank: usize| rank as f64 * q / m as f64;
    let cutoff = (1..=m)
        .rev()
        .find(|&rank| tests[order[rank - 1]].1 <= threshold(rank))
        .unwrap_or(0);
    let mut out: Vec<Option<BhDecision<L>>> = alloc::vec![None; m];
    for (pos, &idx) in order.iter().enumerate() {
        let rank = pos + 1;
        out[idx] = Some(BhDecision {
            label: tests[idx].0.clone(),
            p: tests[idx].1,
            rank,
            threshold: threshold(rank),
            significant: rank <= cutoff,
        });
    }
    Ok(out
        .into_iter()
        .map(|d| d.expect("every index ranked"))
        .collect())
}
