//! Wilcoxon signed-rank test with an exact null distribution for small n.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::math::normal_sf;

/// Largest number of non-zero differences handled by the exact path.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WilcoxonMethod {
    /// Exact up to [`EXACT_MAX_N`], normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// Non-zero differences used.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub p: f64,
    pub exact: bool,
    /// Exact p as `extreme patterns / 2^n` when the exact path ran.
    #[serde(skip)]
    pub exact_p: Option<Ratio<u64>>,
}

/// Average ranks of `|d|`, doubled so ties stay integral.
pub fn doubled_abs_ranks(d: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    let mut ranks = vec![0u64; d.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && d[order[j + 1]].abs() == d[order[i]].abs() {
            j += 1;
        }
        // Ranks i+1..=j+1 averaged, times two.
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p from doubled ranks and the observed doubled W+.
fn exact_p(ranks: &[u64], w2: u64) -> Ratio<u64> {
    let total: u64 = ranks.iter().sum();
    // counts[s] = number of sign patterns with doubled W+ equal to s.
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    // Compare |2·s - total| to avoid halves.
    let observed = (2 * w2).abs_diff(total);
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as u64).abs_diff(total) >= observed)
        .map(|(_, c)| c)
        .sum();
    Ratio::new(extreme, 1u64 << ranks.len())
}

/// Two-sided signed-rank test on `y - x`; zero differences are dropped.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<Wilcoxon, StatsError> {
    wilcoxon_signed_rank_with(x, y, WilcoxonMethod::Auto)
}

pub fn wilcoxon_signed_rank_with(
    x: &[f64],
    y: &[f64],
    method: WilcoxonMethod,
) -> Result<Wilcoxon, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    wilcoxon_diffs(&d, method)
}

pub fn wilcoxon_diffs(d: &[f64], method: WilcoxonMethod) -> Result<Wilcoxon, StatsError> {
    if d.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let d: Vec<f64> = d.iter().copied().filter(|&v| v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Err(StatsError::AllZeroDifferences);
    }
    let ranks = doubled_abs_ranks(&d);
    let w2_plus: u64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w2_total: u64 = ranks.iter().sum();
    let w_plus = w2_plus as f64 / 2.0;
    let w_minus = (w2_total - w2_plus) as f64 / 2.0;

    let exact = match method {
        WilcoxonMethod::Auto => n <= EXACT_MAX_N,
        WilcoxonMethod::Exact => {
            if n > 63 {
                return Err(StatsError::TooManySamples { max: 63, got: n });
            }
            true
        }
        WilcoxonMethod::Normal => false,
    };
    let (p, exact_p) = if exact {
        let r = exact_p(&ranks, w2_plus);
        (*r.numer() as f64 / *r.denom() as f64, Some(r))
    } else {
        let nf = n as f64;
        let mut tie_term = 0.0;
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        for group in sorted.chunk_by(|a, b| a == b) {
            let t = group.len() as f64;
            tie_term += t * t * t - t;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let mu = nf * (nf + 1.0) / 4.0;
        let z = ((w_plus - mu).abs() - 0.5).max(0.0) / libm::sqrt(var);
        ((2.0 * normal_sf(z)).min(1.0), None)
    };
    Ok(Wilcoxon {
        n,
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        p,
        exact,
        exact_p,
    })
}
