use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::Intent;

/// Vote length used for screening and closed-loop decoding.
pub const DEFAULT_VOTE_FRAMES: usize = 5;

/// Plurality vote over the last `k` raw labels. A tie for the top count
/// keeps the previous emission; before any input the emission is RELAX.
#[derive(Debug, Clone)]
pub struct VoteSmoother {
    k: usize,
    recent: VecDeque<Intent>,
    current: Intent,
}

impl VoteSmoother {
    pub fn new(k: usize) -> Self {
        let k = k.max(1);
        VoteSmoother {
            k,
            recent: VecDeque::with_capacity(k),
            current: Intent::Relax,
        }
    }

    pub fn current(&self) -> Intent {
        self.current
    }

    pub fn push(&mut self, raw: Intent) -> Intent {
        if self.recent.len() == self.k {
            self.recent.pop_front();
        }
        self.recent.push_back(raw);
        let mut counts = [0usize; 3];
        for i in &self.recent {
            counts[i.index()] += 1;
        }
        let top = *counts.iter().max().unwrap_or(&0);
        let mut leaders = Intent::ALL.into_iter().filter(|i| counts[i.index()] == top);
        if let (Some(only), None) = (leaders.next(), leaders.next()) {
            self.current = only;
        }
        self.current
    }
}

/// Batch form of [`VoteSmoother`]. `k` of zero is treated as one.
pub fn smooth_intents(raw: &[Intent], k: usize) -> Vec<Intent> {
    let mut s = VoteSmoother::new(k);
    raw.iter().map(|&i| s.push(i)).collect()
}
