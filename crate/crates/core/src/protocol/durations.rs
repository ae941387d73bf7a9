use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::tasks::TrainingTask;
use super::{mix_seed, ProtocolError};

/// Active seconds a task takes in a given session. Implementations must be
/// pure so that sessions replay identically.
pub trait DurationModel {
    fn task_seconds(&self, session: u8, task: &TrainingTask) -> f64;
}

/// Per-phase lognormal seconds per repetition; one draw per task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalDurations {
    /// Median seconds per repetition, indexed by task phase.
    pub median_per_rep_s: [f64; 5],
    /// Log-scale spread, same indexing.
    pub sigma: [f64; 5],
    pub seed: u64,
}

impl Default for LognormalDurations {
    fn default() -> Self {
        LognormalDurations {
            median_per_rep_s: [30.0, 15.0, 45.0, 18.0, 36.0],
            sigma: [0.3; 5],
            seed: 0,
        }
    }
}

impl LognormalDurations {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let ok = self
            .median_per_rep_s
            .iter()
            .all(|m| m.is_finite() && *m > 0.0)
            && self.sigma.iter().all(|s| s.is_finite() && *s >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(ProtocolError::InvalidDurationModel)
        }
    }

    /// Median active time of the whole protocol.
    pub fn median_total(&self, tasks: &[TrainingTask]) -> f64 {
        tasks
            .iter()
            .map(|t| self.median_per_rep_s[t.phase.index()] * t.reps as f64)
            .sum()
    }
}

impl DurationModel for LognormalDurations {
    fn task_seconds(&self, session: u8, task: &TrainingTask) -> f64 {
        let k = task.phase.index();
        let mu = libm::log(self.median_per_rep_s[k] * task.reps as f64);
        let sigma = self.sigma[k];
        if sigma == 0.0 {
            return libm::exp(mu);
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(mix_seed(self.seed, &[session as u64, task.id as u64]));
        LogNormal::new(mu, sigma)
            .expect("validated")
            .sample(&mut rng)
    }
}

/// Spreads a fixed protocol total over tasks in proportion to repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionalDurations {
    pub seconds_per_rep: f64,
}

impl ProportionalDurations {
    pub fn with_total(total_s: f64, tasks: &[TrainingTask]) -> Self {
        let reps: u32 = tasks.iter().map(|t| t.reps).sum();
        ProportionalDurations {
            seconds_per_rep: if reps == 0 {
                0.0
            } else {
                total_s / reps as f64
            },
        }
    }
}

impl DurationModel for ProportionalDurations {
    fn task_seconds(&self, _session: u8, task: &TrainingTask) -> f64 {
        self.seconds_per_rep * task.reps as f64
    }
}

impl<F: Fn(u8, &TrainingTask) -> f64> DurationModel for F {
    fn task_seconds(&self, session: u8, task: &TrainingTask) -> f64 {
        self(session, task)
    }
}

/// Lognormal model whose median total equals `target_s`.
pub fn lognormal_with_median_total(
    target_s: f64,
    tasks: &[TrainingTask],
    seed: u64,
) -> LognormalDurations {
    let base = LognormalDurations::default().with_seed(seed);
    let scale = target_s / base.median_total(tasks);
    LognormalDurations {
        median_per_rep_s: base.median_per_rep_s.map(|m| m * scale),
        ..base
    }
}
