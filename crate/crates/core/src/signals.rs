//! Synthetic sensor streams: the 8-channel EMG armband and the shoulder
//! harness load cell.
//!
//! Generators are pure functions of their profile, script and seed, so two
//! calls with the same inputs produce bit-identical traces.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intent::Intent;

/// Armband channel count.
pub const EMG_CHANNELS: usize = 8;

/// Default armband frame rate.
pub const DEFAULT_EMG_RATE_HZ: f64 = 50.0;

/// Default load cell sample rate.
pub const DEFAULT_LOAD_RATE_HZ: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("empty script")]
    EmptyScript,
    #[error("script entry {index}: duration {value} s is not a positive finite number")]
    InvalidDuration { index: usize, value: f64 },
    #[error("script entry {index}: duration {value} s is shorter than one sample")]
    DurationTooShort { index: usize, value: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(&'static str),
}

/// One armband frame of normalized (0..1) channel activations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmgFrame {
    pub t: f64,
    pub channels: [f64; EMG_CHANNELS],
}

/// One harness tension reading in newtons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCellSample {
    pub t: f64,
    pub tension: f64,
}

/// Contralateral shoulder posture driving the harness tension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Posture {
    Rest,
    Elevated,
    Depressed,
}

impl Posture {
    pub const ALL: [Posture; 3] = [Posture::Rest, Posture::Elevated, Posture::Depressed];

    pub fn as_str(self) -> &'static str {
        match self {
            Posture::Rest => "rest",
            Posture::Elevated => "elevated",
            Posture::Depressed => "depressed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

/// Ground-truth label over the half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation<L> {
    pub start: f64,
    pub end: f64,
    pub label: L,
}

impl<L> Annotation<L> {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// Time-ordered samples plus non-overlapping ground-truth intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace<S, L> {
    pub rate_hz: f64,
    pub samples: Vec<S>,
    pub annotations: Vec<Annotation<L>>,
}

pub type EmgTrace = SignalTrace<EmgFrame, Intent>;
pub type LoadTrace = SignalTrace<LoadCellSample, Posture>;

/// Anything carrying a timestamp.
pub trait Timestamped {
    fn timestamp(&self) -> f64;
}

impl Timestamped for EmgFrame {
    fn timestamp(&self) -> f64 {
        self.t
    }
}

impl Timestamped for LoadCellSample {
    fn timestamp(&self) -> f64 {
        self.t
    }
}

impl<S: Timestamped, L: Copy> SignalTrace<S, L> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Ground-truth label at time `t`, if any interval covers it.
    pub fn label_at(&self, t: f64) -> Option<L> {
        self.annotations
            .iter()
            .find(|a| a.contains(t))
            .map(|a| a.label)
    }

    /// Checks timestamp ordering and annotation layout.
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err("sample rate must be positive");
        }
        if self
            .samples
            .windows(2)
            .any(|w| !(w[1].timestamp() > w[0].timestamp()))
        {
            return Err("timestamps must be strictly increasing");
        }
        if self.annotations.iter().any(|a| !(a.end > a.start)) {
            return Err("annotation intervals must be non-empty");
        }
        if self.annotations.windows(2).any(|w| w[1].start < w[0].end) {
            return Err("annotation intervals overlap or are out of order");
        }
        if let (Some(first), Some(last)) = (self.samples.first(), self.samples.last()) {
            let span_end = last.timestamp() + 1.0 / self.rate_hz;
            if self
                .annotations
                .iter()
                .any(|a| a.start < first.timestamp() - 1e-9 || a.end > span_end + 1e-9)
            {
                return Err("annotation outside trace span");
            }
        }
        Ok(())
    }
}

impl EmgTrace {
    pub fn validate_emg(&self) -> Result<(), &'static str> {
        self.validate()?;
        if self
            .samples
            .iter()
            .flat_map(|f| f.channels.iter())
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err("channel values must be finite and non-negative");
        }
        Ok(())
    }
}

/// Per-class activation statistics for one intent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: [f64; EMG_CHANNELS],
    pub variance: [f64; EMG_CHANNELS],
}

impl ChannelStats {
    pub fn uniform(mean: f64, variance: f64) -> Self {
        ChannelStats {
            mean: [mean; EMG_CHANNELS],
            variance: [variance; EMG_CHANNELS],
        }
    }
}

/// Parameters of a synthetic armband wearer.
///
/// Fatigue is a linear decay of every class mean toward zero at
/// `drift_rate` per second; spasticity is leakage of a `crosstalk` fraction
/// of each frame into the cross-channel average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalProfile {
    /// Indexed by [`Intent::index`].
    pub classes: [ChannelStats; 3],
    pub drift_rate: f64,
    pub crosstalk: f64,
    pub rate_hz: f64,
    pub seed: u64,
}

impl SignalProfile {
    /// A well-behaved wearer: extensor channels 0..4 fire on OPEN, flexor
    /// channels 4..8 on CLOSE, near silence on RELAX.
    pub fn separable(seed: u64) -> Self {
        let sd = 0.03_f64;
        let var = sd * sd;
        let mut open = ChannelStats::uniform(0.15, var);
        let mut close = ChannelStats::uniform(0.15, var);
        for ch in 0..EMG_CHANNELS / 2 {
            open.mean[ch] = 0.6;
            close.mean[ch + EMG_CHANNELS / 2] = 0.6;
        }
        SignalProfile {
            classes: [open, ChannelStats::uniform(0.05, var), close],
            drift_rate: 0.0,
            crosstalk: 0.0,
            rate_hz: DEFAULT_EMG_RATE_HZ,
            seed,
        }
    }

    pub fn with_distortion(mut self, drift_rate: f64, crosstalk: f64) -> Self {
        self.drift_rate = drift_rate;
        self.crosstalk = crosstalk;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn stats(&self, intent: Intent) -> &ChannelStats {
        &self.classes[intent.index()]
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err(SignalError::InvalidProfile("rate_hz must be positive"));
        }
        if !(0.0..=1.0).contains(&self.drift_rate) {
            return Err(SignalError::InvalidProfile(
                "drift_rate must lie in [0, 1] 1/s",
            ));
        }
        if !(0.0..=1.0).contains(&self.crosstalk) {
            return Err(SignalError::InvalidProfile("crosstalk must lie in [0, 1]"));
        }
        for stats in &self.classes {
            if stats.mean.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return Err(SignalError::InvalidProfile(
                    "class means must be finite and >= 0",
                ));
            }
            if stats.variance.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(SignalError::InvalidProfile(
                    "variances must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Splits a script into per-entry frame counts at `rate_hz`.
fn frame_counts<L>(script: &[(L, f64)], rate_hz: f64) -> Result<Vec<usize>, SignalError> {
    if script.is_empty() {
        return Err(SignalError::EmptyScript);
    }
    script
        .iter()
        .enumerate()
        .map(|(index, &(_, value))| {
            if !(value.is_finite() && value > 0.0) {
                return Err(SignalError::InvalidDuration { index, value });
            }
            let frames = libm::round(value * rate_hz) as usize;
            if frames == 0 {
                return Err(SignalError::DurationTooShort { index, value });
            }
            Ok(frames)
        })
        .collect()
}

fn annotations_for<L: Copy>(
    script: &[(L, f64)],
    counts: &[usize],
    rate_hz: f64,
) -> Vec<Annotation<L>> {
    let mut start = 0usize;
    script
        .iter()
        .zip(counts)
        .map(|(&(label, _), &n)| {
            let a = Annotation {
                start: start as f64 / rate_hz,
                end: (start + n) as f64 / rate_hz,
                label,
            };
            start += n;
            a
        })
        .collect()
}

/// Synthesizes an EMG trace following `script`.
pub fn gen_emg_trace(
    profile: &SignalProfile,
    script: &[(Intent, f64)],
) -> Result<EmgTrace, SignalError> {
    profile.validate()?;
    let counts = frame_counts(script, profile.rate_hz)?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let total: usize = counts.iter().sum();
    let mut samples = Vec::with_capacity(total);
    let mut k = 0usize;
    for (&(intent, _), &n) in script.iter().zip(&counts) {
        let stats = profile.stats(intent);
        for _ in 0..n {
            let t = k as f64 / profile.rate_hz;
            let fatigue = (1.0 - profile.drift_rate * t).max(0.0);
            let mut channels = [0.0; EMG_CHANNELS];
            for (ch, out) in channels.iter_mut().enumerate() {
                *out = stats.mean[ch] * fatigue;
            }
            let avg = channels.iter().sum::<f64>() / EMG_CHANNELS as f64;
            for (ch, out) in channels.iter_mut().enumerate() {
                let leaked = (1.0 - profile.crosstalk) * *out + profile.crosstalk * avg;
                let noise = libm::sqrt(stats.variance[ch]) * unit.sample(&mut rng);
                *out = (leaked + noise).max(0.0);
            }
            samples.push(EmgFrame { t, channels });
            k += 1;
        }
    }
    Ok(SignalTrace {
        rate_hz: profile.rate_hz,
        annotations: annotations_for(script, &counts, profile.rate_hz),
        samples,
    })
}

/// Harness tension model: nominal level per posture, linear ramps between
/// postures, optional sinusoidal dither and Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub rest_n: f64,
    pub elevated_n: f64,
    pub depressed_n: f64,
    /// Time to move between posture levels.
    pub ramp_s: f64,
    pub noise_sd: f64,
    pub dither_amplitude: f64,
    pub dither_hz: f64,
    pub rate_hz: f64,
    pub seed: u64,
}

impl Default for LoadProfile {
    fn default() -> Self {
        LoadProfile {
            rest_n: 20.0,
            elevated_n: 40.0,
            depressed_n: 8.0,
            ramp_s: 0.25,
            noise_sd: 0.0,
            dither_amplitude: 0.0,
            dither_hz: 2.0,
            rate_hz: DEFAULT_LOAD_RATE_HZ,
            seed: 0,
        }
    }
}

impl LoadProfile {
    pub fn level(&self, posture: Posture) -> f64 {
        match posture {
            Posture::Rest => self.rest_n,
            Posture::Elevated => self.elevated_n,
            Posture::Depressed => self.depressed_n,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err(SignalError::InvalidProfile("rate_hz must be positive"));
        }
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if ![self.rest_n, self.elevated_n, self.depressed_n]
            .into_iter()
            .all(finite_nonneg)
        {
            return Err(SignalError::InvalidProfile(
                "posture tensions must be finite and >= 0",
            ));
        }
        if ![
            self.ramp_s,
            self.noise_sd,
            self.dither_amplitude,
            self.dither_hz,
        ]
        .into_iter()
        .all(finite_nonneg)
        {
            return Err(SignalError::InvalidProfile(
                "ramp, noise and dither must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// Synthesizes a load-cell trace following a posture script.
pub fn gen_load_trace(
    profile: &LoadProfile,
    script: &[(Posture, f64)],
) -> Result<LoadTrace, SignalError> {
    profile.validate()?;
    let counts = frame_counts(script, profile.rate_hz)?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut samples = Vec::with_capacity(counts.iter().sum());
    let mut k = 0usize;
    let mut prev_level = profile.level(script[0].0);
    for (&(posture, _), &n) in script.iter().zip(&counts) {
        let target = profile.level(posture);
        let from = prev_level;
        for i in 0..n {
            let t = k as f64 / profile.rate_hz;
            let local = i as f64 / profile.rate_hz;
            let base = if profile.ramp_s > 0.0 && local < profile.ramp_s {
                from + (target - from) * (local / profile.ramp_s)
            } else {
                target
            };
            let dither = profile.dither_amplitude * libm::sin(2.0 * PI * profile.dither_hz * t);
            let noise = if profile.noise_sd > 0.0 {
                profile.noise_sd * unit.sample(&mut rng)
            } else {
                0.0
            };
            samples.push(LoadCellSample {
                t,
                tension: (base + dither + noise).max(0.0),
            });
            k += 1;
        }
        prev_level = target;
    }
    Ok(SignalTrace {
        rate_hz: profile.rate_hz,
        annotations: annotations_for(script, &counts, profile.rate_hz),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_profile() -> SignalProfile {
        let mut p = SignalProfile::separable(7);
        for c in &mut p.classes {
            c.variance = [0.0; EMG_CHANNELS];
        }
        p
    }

    #[test]
    fn noise_free_relax_frames_equal_class_mean() {
        let p = quiet_profile();
        let trace = gen_emg_trace(&p, &[(Intent::Relax, 1.0)]).unwrap();
        assert_eq!(trace.len(), 50);
        for f in &trace.samples {
            assert_eq!(f.channels, p.stats(Intent::Relax).mean);
        }
    }

    #[test]
    fn emg_generation_is_deterministic() {
        let p = SignalProfile::separable(42).with_distortion(0.05, 0.3);
        let script = [
            (Intent::Open, 1.5),
            (Intent::Relax, 0.5),
            (Intent::Close, 2.0),
        ];
        let a = gen_emg_trace(&p, &script).unwrap();
        let b = gen_emg_trace(&p, &script).unwrap();
        assert_eq!(a, b);
        let c = gen_emg_trace(&p.with_seed(43), &script).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn annotations_follow_script() {
        let p = SignalProfile::separable(1);
        let script = [
            (Intent::Open, 2.0),
            (Intent::Relax, 2.0),
            (Intent::Close, 2.0),
        ];
        let trace = gen_emg_trace(&p, &script).unwrap();
        assert_eq!(trace.len(), 300);
        assert_eq!(trace.annotations.len(), 3);
        for (a, (label, dur)) in trace.annotations.iter().zip(script) {
            assert_eq!(a.label, label);
            assert!((a.end - a.start - dur).abs() < 1e-12);
        }
        trace.validate_emg().unwrap();
        for f in &trace.samples {
            let hits = trace.annotations.iter().filter(|a| a.contains(f.t)).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn rejects_bad_scripts() {
        let p = SignalProfile::separable(1);
        assert_eq!(gen_emg_trace(&p, &[]), Err(SignalError::EmptyScript));
        assert!(matches!(
            gen_emg_trace(&p, &[(Intent::Open, 0.0)]),
            Err(SignalError::InvalidDuration { index: 0, .. })
        ));
        assert!(matches!(
            gen_load_trace(
                &LoadProfile::default(),
                &[(Posture::Rest, 1.0), (Posture::Elevated, -1.0)]
            ),
            Err(SignalError::InvalidDuration { index: 1, .. })
        ));
        assert!(matches!(
            gen_emg_trace(&p, &[(Intent::Open, 0.001)]),
            Err(SignalError::DurationTooShort { .. })
        ));
        let bad = p.with_distortion(0.0, 1.5);
        assert!(matches!(
            gen_emg_trace(&bad, &[(Intent::Open, 1.0)]),
            Err(SignalError::InvalidProfile(_))
        ));
    }

    #[test]
    fn full_crosstalk_flattens_channels() {
        let mut p = quiet_profile();
        p.crosstalk = 1.0;
        let trace = gen_emg_trace(&p, &[(Intent::Open, 0.2)]).unwrap();
        let f = trace.samples[0].channels;
        assert!(f.iter().all(|v| (v - f[0]).abs() < 1e-12));
    }

    #[test]
    fn constant_rest_tension_without_noise() {
        let trace = gen_load_trace(&LoadProfile::default(), &[(Posture::Rest, 2.0)]).unwrap();
        assert_eq!(trace.len(), 100);
        assert!(trace.samples.iter().all(|s| s.tension == 20.0));
    }

    #[test]
    fn posture_script_gives_one_peak_then_trough() {
        let script = [
            (Posture::Rest, 1.0),
            (Posture::Elevated, 1.0),
            (Posture::Rest, 1.0),
            (Posture::Depressed, 1.0),
        ];
        let trace = gen_load_trace(&LoadProfile::default(), &script).unwrap();
        let tension: Vec<f64> = trace.samples.iter().map(|s| s.tension).collect();
        let mut signs: Vec<i8> = tension
            .windows(2)
            .filter_map(|w| {
                let d = w[1] - w[0];
                (d != 0.0).then(|| if d > 0.0 { 1 } else { -1 })
            })
            .collect();
        signs.dedup();
        assert_eq!(signs, [1, -1]);
        let hi = tension.iter().cloned().fold(f64::MIN, f64::max);
        let lo = tension.iter().cloned().fold(f64::MAX, f64::min);
        let argmax = tension.iter().position(|&v| v == hi).unwrap();
        let argmin = tension.iter().position(|&v| v == lo).unwrap();
        assert_eq!(
            trace.label_at(trace.samples[argmax].t),
            Some(Posture::Elevated)
        );
        assert_eq!(
            trace.label_at(trace.samples[argmin].t),
            Some(Posture::Depressed)
        );
        assert_eq!((hi, lo), (40.0, 8.0));
    }

    #[test]
    fn posture_names_round_trip() {
        for p in Posture::ALL {
            assert_eq!(Posture::parse(p.as_str()), Some(p));
        }
        assert_eq!(Posture::parse("SHRUG"), None);
    }
}
