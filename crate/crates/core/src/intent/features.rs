use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Intent, IntentError};
use crate::signals::{EmgFrame, EmgTrace, EMG_CHANNELS};

/// Per-channel mean absolute value over one analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; EMG_CHANNELS]);

impl FeatureVector {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Sliding analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub window_s: f64,
    pub hop_s: f64,
}

impl Default for FeatureWindow {
    fn default() -> Self {
        FeatureWindow {
            window_s: 0.150,
            hop_s: 0.020,
        }
    }
}

impl FeatureWindow {
    pub fn window_frames(&self, rate_hz: f64) -> usize {
        (libm::round(self.window_s * rate_hz) as usize).max(1)
    }

    pub fn hop_frames(&self, rate_hz: f64) -> usize {
        (libm::round(self.hop_s * rate_hz) as usize).max(1)
    }

    /// Rate at which windows (and hence decisions) are produced.
    pub fn decision_rate(&self, rate_hz: f64) -> f64 {
        rate_hz / self.hop_frames(rate_hz) as f64
    }
}

pub fn extract_features(window: &[EmgFrame]) -> Result<FeatureVector, IntentError> {
    if window.is_empty() {
        return Err(IntentError::EmptyWindow);
    }
    let mut acc = [0.0; EMG_CHANNELS];
    for frame in window {
        for (a, v) in acc.iter_mut().zip(frame.channels) {
            *a += v.abs();
        }
    }
    let n = window.len() as f64;
    let features = FeatureVector(acc.map(|a| a / n));
    if !features.is_finite() {
        return Err(IntentError::NonFinite);
    }
    Ok(features)
}

/// Features for every full window, stamped with the time of the window's
/// last frame.
pub fn feature_stream(
    trace: &EmgTrace,
    window: &FeatureWindow,
) -> Result<Vec<(f64, FeatureVector)>, IntentError> {
    let w = window.window_frames(trace.rate_hz);
    let hop = window.hop_frames(trace.rate_hz);
    if trace.samples.len() < w {
        return Ok(Vec::new());
    }
    (w - 1..trace.samples.len())
        .step_by(hop)
        .map(|end| {
            let frames = &trace.samples[end + 1 - w..=end];
            extract_features(frames).map(|f| (trace.samples[end].t, f))
        })
        .collect()
}

/// Training pairs from windows that lie entirely inside one annotation.
pub fn labeled_features(
    trace: &EmgTrace,
    window: &FeatureWindow,
) -> Result<Vec<(FeatureVector, Intent)>, IntentError> {
    let w = window.window_frames(trace.rate_hz);
    let hop = window.hop_frames(trace.rate_hz);
    let mut out = Vec::new();
    if trace.samples.len() < w {
        return Ok(out);
    }
    for end in (w - 1..trace.samples.len()).step_by(hop) {
        let first = trace.samples[end + 1 - w].t;
        let last = trace.samples[end].t;
        let Some(ann) = trace.annotations.iter().find(|a| a.contains(last)) else {
            continue;
        };
        if ann.contains(first) {
            out.push((
                extract_features(&trace.samples[end + 1 - w..=end])?,
                ann.label,
            ));
        }
    }
    Ok(out)
}
