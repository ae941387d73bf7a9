//! Three-class linear discriminant over mean-absolute-value features.

use serde::{Deserialize, Serialize};

use super::{FeatureVector, FeatureWindow, Intent, IntentError, DEFAULT_VOTE_FRAMES};
use crate::signals::EMG_CHANNELS;

const D: usize = EMG_CHANNELS;

/// Ridge added to the pooled covariance diagonal, as a fraction of the
/// mean channel variance.
pub const RIDGE_FRACTION: f64 = 1e-3;

// Keeps zero-spread training sets invertible.
const RIDGE_FLOOR: f64 = 1e-9;

/// Persistable classifier parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    /// Indexed by [`Intent::index`].
    pub means: [[f64; D]; 3],
    /// Regularized pooled covariance.
    pub covariance: [[f64; D]; D],
    pub priors: [f64; 3],
    pub window: FeatureWindow,
    pub vote_frames: usize,
}

/// Trained discriminant with precomputed linear scoring terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgClassifier {
    params: ClassifierParams,
    weights: [[f64; D]; 3],
    offsets: [f64; 3],
}

impl EmgClassifier {
    pub fn from_params(params: ClassifierParams) -> Result<Self, IntentError> {
        let finite = params.means.iter().flatten().all(|v| v.is_finite())
            && params.covariance.iter().flatten().all(|v| v.is_finite())
            && params.priors.iter().all(|p| p.is_finite() && *p > 0.0);
        if !finite || params.vote_frames == 0 {
            return Err(IntentError::NonFinite);
        }
        for i in 0..D {
            for j in 0..i {
                if (params.covariance[i][j] - params.covariance[j][i]).abs()
                    > 1e-12 * (1.0 + params.covariance[i][j].abs())
                {
                    return Err(IntentError::NotPositiveDefinite);
                }
            }
        }
        let chol = cholesky(&params.covariance).ok_or(IntentError::NotPositiveDefinite)?;
        let mut weights = [[0.0; D]; 3];
        let mut offsets = [0.0; 3];
        for k in 0..3 {
            weights[k] = chol_solve(&chol, &params.means[k]);
            offsets[k] = -0.5 * dot(&params.means[k], &weights[k]) + libm::log(params.priors[k]);
        }
        Ok(EmgClassifier {
            params,
            weights,
            offsets,
        })
    }

    pub fn params(&self) -> &ClassifierParams {
        &self.params
    }

    pub fn window(&self) -> &FeatureWindow {
        &self.params.window
    }

    pub fn vote_frames(&self) -> usize {
        self.params.vote_frames
    }

    /// Linear discriminant score per class, indexed by [`Intent::index`].
    pub fn scores(&self, f: &FeatureVector) -> [f64; 3] {
        core::array::from_fn(|k| dot(&f.0, &self.weights[k]) + self.offsets[k])
    }

    /// Highest-scoring class; any tie at the top resolves to RELAX.
    pub fn classify(&self, f: &FeatureVector) -> Result<Intent, IntentError> {
        if !f.is_finite() {
            return Err(IntentError::NonFinite);
        }
        Ok(argmax_relax_ties(&self.scores(f)))
    }
}

/// Argmax over class scores with ties at the top mapped to RELAX.
pub(crate) fn argmax_relax_ties(scores: &[f64; 3]) -> Intent {
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    let mut top = Intent::ALL
        .into_iter()
        .filter(|i| scores[i.index()] >= best - tol);
    match (top.next(), top.next()) {
        (Some(only), None) => only,
        _ => Intent::Relax,
    }
}

pub fn train_classifier(labeled: &[(FeatureVector, Intent)]) -> Result<EmgClassifier, IntentError> {
    train_with(labeled, FeatureWindow::default(), DEFAULT_VOTE_FRAMES)
}

impl EmgClassifier {
    pub fn train(
        labeled: &[(FeatureVector, Intent)],
        window: FeatureWindow,
        vote_frames: usize,
    ) -> Result<Self, IntentError> {
        train_with(labeled, window, vote_frames)
    }
}

fn train_with(
    labeled: &[(FeatureVector, Intent)],
    window: FeatureWindow,
    vote_frames: usize,
) -> Result<EmgClassifier, IntentError> {
    if labeled.iter().any(|(f, _)| !f.is_finite()) {
        return Err(IntentError::NonFinite);
    }
    let mut counts = [0usize; 3];
    let mut means = [[0.0; D]; 3];
    for (f, label) in labeled {
        let k = label.index();
        counts[k] += 1;
        for (m, v) in means[k].iter_mut().zip(f.0) {
            *m += v;
        }
    }
    for intent in Intent::ALL {
        let k = intent.index();
        if counts[k] == 0 {
            return Err(IntentError::InsufficientTrainingData(intent));
        }
        for m in &mut means[k] {
            *m /= counts[k] as f64;
        }
    }

    // Every pair of class means must differ.
    for a in 0..3 {
        for b in a + 1..3 {
            let gap: f64 = (0..D).map(|i| (means[a][i] - means[b][i]).abs()).sum();
            let scale: f64 = (0..D).map(|i| means[a][i].abs() + means[b][i].abs()).sum();
            if gap <= 1e-12 * (1.0 + scale) {
                return Err(IntentError::NonSeparable);
            }
        }
    }

    let mut cov = [[0.0; D]; D];
    for (f, label) in labeled {
        let mu = &means[label.index()];
        for i in 0..D {
            let di = f.0[i] - mu[i];
            for j in 0..=i {
                cov[i][j] += di * (f.0[j] - mu[j]);
            }
        }
    }
    let dof = labeled.len().saturating_sub(3).max(1) as f64;
    for i in 0..D {
        for j in 0..=i {
            cov[i][j] /= dof;
            cov[j][i] = cov[i][j];
        }
    }
    let trace: f64 = (0..D).map(|i| cov[i][i]).sum();
    let ridge = (RIDGE_FRACTION * trace / D as f64).max(RIDGE_FLOOR);
    for (i, row) in cov.iter_mut().enumerate() {
        row[i] += ridge;
    }

    let n = labeled.len() as f64;
    let priors = counts.map(|c| c as f64 / n);
    EmgClassifier::from_params(ClassifierParams {
        means,
        covariance: cov,
        priors,
        window,
        vote_frames,
    })
}

fn dot(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cholesky(a: &[[f64; D]; D]) -> Option<[[f64; D]; D]> {
    let mut l = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = libm::sqrt(d);
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[[f64; D]; D], b: &[f64; D]) -> [f64; D] {
    let mut y = [0.0; D];
    for i in 0..D {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = [0.0; D];
    for i in (0..D).rev() {
        let s: f64 = (i + 1..D).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn centroid(k: usize) -> FeatureVector {
        let mut v = [0.1; D];
        v[k] = 0.9;
        FeatureVector(v)
    }

    #[test]
    fn zero_spread_clouds_classify_their_centroids() {
        let data: Vec<_> = Intent::ALL
            .into_iter()
            .flat_map(|i| core::iter::repeat((centroid(i.index()), i)).take(4))
            .collect();
        let c = train_classifier(&data).unwrap();
        for i in Intent::ALL {
            assert_eq!(c.classify(&centroid(i.index())).unwrap(), i);
            assert_eq!(c.params().means[i.index()], centroid(i.index()).0);
        }
    }

    #[test]
    fn missing_class_is_rejected() {
        let data = [(centroid(0), Intent::Open), (centroid(2), Intent::Close)];
        assert_eq!(
            train_classifier(&data).unwrap_err(),
            IntentError::InsufficientTrainingData(Intent::Relax)
        );
    }

    #[test]
    fn identical_features_are_non_separable() {
        let f = FeatureVector([0.3; D]);
        let data: Vec<_> = Intent::ALL.into_iter().map(|i| (f, i)).collect();
        assert_eq!(
            train_classifier(&data).unwrap_err(),
            IntentError::NonSeparable
        );
    }

    #[test]
    fn equidistant_point_resolves_to_relax() {
        // Symmetric clouds around three axis centroids give an isotropic
        // pooled covariance in the first three channels.
        let mut data = Vec::new();
        for i in Intent::ALL {
            let k = i.index();
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut v = [0.0; D];
                    v[k] = 1.0;
                    v[axis] += sign * 0.05;
                    data.push((FeatureVector(v), i));
                }
            }
        }
        let c = train_classifier(&data).unwrap();
        let mut q = [0.0; D];
        q[0] = 1.0 / 3.0;
        q[1] = 1.0 / 3.0;
        q[2] = 1.0 / 3.0;
        assert_eq!(c.classify(&FeatureVector(q)).unwrap(), Intent::Relax);
    }

    #[test]
    fn non_finite_features_rejected() {
        let data: Vec<_> = Intent::ALL
            .into_iter()
            .map(|i| (centroid(i.index()), i))
            .collect();
        let c = train_classifier(&data).unwrap();
        let mut v = [0.0; D];
        v[3] = f64::NAN;
        assert_eq!(c.classify(&FeatureVector(v)), Err(IntentError::NonFinite));
    }

    #[test]
    fn params_round_trip_rebuilds_identical_classifier() {
        let data: Vec<_> = Intent::ALL
            .into_iter()
            .map(|i| (centroid(i.index()), i))
            .collect();
        let c = train_classifier(&data).unwrap();
        let again = EmgClassifier::from_params(c.params().clone()).unwrap();
        assert_eq!(c, again);
        let mut broken = c.params().clone();
        broken.covariance[0][0] = -1.0;
        assert_eq!(
            EmgClassifier::from_params(broken),
            Err(IntentError::NotPositiveDefinite)
        );
    }

    #[test]
    fn tie_rule() {
        assert_eq!(argmax_relax_ties(&[1.0, 0.0, 1.0]), Intent::Relax);
        assert_eq!(argmax_relax_ties(&[1.0, 1.0, 0.0]), Intent::Relax);
        assert_eq!(argmax_relax_ties(&[2.0, 1.0, 0.0]), Intent::Open);
        assert_eq!(argmax_relax_ties(&[-3.0, -2.0, -1.0]), Intent::Close);
    }
}
