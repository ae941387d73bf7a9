//! Normality, homogeneity and paired-t tests.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::math::{f_sf, normal_quantile, normal_sf, student_t_two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levene {
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_diff: f64,
}

fn check_finite(x: &[f64]) -> Result<(), StatsError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

// c[0] + c[1]·x + c[2]·x² + ...
fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Shapiro-Wilk W test with Royston's coefficient and p-value
/// approximations (exact p for n = 3).
pub fn shapiro_wilk(x: &[f64]) -> Result<ShapiroWilk, StatsError> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: n });
    }
    if n > 5000 {
        return Err(StatsError::TooManySamples { max: 5000, got: n });
    }
    check_finite(x)?;
    let mut sorted = Vec::from(x);
    sorted.sort_by(f64::total_cmp);
    let range = sorted[n - 1] - sorted[0];
    if range < 1e-19 {
        return Err(StatsError::ZeroVariance);
    }

    let nn2 = n / 2;
    let an = n as f64;
    // a[i] for i in 0..nn2 weights x_(n-i) - x_(i+1).
    let mut a = alloc::vec![0.0; nn2];
    if n == 3 {
        a[0] = libm::sqrt(0.5);
    } else {
        let m: Vec<f64> = (1..=nn2)
            .map(|i| normal_quantile((i as f64 - 0.375) / (an + 0.25)))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = libm::sqrt(summ2);
        let rsn = 1.0 / libm::sqrt(an);
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = libm::sqrt(
                (summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                    / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2),
            );
            a[1] = a2;
            (2, fac)
        } else {
            (
                1,
                libm::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)),
            )
        };
        a[0] = a1;
        for i in first..nn2 {
            a[i] = -m[i] / fac;
        }
    }

    let scaled: Vec<f64> = sorted.iter().map(|v| v / range).collect();
    let mean = scaled.iter().sum::<f64>() / an;
    let ssq: f64 = scaled.iter().map(|v| (v - mean) * (v - mean)).sum();
    let num: f64 = (0..nn2)
        .map(|i| a[i] * (scaled[n - 1 - i] - scaled[i]))
        .sum();
    let w = (num * num / ssq).min(1.0);

    if n == 3 {
        const SIX_OVER_PI: f64 = 1.909_859_317_102_744;
        const PI_OVER_THREE: f64 = 1.047_197_551_196_597_6;
        let p = (SIX_OVER_PI * (libm::asin(libm::sqrt(w)) - PI_OVER_THREE)).max(0.0);
        return Ok(ShapiroWilk { w, p: p.min(1.0) });
    }

    let w1 = libm::log(1.0 - w);
    let (y, m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if w1 >= gamma {
            return Ok(ShapiroWilk { w, p: 1e-99 });
        }
        (
            -libm::log(gamma - w1),
            poly(&C3, an),
            libm::exp(poly(&C4, an)),
        )
    } else {
        let xx = libm::log(an);
        (w1, poly(&C5, xx), libm::exp(poly(&C6, xx)))
    };
    Ok(ShapiroWilk {
        w,
        p: normal_sf((y - m) / s),
    })
}

/// Classic (mean-centred) Levene test for equal variances.
pub fn levene(groups: &[&[f64]]) -> Result<Levene, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    for g in groups {
        if g.len() < 2 {
            return Err(StatsError::TooFewSamples {
                needed: 2,
                got: g.len(),
            });
        }
        check_finite(g)?;
    }
    let k = groups.len() as f64;
    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(|v| (v - m).abs()).collect()
        })
        .collect();
    let n_total: usize = z.iter().map(Vec::len).sum();
    let zbar_i: Vec<f64> = z
        .iter()
        .map(|zi| zi.iter().sum::<f64>() / zi.len() as f64)
        .collect();
    let zbar = z.iter().flatten().sum::<f64>() / n_total as f64;
    let between: f64 = z
        .iter()
        .zip(&zbar_i)
        .map(|(zi, m)| zi.len() as f64 * (m - zbar) * (m - zbar))
        .sum();
    let within: f64 = z
        .iter()
        .zip(&zbar_i)
        .map(|(zi, m)| zi.iter().map(|v| (v - m) * (v - m)).sum::<f64>())
        .sum();
    let df1 = k - 1.0;
    let df2 = n_total as f64 - k;
    let (statistic, p) = if within == 0.0 {
        if between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (df2 / df1) * between / within;
        (f, f_sf(f, df1, df2))
    };
    Ok(Levene {
        statistic,
        df1,
        df2,
        p,
    })
}

/// Two-sided paired t-test on `y - x`.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<PairedT, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    paired_t_diffs(&d)
}

/// Two-sided one-sample t-test of the mean of `d` against zero.
pub fn paired_t_diffs(d: &[f64]) -> Result<PairedT, StatsError> {
    let n = d.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    check_finite(d)?;
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(StatsError::DegeneratePairs);
    }
    let df = (n - 1) as f64;
    let t = mean / libm::sqrt(var / n as f64);
    Ok(PairedT {
        t,
        df,
        p: student_t_two_sided(t, df),
        mean_diff: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    // scipy.stats.shapiro reference values
    const SW_REFERENCE: &[(&[f64], f64, f64)] = &[
        (
            &[
                148., 154., 158., 160., 161., 162., 166., 170., 182., 195., 236.,
            ],
            0.7888146948631716,
            0.006703814061898823,
        ),
        (&[1., 2., 4.], 0.9642857142857142, 0.6368868450289689),
        (
            &[2.1, 3.3, 3.9, 7.0],
            0.9186506889203379,
            0.5294097405899674,
        ),
        (
            &[0., 1., 1., 2., 9.],
            0.7279537557969185,
            0.018361475406944768,
        ),
        (
            &[3., 1., 4., 1., 5., 9., 2.],
            0.8798178822381644,
            0.22564099563502105,
        ),
        (
            &[
                0.5, -1.2, 0.3, 2.2, -0.7, 1.1, 0.0, -0.4, 0.9, 1.8, -2.0, 0.6, 0.2, -0.1, 1.4,
                -0.9, 0.8, -1.5, 0.35, 0.05,
            ],
            0.9898527638070316,
            0.997976750898982,
        ),
        (
            &[1., 2., 2., 3., 3., 3., 4., 4., 5., 6., 8., 12.],
            0.8578105124094929,
            0.04589963276747805,
        ),
    ];

    #[test]
    fn shapiro_matches_reference_implementation() {
        for (x, w, p) in SW_REFERENCE {
            let r = shapiro_wilk(x).unwrap();
            assert!((r.w - w).abs() < 1e-6, "W {} vs {}", r.w, w);
            assert!((r.p - p).abs() < 1e-6, "p {} vs {}", r.p, p);
        }
    }

    #[test]
    fn shapiro_rejects_small_or_constant_samples() {
        assert_eq!(
            shapiro_wilk(&[1.0, 2.0]),
            Err(StatsError::TooFewSamples { needed: 3, got: 2 })
        );
        assert_eq!(shapiro_wilk(&[4.0; 6]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn shapiro_on_normal_scores_is_near_one() {
        let n = 30;
        let x: Vec<f64> = (1..=n)
            .map(|i| normal_quantile((i as f64 - 0.375) / (n as f64 + 0.25)))
            .collect();
        let r = shapiro_wilk(&x).unwrap();
        assert!(r.w > 0.99 && r.w <= 1.0, "W = {}", r.w);
        assert!(r.p > 0.9);
    }

    #[test]
    fn shapiro_is_location_scale_invariant() {
        let x = [3., 1., 4., 1., 5., 9., 2., 6.];
        let y: Vec<f64> = x.iter().map(|v| 7.5 * v - 40.0).collect();
        let (a, b) = (shapiro_wilk(&x).unwrap(), shapiro_wilk(&y).unwrap());
        assert!((a.w - b.w).abs() < 1e-12 && (a.p - b.p).abs() < 1e-12);
    }

    #[test]
    fn levene_reference_values() {
        // scipy.stats.levene(center='mean')
        let r = levene(&[&[1., 2., 3., 4.], &[2., 4., 6., 9.]]).unwrap();
        assert!((r.statistic - 2.5).abs() < 1e-12);
        assert!((r.p - 0.16493033106140143).abs() < 1e-10);
        let r = levene(&[
            &[1., 2., 3., 4., 5.],
            &[1., 3., 3., 7., 9.],
            &[2., 2., 2., 3., 8.],
        ])
        .unwrap();
        assert!((r.statistic - 1.8124481327800825).abs() < 1e-12);
        assert!((r.p - 0.2052034319650178).abs() < 1e-10);
        assert_eq!((r.df1, r.df2), (2.0, 12.0));
    }

    #[test]
    fn levene_identical_groups_and_errors() {
        let g = [1.0, 5.0, 2.0, 8.0];
        let r = levene(&[&g, &g]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
        assert_eq!(levene(&[&g]), Err(StatsError::TooFewGroups(1)));
        assert!(levene(&[&g, &[1.0]]).is_err());
    }

    #[test]
    fn levene_detects_hundredfold_variance_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (narrow, wide) = (
            Normal::new(0.0, 1.0).unwrap(),
            Normal::new(0.0, 10.0).unwrap(),
        );
        // Monte-Carlo estimate of the 1% critical value under equal variances.
        let mut null_stats: Vec<f64> = (0..2000)
            .map(|_| {
                let a: Vec<f64> = (0..20).map(|_| narrow.sample(&mut rng)).collect();
                let b: Vec<f64> = (0..20).map(|_| narrow.sample(&mut rng)).collect();
                levene(&[&a, &b]).unwrap().statistic
            })
            .collect();
        null_stats.sort_by(f64::total_cmp);
        let crit = null_stats[(0.99 * null_stats.len() as f64) as usize];
        let mut rejected = 0;
        for _ in 0..50 {
            let a: Vec<f64> = (0..20).map(|_| narrow.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..20).map(|_| wide.sample(&mut rng)).collect();
            let r = levene(&[&a, &b]).unwrap();
            assert_eq!(r.p < 0.01, r.statistic > crit || (r.p - 0.01).abs() < 2e-3);
            rejected += usize::from(r.p < 0.01);
        }
        assert!(rejected >= 48, "rejected {rejected}/50");
    }

    // Two-sided t tail by Simpson integration of the density.
    fn t_two_sided_oracle(t: f64, df: f64) -> f64 {
        let c = libm::exp(
            libm::lgamma((df + 1.0) / 2.0)
                - libm::lgamma(df / 2.0)
                - 0.5 * libm::log(df * core::f64::consts::PI),
        );
        let pdf = |x: f64| c * libm::pow(1.0 + x * x / df, -(df + 1.0) / 2.0);
        let steps = 200_000;
        let h = t.abs() / steps as f64;
        let mut s = pdf(0.0) + pdf(t.abs());
        for i in 1..steps {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(i as f64 * h);
        }
        1.0 - 2.0 * s * h / 3.0
    }

    #[test]
    fn paired_t_small_example() {
        let r = paired_t(&[0., 0., 0.], &[1., 2., 3.]).unwrap();
        let hand_t = 2.0 / (1.0f64 / 3.0f64.sqrt());
        assert!((r.t - hand_t).abs() < 1e-12);
        assert!((r.t - 3.464).abs() < 1e-3);
        assert_eq!(r.df, 2.0);
        assert!((r.p - t_two_sided_oracle(r.t, 2.0)).abs() < 1e-9);
        assert!((r.p - 0.0742).abs() < 1e-3);
    }

    #[test]
    fn paired_t_symmetry_and_degenerate() {
        let a = paired_t_diffs(&[1., 2., 3.]).unwrap();
        let b = paired_t_diffs(&[-1., -2., -3.]).unwrap();
        assert_eq!(a.t, -b.t);
        assert_eq!(a.p, b.p);
        assert_eq!(
            paired_t(&[1., 2.], &[1., 2.]),
            Err(StatsError::DegeneratePairs)
        );
        assert_eq!(
            paired_t(&[1., 2.], &[3., 4.]),
            Err(StatsError::DegeneratePairs)
        );
        assert!(paired_t(&[1.], &[1., 2.]).is_err());
    }

    #[test]
    fn paired_t_matches_oracle_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(3..15);
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(-5..8) as f64).collect();
            if let Ok(r) = paired_t_diffs(&d) {
                assert!((r.p - t_two_sided_oracle(r.t, r.df)).abs() < 1e-8);
            }
        }
    }
}
