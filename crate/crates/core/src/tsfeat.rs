//! Time-series features of short turbidity windows.
//!
//! These are the meta-model's inputs: trend/spike/linearity/curvature from a
//! local-polynomial decomposition, spectral entropy of the smoothed
//! periodogram, and acf summaries of the raw, first- and second-differenced
//! window. Daily data carries no sub-annual seasonality at this window
//! length, so the decomposition has no seasonal component and the constant
//! frequency/period features are dropped.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Smoother span as a fraction of the window length.
const TREND_SPAN: f64 = 0.75;

/// Named features of one turbidity window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trend_strength: f64,
    pub spike: f64,
    pub linearity: f64,
    pub curvature: f64,
    pub entropy: f64,
    pub x_acf1: f64,
    pub x_acf10: f64,
    pub diff1_acf1: f64,
    pub diff1_acf10: f64,
    pub diff2_acf1: f64,
    pub diff2_acf10: f64,
    /// Last date covered by the window (the forecast target is the next day).
    pub window_end: NaiveDate,
    /// True when any component was substituted with 0 because the window (or
    /// a differenced version of it) was degenerate.
    pub degenerate: bool,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 11] = [
        "trend_strength",
        "spike",
        "linearity",
        "curvature",
        "entropy",
        "x_acf1",
        "x_acf10",
        "diff1_acf1",
        "diff1_acf10",
        "diff2_acf1",
        "diff2_acf10",
    ];

    /// Numeric values in the order of [`FeatureVector::NAMES`].
    pub fn values(&self) -> [f64; 11] {
        [
            self.trend_strength,
            self.spike,
            self.linearity,
            self.curvature,
            self.entropy,
            self.x_acf1,
            self.x_acf10,
            self.diff1_acf1,
            self.diff1_acf10,
            self.diff2_acf1,
            self.diff2_acf10,
        ]
    }
}

/// Local quadratic smoother (tricube weights, span 0.75) of the series
/// against its time index. Returns (trend, remainder).
#[allow(clippy::needless_range_loop)]
pub fn decompose_trend(window: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = window.len();
    if m < 10 {
        return Err(Error::WindowTooShort { needed: 10, got: m });
    }
    let k = ((TREND_SPAN * m as f64).ceil() as usize).clamp(4, m);

    let mut trend = Vec::with_capacity(m);
    for i in 0..m {
        // Contiguous k-point neighborhood nearest to i, clamped at the edges.
        let lo = (i.saturating_sub((k - 1) / 2)).min(m - k);
        let hi = lo + k;
        let d_max = (i - lo).max(hi - 1 - i) as f64;

        // Weighted quadratic fit in local coordinates u = j - i.
        let mut xtx = DMatrix::<f64>::zeros(3, 3);
        let mut xty = DVector::<f64>::zeros(3);
        for j in lo..hi {
            let u = j as f64 - i as f64;
            let d = u.abs() / d_max.max(1.0);
            let w = {
                let t = (1.0 - d * d * d).max(0.0);
                t * t * t
            };
            let row = [1.0, u, u * u];
            for a in 0..3 {
                for b in 0..3 {
                    xtx[(a, b)] += w * row[a] * row[b];
                }
                xty[a] += w * row[a] * window[j];
            }
        }
        let coef = xtx
            .full_piv_lu()
            .solve(&xty)
            .ok_or_else(|| Error::SingularDesign("degenerate smoother neighborhood".into()))?;
        trend.push(coef[0]);
    }

    let remainder = window.iter().zip(&trend).map(|(y, t)| y - t).collect();
    Ok((trend, remainder))
}

/// Decomposition-based features: trend strength, spikiness, and the
/// orthogonal linear/quadratic coefficients of the trend.
pub fn trend_features(trend: &[f64], remainder: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let m = trend.len();
    if m < 10 || remainder.len() != m {
        return Err(Error::WindowTooShort { needed: 10, got: m.min(remainder.len()) });
    }

    let detrended: Vec<f64> = trend.iter().zip(remainder).map(|(t, r)| t + r).collect();
    let var_total = stats::variance(&detrended);
    let trend_strength = if var_total <= 0.0 {
        0.0
    } else {
        (1.0 - stats::variance(remainder) / var_total).max(0.0)
    };

    let spike = leave_one_out_variance_of_variances(remainder);

    // Regress the trend on orthonormal linear and quadratic polynomials of
    // the time index; with orthonormal columns the coefficients are plain
    // inner products.
    let (p1, p2) = orthonormal_polys(m);
    let linearity: f64 = p1.iter().zip(trend).map(|(p, t)| p * t).sum();
    let curvature: f64 = p2.iter().zip(trend).map(|(p, t)| p * t).sum();

    Ok((trend_strength, spike, linearity, curvature))
}

fn leave_one_out_variance_of_variances(r: &[f64]) -> f64 {
    let n = r.len();
    if n < 3 {
        return 0.0;
    }
    let s1: f64 = r.iter().sum();
    let s2: f64 = r.iter().map(|v| v * v).sum();
    let loo: Vec<f64> = r
        .iter()
        .map(|&v| {
            let s1i = s1 - v;
            let s2i = s2 - v * v;
            let m = n - 1;
            (s2i - s1i * s1i / m as f64) / (m - 1) as f64
        })
        .collect();
    stats::sample_variance(&loo)
}

/// Orthonormal degree-1 and degree-2 polynomial columns over 0..m-1,
/// orthogonal to the constant.
fn orthonormal_polys(m: usize) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..m).map(|i| i as f64).collect();
    let mean_t = stats::mean(&t);
    let mut p1: Vec<f64> = t.iter().map(|v| v - mean_t).collect();
    let norm1 = p1.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut p1 {
        *v /= norm1;
    }
    let t2: Vec<f64> = t.iter().map(|v| v * v).collect();
    let mean_t2 = stats::mean(&t2);
    let proj: f64 = t2.iter().zip(&p1).map(|(a, b)| a * b).sum();
    let mut p2: Vec<f64> = t2
        .iter()
        .zip(&p1)
        .map(|(a, b)| a - mean_t2 - proj * b)
        .collect();
    let norm2 = p2.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut p2 {
        *v /= norm2;
    }
    (p1, p2)
}

/// Shannon entropy of the block-averaged periodogram, normalized to [0, 1].
///
/// The raw periodogram of white noise is exponentially distributed per bin,
/// which depresses its entropy well below 1 regardless of length; averaging
/// over √-sized blocks of adjacent Fourier frequencies estimates the
/// spectral density's flatness instead, scoring near 1 for noise and near 0
/// for a pure tone.
pub fn spectral_entropy(window: &[f64]) -> Result<f64> {
    let m = window.len();
    if m < 8 {
        return Err(Error::WindowTooShort { needed: 8, got: m });
    }
    let mu = stats::mean(window);
    if window.iter().all(|&v| (v - mu).abs() < 1e-300) {
        return Err(Error::ConstantWindow);
    }

    // Periodogram at non-zero Fourier frequencies k = 1..floor(m/2).
    let n_freq = m / 2;
    let mut pgram = Vec::with_capacity(n_freq);
    for k in 1..=n_freq {
        let (mut re, mut im) = (0.0_f64, 0.0_f64);
        let w = -2.0 * std::f64::consts::PI * k as f64 / m as f64;
        for (t, &v) in window.iter().enumerate() {
            let x = v - mu;
            let angle = w * t as f64;
            re += x * angle.cos();
            im += x * angle.sin();
        }
        pgram.push(re * re + im * im);
    }

    let block = ((n_freq as f64).sqrt().floor() as usize).max(1);
    let n_blocks = (n_freq / block).max(1);
    let mut agg = vec![0.0_f64; n_blocks];
    for (k, &p) in pgram.iter().enumerate() {
        agg[(k / block).min(n_blocks - 1)] += p;
    }

    let total: f64 = agg.iter().sum();
    if total <= 0.0 || n_blocks < 2 {
        return Err(Error::ConstantWindow);
    }
    let h: f64 = agg
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let q = p / total;
            -q * q.ln()
        })
        .sum();
    Ok((h / (n_blocks as f64).ln()).clamp(0.0, 1.0))
}

/// acf summaries of a window after `diff_order` rounds of differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfFeatures {
    /// Lag-1 autocorrelation.
    pub acf1: f64,
    /// Sum of squared autocorrelations at lags 1..=10.
    pub acf10: f64,
    /// The differenced window had zero variance; both values are 0.
    pub degenerate: bool,
}

pub fn acf_feature_set(window: &[f64], diff_order: u8) -> Result<AcfFeatures> {
    assert!(diff_order <= 2, "diff_order must be 0, 1, or 2");
    let mut x = window.to_vec();
    for _ in 0..diff_order {
        x = x.windows(2).map(|w| w[1] - w[0]).collect();
    }
    if x.len() < 12 {
        return Err(Error::WindowTooShort { needed: 12, got: x.len() });
    }
    let rho = stats::acf(&x, 10);
    if rho.is_empty() {
        return Ok(AcfFeatures {
            acf1: 0.0,
            acf10: 0.0,
            degenerate: true,
        });
    }
    Ok(AcfFeatures {
        acf1: rho[0],
        acf10: rho.iter().map(|r| r * r).sum(),
        degenerate: false,
    })
}

/// Extract the full feature vector for forecasting index `t` of `series`:
/// the window is `series[t - window_len .. t]`, i.e. the `window_len` days
/// immediately before the target day.
pub fn extract_feature_vector(
    series: &[f64],
    dates: &[NaiveDate],
    t: usize,
    window_len: usize,
) -> Result<FeatureVector> {
    if t < window_len {
        return Err(Error::InsufficientData { needed: window_len, got: t });
    }
    if t > series.len() || series.len() != dates.len() {
        return Err(Error::DimensionMismatch { expected: series.len(), got: dates.len() });
    }
    let window = &series[t - window_len..t];
    let window_end = dates[t - 1];

    let (trend, remainder) = decompose_trend(window)?;
    let (trend_strength, spike, linearity, curvature) = trend_features(&trend, &remainder)?;

    let mut degenerate = false;
    let entropy = match spectral_entropy(window) {
        Ok(e) => e,
        Err(Error::ConstantWindow) => {
            degenerate = true;
            0.0
        }
        Err(e) => return Err(e),
    };

    let raw = acf_feature_set(window, 0)?;
    let d1 = acf_feature_set(window, 1)?;
    let d2 = acf_feature_set(window, 2)?;
    degenerate |= raw.degenerate || d1.degenerate || d2.degenerate;

    Ok(FeatureVector {
        trend_strength,
        spike,
        linearity,
        curvature,
        entropy,
        x_acf1: raw.acf1,
        x_acf10: raw.acf10,
        diff1_acf1: d1.acf1,
        diff1_acf10: d1.acf10,
        diff2_acf1: d2.acf1,
        diff2_acf10: d2.acf10,
        window_end,
        degenerate,
    })
}

/// Write feature vectors as CSV keyed by `window_end`.
pub fn write_features_csv(features: &[FeatureVector], path: &std::path::Path) -> Result<()> {
    let mut out = String::from("window_end");
    for name in FeatureVector::NAMES {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",degenerate\n");
    for f in features {
        out.push_str(&f.window_end.to_string());
        for v in f.values() {
            out.push_str(&format!(",{v:.15e}"));
        }
        out.push_str(&format!(",{}\n", u8::from(f.degenerate)));
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Re-read a feature CSV written by [`write_features_csv`].
pub fn read_features_csv(path: &std::path::Path) -> Result<Vec<FeatureVector>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let bad = |msg: String| Error::CsvParse {
        path: path.display().to_string(),
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let expected: Vec<&str> = std::iter::once("window_end")
        .chain(FeatureVector::NAMES)
        .chain(std::iter::once("degenerate"))
        .collect();
    if header.split(',').collect::<Vec<_>>() != expected {
        return Err(bad(format!("unexpected header '{header}'")));
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != expected.len() {
            return Err(bad(format!("wrong cell count in '{line}'")));
        }
        let window_end = NaiveDate::parse_from_str(cells[0], "%Y-%m-%d")
            .map_err(|_| bad(format!("bad date '{}'", cells[0])))?;
        let mut v = [0.0_f64; 11];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = cells[i + 1]
                .parse()
                .map_err(|_| bad(format!("bad numeric cell '{}'", cells[i + 1])))?;
        }
        out.push(FeatureVector {
            trend_strength: v[0],
            spike: v[1],
            linearity: v[2],
            curvature: v[3],
            entropy: v[4],
            x_acf1: v[5],
            x_acf10: v[6],
            diff1_acf1: v[7],
            diff1_acf10: v[8],
            diff2_acf1: v[9],
            diff2_acf10: v[10],
            window_end,
            degenerate: cells[12] == "1",
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dates_from(n: usize) -> Vec<NaiveDate> {
        let d0 = NaiveDate::from_ymd_opt(2013, 1, 10).unwrap();
        (0..n).map(|i| d0 + chrono::Duration::days(i as i64)).collect()
    }

    #[test]
    fn smoother_reproduces_lines() {
        let slope = 2.5;
        let window: Vec<f64> = (0..30).map(|i| 4.0 + slope * i as f64).collect();
        let (_, remainder) = decompose_trend(&window).unwrap();
        let max_abs = remainder.iter().fold(0.0_f64, |a, &r| a.max(r.abs()));
        assert!(max_abs < 1e-8 * slope, "max remainder {max_abs}");
    }

    #[test]
    fn smoother_constant_window() {
        let window = vec![7.0; 30];
        let (trend, remainder) = decompose_trend(&window).unwrap();
        for (t, r) in trend.iter().zip(&remainder) {
            assert_relative_eq!(*t, 7.0, epsilon = 1e-9);
            assert_relative_eq!(*r, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn outlier_dominates_remainder() {
        let mut window: Vec<f64> = (0..30).map(|i| 1.0 + 0.5 * i as f64).collect();
        window[13] += 25.0;
        let (_, remainder) = decompose_trend(&window).unwrap();
        let argmax = remainder
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 13);
    }

    #[test]
    fn window_too_short_rejected() {
        assert!(matches!(
            decompose_trend(&[1.0; 5]),
            Err(Error::WindowTooShort { .. })
        ));
    }

    #[test]
    fn line_has_full_trend_strength_and_no_curvature() {
        let window: Vec<f64> = (0..30).map(|i| -3.0 + 1.7 * i as f64).collect();
        let (trend, remainder) = decompose_trend(&window).unwrap();
        let (strength, _, linearity, curvature) = trend_features(&trend, &remainder).unwrap();
        assert!(strength > 0.999, "strength {strength}");
        assert!(linearity.abs() > 1.0);
        assert_relative_eq!(curvature, 0.0, epsilon = 1e-6 * linearity.abs());
    }

    #[test]
    fn white_noise_has_low_mean_trend_strength() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut total = 0.0;
        let reps = 200;
        for _ in 0..reps {
            let window: Vec<f64> = (0..30)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let (trend, remainder) = decompose_trend(&window).unwrap();
            let (strength, _, _, _) = trend_features(&trend, &remainder).unwrap();
            total += strength;
        }
        let mean_strength = total / reps as f64;
        assert!(mean_strength < 0.5, "mean trend strength {mean_strength}");
    }

    #[test]
    fn constant_remainder_has_zero_spike() {
        let trend: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let remainder = vec![0.25; 30];
        let (_, spike, _, _) = trend_features(&trend, &remainder).unwrap();
        assert_relative_eq!(spike, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn zero_total_variance_gives_zero_strength() {
        let trend = vec![1.0; 30];
        let remainder = vec![0.0; 30];
        let (strength, _, _, _) = trend_features(&trend, &remainder).unwrap();
        assert_eq!(strength, 0.0);
    }

    #[test]
    fn entropy_high_for_long_iid_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let window: Vec<f64> = (0..1000)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let e = spectral_entropy(&window).unwrap();
            assert!(e > 0.95, "entropy {e}");
        }
    }

    #[test]
    fn entropy_low_for_fourier_sinusoid() {
        for &m in &[30usize, 100, 1000] {
            let window: Vec<f64> = (0..m)
                .map(|t| (2.0 * std::f64::consts::PI * 5.0 * t as f64 / m as f64).sin())
                .collect();
            let e = spectral_entropy(&window).unwrap();
            assert!(e < 0.2, "m={m} entropy {e}");
        }
    }

    #[test]
    fn entropy_rejects_tiny_and_constant_windows() {
        assert!(matches!(
            spectral_entropy(&[1.0, 2.0]),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            spectral_entropy(&[3.0; 30]),
            Err(Error::ConstantWindow)
        ));
    }

    #[test]
    fn acf_alternating_window() {
        let window: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = acf_feature_set(&window, 0).unwrap();
        assert_relative_eq!(f.acf1, -29.0 / 30.0, epsilon = 1e-12);
    }

    #[test]
    fn acf_iid_noise_within_bartlett_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1000;
        let reps = 400;
        let mut inside = 0;
        for _ in 0..reps {
            let window: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let f = acf_feature_set(&window, 0).unwrap();
            if f.acf1.abs() < 2.0 / (n as f64).sqrt() {
                inside += 1;
            }
        }
        let frac = inside as f64 / reps as f64;
        assert!((0.90..=1.0).contains(&frac), "fraction inside {frac}");
    }

    #[test]
    fn acf_of_differenced_line_is_degenerate() {
        let window: Vec<f64> = (0..30).map(|i| 2.0 * i as f64).collect();
        let f = acf_feature_set(&window, 1).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.acf1, 0.0);
        assert_eq!(f.acf10, 0.0);
    }

    #[test]
    fn acf_too_short_after_differencing() {
        assert!(matches!(
            acf_feature_set(&[1.0; 13], 2),
            Err(Error::WindowTooShort { .. })
        ));
    }

    #[test]
    fn extract_boundary_and_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let series: Vec<f64> = (0..356)
            .map(|i| (i as f64 * 0.05).sin() * 4.0 + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let dates = dates_from(356);
        assert!(extract_feature_vector(&series, &dates, 29, 30).is_err());
        let first = extract_feature_vector(&series, &dates, 30, 30).unwrap();
        assert_eq!(first.window_end, dates[29]);
        // 156 consecutive targets starting at index 200 all produce vectors.
        let vectors: Vec<_> = (200..356)
            .map(|t| extract_feature_vector(&series, &dates, t, 30).unwrap())
            .collect();
        assert_eq!(vectors.len(), 156);
    }

    #[test]
    fn extract_is_deterministic() {
        let series: Vec<f64> = (0..60).map(|i| ((i * i) % 17) as f64 * 0.3).collect();
        let dates = dates_from(60);
        let a = extract_feature_vector(&series, &dates, 40, 30).unwrap();
        let b = extract_feature_vector(&series, &dates, 40, 30).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn scale_and_shift_invariances(seed in 0u64..1000, scale in 0.1f64..50.0, shift in -100.0f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let window: Vec<f64> = (0..30)
                .map(|i| (i as f64 * 0.3).sin() * 2.0 + rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let dates = dates_from(30);
            let base = extract_feature_vector(&window, &dates, 30, 30).unwrap();

            let transformed: Vec<f64> = window.iter().map(|v| scale * v + shift).collect();
            let tf = extract_feature_vector(&transformed, &dates, 30, 30).unwrap();

            // Location/scale invariant features
            prop_assert!((tf.trend_strength - base.trend_strength).abs() < 1e-9);
            prop_assert!((tf.entropy - base.entropy).abs() < 1e-9);
            prop_assert!((tf.x_acf1 - base.x_acf1).abs() < 1e-9);
            prop_assert!((tf.x_acf10 - base.x_acf10).abs() < 1e-9);
            prop_assert!((tf.diff1_acf1 - base.diff1_acf1).abs() < 1e-9);
            prop_assert!((tf.diff2_acf10 - base.diff2_acf10).abs() < 1e-9);
            // Equivariant features
            prop_assert!((tf.spike - scale.powi(4) * base.spike).abs() <= 1e-6 * base.spike.abs().max(1e-12));
            prop_assert!((tf.linearity - scale * base.linearity).abs() < 1e-6 * base.linearity.abs().max(1.0));
            prop_assert!((tf.curvature - scale * base.curvature).abs() < 1e-6 * base.curvature.abs().max(1.0));
        }

        #[test]
        fn entropy_and_strength_stay_in_range(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let window: Vec<f64> = (0..30)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let dates = dates_from(30);
            let f = extract_feature_vector(&window, &dates, 30, 30).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.entropy));
            prop_assert!((0.0..=1.0).contains(&f.trend_strength));
            prop_assert!(f.x_acf1.abs() <= 1.0 + 1e-9);
            prop_assert!(f.x_acf10 >= 0.0);
            prop_assert!(f.spike >= 0.0);
        }
    }
}
