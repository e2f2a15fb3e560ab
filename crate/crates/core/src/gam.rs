//! Generalized additive model for turbidity: natural cubic spline smooths
//! per covariate plus lag-1/lag-2 turbidity terms, fit by least squares at
//! fixed degrees of freedom.
//!
//! The basis puts each smooth's linear column first and its curvature
//! columns after it, which makes the parametric/nonparametric ANOVA a pair
//! of nested residual-sum-of-squares comparisons.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arima::aicc;
use crate::dataset::TimeSeriesFrame;
use crate::error::{Error, Result};
use crate::forecast::{ForecastPoint, ModelTag};
use crate::stats;

/// Candidate degrees of freedom searched per smooth (1 = linear term).
pub const DF_CANDIDATES: [usize; 4] = [1, 4, 6, 12];

/// One covariate's smooth: its name and degrees of freedom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothSpec {
    pub covariate: String,
    pub df: usize,
}

impl SmoothSpec {
    pub fn new(covariate: impl Into<String>, df: usize) -> Self {
        SmoothSpec { covariate: covariate.into(), df }
    }
}

/// Which 95% band the forecast reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BandKind {
    /// Mean +/- 1.96 * sqrt(sigma2 * (1 + leverage)): covers a new observation.
    #[default]
    Prediction,
    /// Mean +/- 1.96 * sqrt(sigma2 * leverage): covers the mean response only.
    Confidence,
}

/// Natural cubic spline basis of `x` with `df` columns.
///
/// Column 0 is the centered linear term; the remaining `df - 1` columns are
/// the natural-spline curvature functions, which are linear beyond the
/// boundary knots so out-of-range evaluation extrapolates linearly. Knots
/// default to evenly spaced quantiles of the distinct values of `x`.
pub fn spline_basis(x: &[f64], df: usize, knots: Option<&[f64]>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    assert!(df >= 1, "df must be at least 1");
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite covariate"));
    distinct.dedup();
    let needed = if df == 1 { 2 } else { df + 1 };
    if distinct.len() < needed {
        return Err(Error::InsufficientData { needed, got: distinct.len() });
    }

    let knots: Vec<f64> = match knots {
        Some(k) => k.to_vec(),
        None if df == 1 => Vec::new(),
        None => {
            let k_count = df + 1;
            (0..k_count)
                .map(|i| {
                    let pos = i as f64 / (k_count - 1) as f64 * (distinct.len() - 1) as f64;
                    let lo = pos.floor() as usize;
                    let hi = pos.ceil() as usize;
                    let frac = pos - lo as f64;
                    distinct[lo] * (1.0 - frac) + distinct[hi] * frac
                })
                .collect()
        }
    };

    let basis = evaluate_basis(x, df, &knots);
    Ok((basis, knots))
}

/// Evaluate the (uncentered) natural spline columns at arbitrary points.
fn evaluate_basis(x: &[f64], df: usize, knots: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut m = DMatrix::zeros(n, df);
    for (i, &xi) in x.iter().enumerate() {
        m[(i, 0)] = xi;
    }
    if df >= 2 {
        let k = knots.len();
        debug_assert_eq!(k, df + 1);
        let last = knots[k - 1];
        let second_last = knots[k - 2];
        let d = |xi: f64, knot: f64| -> f64 {
            let a = (xi - knot).max(0.0).powi(3);
            let b = (xi - last).max(0.0).powi(3);
            (a - b) / (last - knot)
        };
        for (i, &xi) in x.iter().enumerate() {
            let d_ref = d(xi, second_last);
            for j in 0..df - 1 {
                m[(i, j + 1)] = d(xi, knots[j]) - d_ref;
            }
        }
    }
    m
}

/// One fitted smooth: spec, knots, per-column training means, coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedSmooth {
    pub spec: SmoothSpec,
    pub knots: Vec<f64>,
    pub col_means: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// Training min/max, kept to flag extrapolation at forecast time.
    pub x_range: (f64, f64),
}

/// A fitted GAM.
#[derive(Debug, Clone)]
pub struct GamFit {
    pub intercept: f64,
    pub smooths: Vec<FittedSmooth>,
    /// Coefficients for y_{t-1}, y_{t-2}; empty when lags are disabled.
    pub lag_coeffs: Vec<f64>,
    pub sigma2: f64,
    pub design_rank: usize,
    pub log_likelihood: f64,
    pub aicc: f64,
    pub n_effective: usize,
    pub residuals: Vec<f64>,
    pub band: BandKind,
    /// (X'X)^-1 for leverage of new rows and coefficient standard errors.
    xtx_inv: DMatrix<f64>,
    /// Last two training responses, newest last: forecasting the next step
    /// uses these as its lag values.
    pub y_tail: (f64, f64),
    /// Training data retained for the nested-ANOVA refits.
    train_y: Vec<f64>,
    train_covariates: Vec<(String, Vec<f64>)>,
    use_lags: bool,
}

/// Per-smooth knot vector and training column means.
type KnotsAndMeans = Vec<(Vec<f64>, Vec<f64>)>;

/// Column layout of a GAM design matrix.
struct Design {
    matrix: DMatrix<f64>,
    y: DVector<f64>,
    /// (start, len) of each smooth's block, in smooth order.
    blocks: Vec<(usize, usize)>,
}

fn build_design(
    y_full: &[f64],
    covariates: &[(String, Vec<f64>)],
    specs: &[SmoothSpec],
    use_lags: bool,
) -> Result<(Design, KnotsAndMeans)> {
    let trim = if use_lags { 2 } else { 0 };
    let n = y_full.len() - trim;
    let total_df: usize = specs.iter().map(|s| s.df).sum();
    let p = 1 + if use_lags { 2 } else { 0 } + total_df;
    if n <= p + 1 {
        return Err(Error::InsufficientData { needed: p + 2, got: n });
    }

    let mut m = DMatrix::zeros(n, p);
    for i in 0..n {
        m[(i, 0)] = 1.0;
    }
    if use_lags {
        for i in 0..n {
            m[(i, 1)] = y_full[i + 1]; // y_{t-1}
            m[(i, 2)] = y_full[i]; // y_{t-2}
        }
    }

    let mut col = 1 + if use_lags { 2 } else { 0 };
    let mut blocks = Vec::with_capacity(specs.len());
    let mut knots_means = Vec::with_capacity(specs.len());
    for spec in specs {
        let x_full = &covariates
            .iter()
            .find(|(name, _)| name == &spec.covariate)
            .ok_or_else(|| Error::UnknownVariable(spec.covariate.clone()))?
            .1;
        let x = &x_full[trim..];
        let (basis, knots) = spline_basis(x, spec.df, None)?;
        let mut means = Vec::with_capacity(spec.df);
        for j in 0..spec.df {
            let mean = basis.column(j).sum() / n as f64;
            means.push(mean);
            for i in 0..n {
                m[(i, col + j)] = basis[(i, j)] - mean;
            }
        }
        blocks.push((col, spec.df));
        knots_means.push((knots, means));
        col += spec.df;
    }

    let y = DVector::from_iterator(n, y_full[trim..].iter().copied());
    Ok((
        Design {
            matrix: m,
            y,
            blocks,
        },
        knots_means,
    ))
}

struct LsSolution {
    coef: DVector<f64>,
    rss: f64,
    rank: usize,
    xtx_inv: DMatrix<f64>,
    residuals: Vec<f64>,
}

fn solve_design(design: &Design) -> Result<LsSolution> {
    let m = &design.matrix;
    let p = m.ncols();
    let numeric_rank = stats::rank(m, 1e-10);
    if numeric_rank < p {
        return Err(Error::SingularDesign(format!(
            "design rank {numeric_rank} < {p} columns"
        )));
    }
    let xtx = m.transpose() * m;
    let xtx_inv = xtx
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| xtx.try_inverse())
        .ok_or_else(|| Error::SingularDesign("X'X not invertible".into()))?;
    let coef = &xtx_inv * (m.transpose() * &design.y);
    let fitted = m * &coef;
    let residuals: Vec<f64> = design
        .y
        .iter()
        .zip(fitted.iter())
        .map(|(y, f)| y - f)
        .collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(LsSolution {
        coef,
        rss,
        rank: p,
        xtx_inv,
        residuals,
    })
}

fn gaussian_log_likelihood(rss: f64, n: usize) -> f64 {
    let sigma2_ml = (rss / n as f64).max(1e-300);
    -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * sigma2_ml).ln() + 1.0)
}

/// Fit a GAM of `target` on the given smooths, optionally with lag-1/lag-2
/// terms of the target. The first two rows are dropped when lags are on.
pub fn fit_gam(
    frame: &TimeSeriesFrame,
    target: &str,
    smooth_specs: &[SmoothSpec],
    use_lags: bool,
) -> Result<GamFit> {
    fit_gam_with_band(frame, target, smooth_specs, use_lags, BandKind::default())
}

pub fn fit_gam_with_band(
    frame: &TimeSeriesFrame,
    target: &str,
    smooth_specs: &[SmoothSpec],
    use_lags: bool,
    band: BandKind,
) -> Result<GamFit> {
    let y_full = frame.column(target)?.to_vec();
    let covariates: Vec<(String, Vec<f64>)> = smooth_specs
        .iter()
        .map(|s| frame.column(&s.covariate).map(|c| (s.covariate.clone(), c.to_vec())))
        .collect::<Result<_>>()?;
    fit_gam_from_columns(&y_full, &covariates, smooth_specs, use_lags, band)
}

fn fit_gam_from_columns(
    y_full: &[f64],
    covariates: &[(String, Vec<f64>)],
    smooth_specs: &[SmoothSpec],
    use_lags: bool,
    band: BandKind,
) -> Result<GamFit> {
    let (design, knots_means) = build_design(y_full, covariates, smooth_specs, use_lags)?;
    let sol = solve_design(&design)?;
    let n = design.y.len();
    let sigma2 = sol.rss / (n - sol.rank) as f64;
    let log_likelihood = gaussian_log_likelihood(sol.rss, n);
    let k = sol.rank + 1; // coefficients plus the variance
    let aicc_value = aicc(log_likelihood, k, n)?;

    let trim = if use_lags { 2 } else { 0 };
    let mut smooths = Vec::with_capacity(smooth_specs.len());
    for ((spec, (knots, means)), &(start, len)) in smooth_specs
        .iter()
        .zip(knots_means)
        .zip(&design.blocks)
    {
        let x = &covariates
            .iter()
            .find(|(name, _)| name == &spec.covariate)
            .expect("validated above")
            .1[trim..];
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        smooths.push(FittedSmooth {
            spec: spec.clone(),
            knots,
            col_means: means,
            coefficients: sol.coef.as_slice()[start..start + len].to_vec(),
            x_range: (lo, hi),
        });
    }

    let lag_coeffs = if use_lags {
        vec![sol.coef[1], sol.coef[2]]
    } else {
        Vec::new()
    };

    Ok(GamFit {
        intercept: sol.coef[0],
        smooths,
        lag_coeffs,
        sigma2,
        design_rank: sol.rank,
        log_likelihood,
        aicc: aicc_value,
        n_effective: n,
        residuals: sol.residuals,
        band,
        xtx_inv: sol.xtx_inv,
        y_tail: (y_full[y_full.len() - 2], y_full[y_full.len() - 1]),
        train_y: y_full.to_vec(),
        train_covariates: covariates.to_vec(),
        use_lags,
    })
}

impl GamFit {
    pub fn use_lags(&self) -> bool {
        self.use_lags
    }

    /// Standard errors of all coefficients in design order
    /// (intercept, lags, smooth blocks).
    pub fn coefficient_ses(&self) -> Vec<f64> {
        (0..self.xtx_inv.nrows())
            .map(|j| (self.sigma2 * self.xtx_inv[(j, j)]).sqrt())
            .collect()
    }

    /// Design row for new covariate values and lag values, in training layout.
    fn design_row(&self, next_covariates: &[f64], y_lag1: f64, y_lag2: f64) -> Result<DVector<f64>> {
        if next_covariates.len() != self.smooths.len() {
            return Err(Error::DimensionMismatch {
                expected: self.smooths.len(),
                got: next_covariates.len(),
            });
        }
        let p = self.xtx_inv.nrows();
        let mut row = DVector::zeros(p);
        row[0] = 1.0;
        let mut col = 1;
        if self.use_lags {
            row[1] = y_lag1;
            row[2] = y_lag2;
            col = 3;
        }
        for (smooth, &x) in self.smooths.iter().zip(next_covariates) {
            let basis = evaluate_basis(&[x], smooth.spec.df, &smooth.knots);
            for j in 0..smooth.spec.df {
                row[col + j] = basis[(0, j)] - smooth.col_means[j];
            }
            col += smooth.spec.df;
        }
        Ok(row)
    }

    fn coefficient_vector(&self) -> DVector<f64> {
        let mut coef = vec![self.intercept];
        coef.extend(&self.lag_coeffs);
        for s in &self.smooths {
            coef.extend(&s.coefficients);
        }
        DVector::from_vec(coef)
    }

    /// Leverage x'(X'X)^-1 x of a new design row.
    fn leverage(&self, row: &DVector<f64>) -> f64 {
        (row.transpose() * &self.xtx_inv * row)[(0, 0)]
    }
}

/// A GAM forecast with both band half-widths and diagnostics.
#[derive(Debug, Clone)]
pub struct GamPrediction {
    pub point: ForecastPoint,
    pub leverage: f64,
    pub half_width_prediction: f64,
    pub half_width_confidence: f64,
    /// Some covariate lies outside 3x the span of its training range.
    pub extrapolation_warning: bool,
}

/// One-step forecast: mean from the design row, 95% band from the leverage.
pub fn forecast_one_step_gam(
    fit: &GamFit,
    next_covariates: &[f64],
    y_lag1: f64,
    y_lag2: f64,
) -> Result<GamPrediction> {
    let row = fit.design_row(next_covariates, y_lag1, y_lag2)?;
    let mean = (row.transpose() * fit.coefficient_vector())[(0, 0)];
    let leverage = fit.leverage(&row);
    let half_pred = 1.96 * (fit.sigma2 * (1.0 + leverage)).sqrt();
    let half_conf = 1.96 * (fit.sigma2 * leverage).sqrt();
    let half = match fit.band {
        BandKind::Prediction => half_pred,
        BandKind::Confidence => half_conf,
    };

    let extrapolation_warning = fit.smooths.iter().zip(next_covariates).any(|(s, &x)| {
        let (lo, hi) = s.x_range;
        let span = (hi - lo).max(1e-12);
        let mid = 0.5 * (lo + hi);
        x < mid - 1.5 * span || x > mid + 1.5 * span
    });

    Ok(GamPrediction {
        point: ForecastPoint::with_interval(mean, mean - half, mean + half, ModelTag::Gam),
        leverage,
        half_width_prediction: half_pred,
        half_width_confidence: half_conf,
        extrapolation_warning,
    })
}

/// Per-covariate df search and backward elimination, both by AICc, with the
/// lag terms always kept.
pub fn select_best_gam(
    frame: &TimeSeriesFrame,
    target: &str,
    candidate_covariates: &[String],
) -> Result<GamFit> {
    let n_eff = frame.column(target)?.len().saturating_sub(2);
    let df_pool: Vec<usize> = DF_CANDIDATES
        .iter()
        .copied()
        .filter(|&df| df * 10 < n_eff)
        .collect();
    if df_pool.is_empty() {
        return Err(Error::InsufficientData { needed: 20, got: n_eff });
    }

    let mut last_error = String::from("no candidates tried");
    let mut try_fit = |specs: &[SmoothSpec]| -> Option<GamFit> {
        match fit_gam(frame, target, specs, true) {
            Ok(fit) => Some(fit),
            Err(e) => {
                last_error = e.to_string();
                None
            }
        }
    };

    // Phase 1: each covariate's df is scanned independently with every
    // other covariate held at df=4 (or the largest available candidate).
    let hold_df = *df_pool.iter().find(|&&d| d == 4).unwrap_or(&df_pool[0]);
    let baseline: Vec<SmoothSpec> = candidate_covariates
        .iter()
        .map(|c| SmoothSpec::new(c.clone(), hold_df))
        .collect();
    let mut chosen = baseline.clone();
    for i in 0..chosen.len() {
        let mut best: Option<(usize, f64)> = None;
        for &df in &df_pool {
            let mut specs = baseline.clone();
            specs[i].df = df;
            if let Some(fit) = try_fit(&specs) {
                let better = match best {
                    None => true,
                    // Tie within noise goes to the smaller df.
                    Some((bdf, bv)) => fit.aicc < bv - 1e-9 || (fit.aicc <= bv + 1e-9 && df < bdf),
                };
                if better {
                    best = Some((df, fit.aicc));
                }
            }
        }
        if let Some((df, _)) = best {
            chosen[i].df = df;
        }
    }

    // Phase 2: backward elimination over whole covariates.
    let mut current = match try_fit(&chosen) {
        Some(f) => f,
        None => return Err(Error::AllCandidatesFailed(last_error)),
    };
    loop {
        let mut best_drop: Option<(usize, GamFit)> = None;
        for i in 0..current.smooths.len() {
            let mut specs: Vec<SmoothSpec> =
                current.smooths.iter().map(|s| s.spec.clone()).collect();
            specs.remove(i);
            if let Some(fit) = try_fit(&specs) {
                if fit.aicc < current.aicc - 1e-9
                    && best_drop.as_ref().is_none_or(|(_, b)| fit.aicc < b.aicc)
                {
                    best_drop = Some((i, fit));
                }
            }
        }
        match best_drop {
            Some((_, fit)) => current = fit,
            None => break,
        }
    }
    Ok(current)
}

/// ANOVA of one covariate's parametric (linear) and nonparametric (spline)
/// effects, via nested RSS comparisons against the full fit's error.
pub fn term_significance(fit: &GamFit, covariate: &str) -> Result<(f64, f64, f64, f64)> {
    let idx = fit
        .smooths
        .iter()
        .position(|s| s.spec.covariate == covariate)
        .ok_or_else(|| Error::UnknownVariable(covariate.to_string()))?;

    let full_specs: Vec<SmoothSpec> = fit.smooths.iter().map(|s| s.spec.clone()).collect();
    let df_full = fit.smooths[idx].spec.df;
    let n = fit.n_effective;
    let rank_full = fit.design_rank;
    let rss_full: f64 = fit.residuals.iter().map(|r| r * r).sum();
    let mse_full = rss_full / (n - rank_full) as f64;

    let refit_rss = |specs: &[SmoothSpec]| -> Result<f64> {
        let (design, _) = build_design(&fit.train_y, &fit.train_covariates, specs, fit.use_lags)?;
        Ok(solve_design(&design)?.rss)
    };

    // Linear-only version of this covariate.
    let mut linear_specs = full_specs.clone();
    linear_specs[idx].df = 1;
    let rss_linear = refit_rss(&linear_specs)?;

    // Covariate omitted entirely.
    let mut omit_specs = full_specs.clone();
    omit_specs.remove(idx);
    let rss_omit = refit_rss(&omit_specs)?;

    let f_linear = ((rss_omit - rss_linear).max(0.0) / 1.0) / mse_full;
    let p_linear = stats::f_sf(f_linear, 1.0, (n - rank_full) as f64);

    let (f_nonpar, p_nonpar) = if df_full > 1 {
        let delta = (df_full - 1) as f64;
        let f = ((rss_linear - rss_full).max(0.0) / delta) / mse_full;
        (f, stats::f_sf(f, delta, (n - rank_full) as f64))
    } else {
        (0.0, 1.0)
    };

    Ok((f_linear, p_linear, f_nonpar, p_nonpar))
}

/// JSON fit summary: per-term df and coefficients, AICc, per-term F/p table.
pub fn fit_summary_json(fit: &GamFit) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = fit
        .smooths
        .iter()
        .map(|s| {
            let (f_lin, p_lin, f_non, p_non) =
                term_significance(fit, &s.spec.covariate).unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN));
            json!({
                "covariate": s.spec.covariate,
                "df": s.spec.df,
                "coefficients": s.coefficients,
                "f_linear": f_lin,
                "p_linear": p_lin,
                "f_nonparametric": f_non,
                "p_nonparametric": p_non,
            })
        })
        .collect();
    json!({
        "intercept": fit.intercept,
        "lag_coefficients": fit.lag_coeffs,
        "sigma2": fit.sigma2,
        "log_likelihood": fit.log_likelihood,
        "aicc": fit.aicc,
        "design_rank": fit.design_rank,
        "n_effective": fit.n_effective,
        "terms": terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn make_frame(columns: Vec<(&str, Vec<f64>)>) -> TimeSeriesFrame {
        let n = columns[0].1.len();
        let d0 = NaiveDate::from_ymd_opt(2013, 1, 10).unwrap();
        let dates = (0..n).map(|i| d0 + chrono::Duration::days(i as i64)).collect();
        let names = columns.iter().map(|(n, _)| n.to_string()).collect();
        let cols = columns.into_iter().map(|(_, c)| c).collect();
        TimeSeriesFrame::new(dates, names, cols).unwrap()
    }

    fn randn(rng: &mut ChaCha8Rng) -> f64 {
        rng.sample(StandardNormal)
    }

    #[test]
    fn basis_has_df_columns() {
        let x: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let (basis, knots) = spline_basis(&x, 4, None).unwrap();
        assert_eq!(basis.ncols(), 4);
        assert_eq!(basis.nrows(), 100);
        assert_eq!(knots.len(), 5);
    }

    #[test]
    fn basis_rank_equals_df() {
        let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.05).collect();
        let mut sorted = x.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for df in [1usize, 4, 6, 12] {
            let (basis, _) = spline_basis(&sorted, df, None).unwrap();
            // Independent check: rank from the SVD, not from the construction.
            assert_eq!(stats::rank(&basis, 1e-9), df, "df={df}");
        }
    }

    #[test]
    fn basis_df1_is_affine_in_x() {
        let x: Vec<f64> = (0..30).map(|i| 3.0 + 0.5 * i as f64).collect();
        let (basis, _) = spline_basis(&x, 1, None).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            assert_relative_eq!(basis[(i, 0)], xi, epsilon = 1e-12);
        }
    }

    #[test]
    fn basis_rejects_too_few_distinct_values() {
        let x = vec![1.0, 1.0, 2.0, 2.0, 3.0];
        assert!(spline_basis(&x, 4, None).is_err());
    }

    #[test]
    fn basis_extrapolates_linearly() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 5.0).collect();
        let (_, knots) = spline_basis(&x, 4, None).unwrap();
        // Second differences of each basis column vanish beyond the boundary.
        let probe: Vec<f64> = (0..10).map(|i| 12.0 + i as f64).collect();
        let basis = evaluate_basis(&probe, 4, &knots);
        for j in 0..4 {
            for i in 0..8 {
                let second_diff = basis[(i + 2, j)] - 2.0 * basis[(i + 1, j)] + basis[(i, j)];
                assert!(second_diff.abs() < 1e-8, "col {j} second diff {second_diff}");
            }
        }
    }

    #[test]
    fn smooth_fit_tracks_a_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 120;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / 12.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.0 + 2.0 * v + 0.5 * randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y.clone()), ("x", x.clone())]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();

        // Oracle: closed-form OLS line on the same data.
        let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
        let beta = stats::ols(&design, &DVector::from_vec(y.clone())).unwrap();

        let sigma = fit.sigma2.sqrt();
        for (i, &xi) in x.iter().enumerate() {
            let gam_mean = forecast_one_step_gam(&fit, &[xi], 0.0, 0.0).unwrap().point.mean;
            let line = beta[0] + beta[1] * xi;
            assert!(
                (gam_mean - line).abs() <= 2.0 * sigma,
                "i={i} gam {gam_mean} line {line}"
            );
        }
    }

    #[test]
    fn lag_coefficient_recovered_from_ar_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 400;
        let mut y = vec![0.0; n];
        for t in 1..n {
            y[t] = 0.8 * y[t - 1] + 0.5 * randn(&mut rng);
        }
        let x: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 1)], true).unwrap();
        let ses = fit.coefficient_ses();
        // layout: [intercept, lag1, lag2, x]
        let lag1 = fit.lag_coeffs[0];
        let se = ses[1];
        assert!(
            (lag1 - 0.8).abs() <= 3.0 * se,
            "lag1 {lag1} se {se}"
        );
    }

    #[test]
    fn all_linear_gam_equals_multiple_regression() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 80;
        let x1: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let x2: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.5 + 1.5 * x1[i] - 2.0 * x2[i] + 0.3 * randn(&mut rng))
            .collect();
        let frame = make_frame(vec![("y", y.clone()), ("x1", x1.clone()), ("x2", x2.clone())]);
        let fit = fit_gam(
            &frame,
            "y",
            &[SmoothSpec::new("x1", 1), SmoothSpec::new("x2", 1)],
            false,
        )
        .unwrap();

        let design = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => x1[i],
            2 => x2[i],
            _ => unreachable!(),
        });
        let beta = stats::ols(&design, &DVector::from_vec(y)).unwrap();
        // Centered basis shifts the intercept; slopes must agree exactly.
        assert_relative_eq!(fit.smooths[0].coefficients[0], beta[1], epsilon = 1e-6);
        assert_relative_eq!(fit.smooths[1].coefficients[0], beta[2], epsilon = 1e-6);
        let mean_x1 = stats::mean(&x1);
        let mean_x2 = stats::mean(&x2);
        assert_relative_eq!(
            fit.intercept,
            beta[0] + beta[1] * mean_x1 + beta[2] * mean_x2,
            epsilon = 1e-6
        );
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
        let frame = make_frame(vec![("y", y), ("a", x.clone()), ("b", x)]);
        // identical covariates with df=1 duplicate a column
        let r = fit_gam(
            &frame,
            "y",
            &[SmoothSpec::new("a", 1), SmoothSpec::new("b", 1)],
            false,
        );
        assert!(matches!(r, Err(Error::SingularDesign(_))));
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 100;
        let x: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|&v| (2.0 * v).sin() + 0.2 * randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y.clone()), ("x", x.clone())]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 6)], false).unwrap();
        let (design, _) = build_design(
            &y,
            &[("x".to_string(), x)],
            &[SmoothSpec::new("x", 6)],
            false,
        )
        .unwrap();
        let r = DVector::from_vec(fit.residuals.clone());
        for j in 0..design.matrix.ncols() {
            let col = design.matrix.column(j);
            let dot: f64 = col.dot(&r);
            let bound = 1e-6 * col.norm() * r.norm().max(1e-12);
            assert!(dot.abs() <= bound, "col {j} dot {dot}");
        }
    }

    #[test]
    fn rss_never_increases_with_df() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..10 {
            let n = 150;
            let x: Vec<f64> = (0..n).map(|_| 3.0 * randn(&mut rng)).collect();
            let y: Vec<f64> = x.iter().map(|&v| v.tanh() * 2.0 + 0.4 * randn(&mut rng)).collect();
            let frame = make_frame(vec![("y", y), ("x", x)]);
            let mut last_rss = f64::INFINITY;
            for df in [1usize, 4, 6, 12] {
                let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", df)], false).unwrap();
                let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
                assert!(
                    rss <= last_rss + 1e-8 * last_rss.abs().max(1.0),
                    "df {df} rss {rss} > {last_rss}"
                );
                last_rss = rss;
            }
        }
    }

    #[test]
    fn selection_finds_nonlinearity_and_prunes_noise() {
        use rand::Rng as _;
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let n = 300;
        // One sine hump over the covariate range: well inside what df=4
        // captures, so the baseline scans are not poisoned by underfit.
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.5..2.5)).collect();
        let x2: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let x3: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 3.0 * x1[i].sin() + 0.4 * randn(&mut rng))
            .collect();
        let frame = make_frame(vec![
            ("y", y),
            ("x1", x1),
            ("x2", x2),
            ("x3", x3),
        ]);
        let fit = select_best_gam(
            &frame,
            "y",
            &["x1".to_string(), "x2".to_string(), "x3".to_string()],
        )
        .unwrap();
        let x1_smooth = fit.smooths.iter().find(|s| s.spec.covariate == "x1");
        assert!(x1_smooth.is_some_and(|s| s.spec.df > 1), "x1 should be nonlinear");
        for s in &fit.smooths {
            if s.spec.covariate != "x1" {
                assert_eq!(s.spec.df, 1, "noise covariate {} should be linear", s.spec.covariate);
            }
        }
    }

    #[test]
    fn white_noise_target_drops_all_covariates() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let n = 250;
        let y: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let x1: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let x2: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y), ("x1", x1), ("x2", x2)]);
        let fit = select_best_gam(&frame, "y", &["x1".to_string(), "x2".to_string()]).unwrap();
        assert!(fit.smooths.is_empty(), "kept {:?}", fit.smooths.len());
        assert_eq!(fit.lag_coeffs.len(), 2);
    }

    #[test]
    fn nonparametric_test_calibrated_on_linear_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let reps = 200;
        let mut accepted = 0;
        for _ in 0..reps {
            let n = 120;
            let x: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
            let y: Vec<f64> = x.iter().map(|&v| 1.0 + 2.0 * v + randn(&mut rng)).collect();
            let frame = make_frame(vec![("y", y), ("x", x)]);
            let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();
            let (_, _, _, p_nonpar) = term_significance(&fit, "x").unwrap();
            if p_nonpar > 0.05 {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / reps as f64;
        assert!((0.90..=0.99).contains(&rate), "acceptance rate {rate}");
    }

    #[test]
    fn nonparametric_test_detects_curvature() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let n = 150;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| (2.0 * std::f64::consts::PI * v).sin() + 0.05 * randn(&mut rng))
            .collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 6)], false).unwrap();
        let (_, _, f_nonpar, p_nonpar) = term_significance(&fit, "x").unwrap();
        assert!(p_nonpar < 0.01, "F {f_nonpar} p {p_nonpar}");
    }

    #[test]
    fn significance_rejects_unknown_covariate() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let x: Vec<f64> = (0..60).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|&v| v + randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();
        assert!(matches!(
            term_significance(&fit, "nope"),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn intercept_only_forecast_matches_mean_model_algebra() {
        let y: Vec<f64> = (0..40).map(|i| 5.0 + (i % 7) as f64).collect();
        let n = y.len();
        let frame = make_frame(vec![("y", y.clone())]);
        let fit = fit_gam(&frame, "y", &[], false).unwrap();
        let pred = forecast_one_step_gam(&fit, &[], 0.0, 0.0).unwrap();
        assert_relative_eq!(pred.point.mean, stats::mean(&y), epsilon = 1e-10);
        let expected_half = 1.96 * (fit.sigma2 * (1.0 + 1.0 / n as f64)).sqrt();
        assert_relative_eq!(pred.half_width_prediction, expected_half, epsilon = 1e-10);
        assert_relative_eq!(pred.leverage, 1.0 / n as f64, epsilon = 1e-10);
    }

    #[test]
    fn new_row_leverage_equals_training_hat_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 10;
        let x: Vec<f64> = (0..n).map(|i| i as f64 + 0.1 * randn(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.0 + v + 0.1 * randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y.clone()), ("x", x.clone())]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();

        // Oracle: hat matrix of the same design, built independently.
        let (design, _) = build_design(
            &y,
            &[("x".to_string(), x.clone())],
            &[SmoothSpec::new("x", 4)],
            false,
        )
        .unwrap();
        let m = &design.matrix;
        let hat = m * (m.transpose() * m).try_inverse().unwrap() * m.transpose();

        for (i, &xi) in x.iter().enumerate() {
            let pred = forecast_one_step_gam(&fit, &[xi], 0.0, 0.0).unwrap();
            assert_relative_eq!(pred.leverage, hat[(i, i)], epsilon = 1e-8);
        }
    }

    #[test]
    fn interval_width_at_least_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 90;
        let x: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|&v| v + 0.5 * randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();
        let minimal = 2.0 * 1.96 * fit.sigma2.sqrt();
        for probe in [-2.0, 0.0, 1.5, 4.0] {
            let pred = forecast_one_step_gam(&fit, &[probe], 0.0, 0.0).unwrap();
            let width = pred.point.upper95.unwrap() - pred.point.lower95.unwrap();
            assert!(width >= minimal - 1e-9, "width {width} < minimal {minimal}");
        }
    }

    #[test]
    fn extrapolation_flagged_not_fatal() {
        let x: Vec<f64> = (0..60).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| v * 2.0 + 1.0).collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let mut fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();
        fit.sigma2 = fit.sigma2.max(1e-12);
        let inside = forecast_one_step_gam(&fit, &[3.0], 0.0, 0.0).unwrap();
        assert!(!inside.extrapolation_warning);
        let outside = forecast_one_step_gam(&fit, &[60.0], 0.0, 0.0).unwrap();
        assert!(outside.extrapolation_warning);
    }

    #[test]
    fn confidence_band_is_narrower() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let n = 90;
        let x: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|&v| v + 0.5 * randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let fit = fit_gam_with_band(
            &frame,
            "y",
            &[SmoothSpec::new("x", 4)],
            false,
            BandKind::Confidence,
        )
        .unwrap();
        let pred = forecast_one_step_gam(&fit, &[0.5], 0.0, 0.0).unwrap();
        assert!(pred.half_width_confidence < pred.half_width_prediction);
        let width = pred.point.upper95.unwrap() - pred.point.lower95.unwrap();
        assert_relative_eq!(width, 2.0 * pred.half_width_confidence, epsilon = 1e-12);
    }

    #[test]
    fn summary_json_has_term_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let n = 100;
        let x: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|&v| v.powi(2) + 0.3 * randn(&mut rng)).collect();
        let frame = make_frame(vec![("y", y), ("x", x)]);
        let fit = fit_gam(&frame, "y", &[SmoothSpec::new("x", 4)], false).unwrap();
        let summary = fit_summary_json(&fit);
        assert_eq!(summary["terms"].as_array().unwrap().len(), 1);
        assert!(summary["aicc"].as_f64().unwrap().is_finite());
    }
}
