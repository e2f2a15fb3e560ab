//! Dynamic regression: linear regression on covariates with ARIMA(p,d,q)
//! errors, fit by exact Gaussian maximum likelihood.
//!
//! The regression and ARMA parameters are optimized jointly on the
//! d-times-differenced scale. AR and MA coefficients are parameterized
//! through partial autocorrelations so the search is unconstrained while
//! every returned fit is stationary and invertible; a conditional
//! sum-of-squares pass seeds the exact-likelihood optimizer.

mod kalman;
mod optim;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::TimeSeriesFrame;
use crate::error::{Error, Result};
use crate::forecast::{ForecastPoint, ModelTag};
use crate::stats;

use kalman::StateSpace;

/// KPSS 5% critical value for level stationarity.
const KPSS_CRIT_5PCT: f64 = 0.463;
/// Search bounds for the stepwise order search.
const MAX_P: usize = 5;
const MAX_Q: usize = 5;
const MAX_D: usize = 2;
/// Optimizer budget per fit.
const MAX_ITER: usize = 500;
const TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        assert!(p <= MAX_P && q <= MAX_Q && d <= MAX_D, "order out of search bounds");
        ArimaOrder { p, d, q }
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

/// A fitted dynamic regression.
#[derive(Debug, Clone)]
pub struct DynRegFit {
    pub order: ArimaOrder,
    pub covariate_set: Vec<String>,
    /// Intercept (d = 0 only) followed by one coefficient per covariate.
    pub beta: Vec<f64>,
    pub has_intercept: bool,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Innovation variance on the differenced scale.
    pub sigma2: f64,
    pub log_likelihood: f64,
    pub aicc: f64,
    /// One-step prediction errors on the differenced scale (length n - d).
    pub residuals: Vec<f64>,
    pub n_effective: usize,
    /// Last d level values of the target, oldest first.
    last_y: Vec<f64>,
    /// Last d covariate rows, oldest first.
    last_x: Vec<Vec<f64>>,
    /// E[z_{n+1}] for the ARMA error term and its variance ratio.
    next_error_mean: f64,
    next_error_var_ratio: f64,
}

impl DynRegFit {
    /// Number of estimated parameters, counting the innovation variance.
    pub fn k_params(&self) -> usize {
        self.order.p + self.order.q + self.beta.len() + 1
    }
}

fn difference(series: &[f64], d: usize) -> Vec<f64> {
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Corrected Akaike Information Criterion.
pub fn aicc(log_likelihood: f64, k: usize, n: usize) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::AiccDegenerate { n, k_plus_one: k + 1 });
    }
    let kf = k as f64;
    Ok(-2.0 * log_likelihood + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (n as f64 - kf - 1.0))
}

/// Ljung-Box portmanteau statistic and its chi-square p-value with
/// h - fitted_df degrees of freedom.
pub fn ljung_box(residuals: &[f64], h: usize, fitted_df: usize) -> Result<(f64, f64)> {
    if h <= fitted_df {
        return Err(Error::LjungBoxDegenerate { h, fitted_df });
    }
    let n = residuals.len();
    if n <= h {
        return Err(Error::InsufficientData { needed: h + 1, got: n });
    }
    let rho = stats::acf(residuals, h);
    let nf = n as f64;
    let q = nf * (nf + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    let df = h - fitted_df;
    Ok((q, stats::chi_square_sf(q, df)))
}

/// Default Ljung-Box lag count: min(25, n/4), at least fitted_df + 1.
pub fn default_ljung_box_lags(n: usize, fitted_df: usize) -> usize {
    (n / 4).min(25).max(fitted_df + 1)
}

struct PreparedData {
    /// d-times differenced target.
    z_y: Vec<f64>,
    /// Design matrix on the differenced scale (intercept column when d=0).
    design: DMatrix<f64>,
    has_intercept: bool,
}

fn prepare(
    y: &[f64],
    x_cols: &[(String, Vec<f64>)],
    d: usize,
) -> Result<PreparedData> {
    let z_y = difference(y, d);
    let n = z_y.len();
    let has_intercept = d == 0;
    let c = x_cols.len();
    let p_cols = c + usize::from(has_intercept);
    let mut design = DMatrix::zeros(n, p_cols.max(1));
    let mut col = 0;
    if has_intercept {
        for i in 0..n {
            design[(i, 0)] = 1.0;
        }
        col = 1;
    }
    for (_, x) in x_cols {
        let zx = difference(x, d);
        for i in 0..n {
            design[(i, col)] = zx[i];
        }
        col += 1;
    }
    if p_cols == 0 {
        // No regression part: keep a zero column so shapes stay simple.
        design = DMatrix::zeros(n, 0);
    }
    Ok(PreparedData { z_y, design, has_intercept })
}

#[allow(clippy::needless_range_loop)]
fn regression_residuals(data: &PreparedData, beta: &[f64]) -> Vec<f64> {
    let n = data.z_y.len();
    let mut e = data.z_y.clone();
    if !beta.is_empty() {
        for i in 0..n {
            let mut reg = 0.0;
            for (j, b) in beta.iter().enumerate() {
                reg += data.design[(i, j)] * b;
            }
            e[i] -= reg;
        }
    }
    e
}

/// Conditional sum-of-squares objective used to seed the exact optimizer.
fn css_objective(phi: &[f64], theta: &[f64], e: &[f64]) -> f64 {
    let p = phi.len();
    let n = e.len();
    if n <= p + 1 {
        return f64::INFINITY;
    }
    let mut a = vec![0.0; n];
    let mut ssq = 0.0;
    let mut count = 0usize;
    for t in p..n {
        let mut v = e[t];
        for (i, &ph) in phi.iter().enumerate() {
            v -= ph * e[t - 1 - i];
        }
        for (j, &th) in theta.iter().enumerate() {
            if t > j {
                v -= th * a[t - 1 - j];
            }
        }
        a[t] = v;
        ssq += v * v;
        count += 1;
    }
    if !ssq.is_finite() || ssq <= 0.0 {
        return f64::INFINITY;
    }
    0.5 * count as f64 * (ssq / count as f64).ln()
}

fn split_params(params: &[f64], p: usize, q: usize) -> (&[f64], &[f64], &[f64]) {
    (&params[..p], &params[p..p + q], &params[p + q..])
}

/// Fit the dynamic regression at a fixed order by exact maximum likelihood.
pub fn fit_dynamic_regression(
    frame: &TimeSeriesFrame,
    target: &str,
    covariates: &[String],
    order: ArimaOrder,
) -> Result<DynRegFit> {
    let y = frame.column(target)?.to_vec();
    let x_cols: Vec<(String, Vec<f64>)> = covariates
        .iter()
        .map(|c| frame.column(c).map(|v| (c.clone(), v.to_vec())))
        .collect::<Result<_>>()?;
    fit_from_columns(&y, &x_cols, order)
}

fn fit_from_columns(
    y: &[f64],
    x_cols: &[(String, Vec<f64>)],
    order: ArimaOrder,
) -> Result<DynRegFit> {
    let ArimaOrder { p, d, q } = order;
    let n = y.len();
    let needed = 10 * (p + d + q + x_cols.len() + 1);
    if n <= needed {
        return Err(Error::InsufficientData { needed: needed + 1, got: n });
    }

    let data = prepare(y, x_cols, d)?;
    let n_eff = data.z_y.len();
    let n_reg = data.design.ncols();

    // A zero-variance regressor (or collinear pair) cannot be identified.
    if n_reg > 0 {
        if stats::rank(&data.design, 1e-10) < n_reg {
            return Err(Error::SingularDesign(
                "covariate design rank-deficient after differencing".into(),
            ));
        }
        for j in (usize::from(data.has_intercept))..n_reg {
            let col: Vec<f64> = (0..n_eff).map(|i| data.design[(i, j)]).collect();
            if stats::variance(&col) < 1e-24 {
                return Err(Error::SingularDesign(format!(
                    "covariate column {j} has zero variance"
                )));
            }
        }
    }

    // Seed: OLS for beta, Yule-Walker AR on its residuals, zero MA.
    let beta0 = if n_reg > 0 {
        stats::ols(&data.design, &DVector::from_vec(data.z_y.clone()))?
            .as_slice()
            .to_vec()
    } else {
        Vec::new()
    };
    let resid0 = regression_residuals(&data, &beta0);
    let ar_seed = yule_walker(&resid0, p);
    let u_ar0 = optim::ar_to_unconstrained(&ar_seed).unwrap_or_else(|| vec![0.0; p]);
    let u_ma0 = vec![0.0; q];

    let mut params0 = Vec::with_capacity(p + q + beta0.len());
    params0.extend(&u_ar0);
    params0.extend(&u_ma0);
    params0.extend(&beta0);

    // A tiny ridge on the transformed ARMA parameters keeps redundant
    // (p, q) fits off the stationarity boundary, where the likelihood is
    // flat along a near-cancellation ridge.
    let ridge = |params: &[f64]| -> f64 {
        params[..p + q].iter().map(|u| u * u).sum::<f64>() * 1e-4
    };
    let objective_css = |params: &[f64]| {
        let (u_ar, u_ma, beta) = split_params(params, p, q);
        let phi = optim::unconstrained_to_ar(u_ar);
        let theta = optim::unconstrained_to_ma(u_ma);
        let e = regression_residuals(&data, beta);
        css_objective(&phi, &theta, &e) + ridge(params)
    };
    let objective_exact = |params: &[f64]| {
        let (u_ar, u_ma, beta) = split_params(params, p, q);
        let phi = optim::unconstrained_to_ar(u_ar);
        let theta = optim::unconstrained_to_ma(u_ma);
        let e = regression_residuals(&data, beta);
        kalman::neg_concentrated_loglik(&StateSpace::new(&phi, &theta), &e) + ridge(params)
    };

    let seeded = if p + q > 0 {
        optim::minimize(objective_css, &params0, 100, 1e-6).x
    } else {
        params0.clone()
    };
    let result = optim::minimize(objective_exact, &seeded, MAX_ITER, TOL);
    if !result.converged {
        return Err(Error::NonConvergence(MAX_ITER));
    }

    let (u_ar, u_ma, beta) = split_params(&result.x, p, q);
    let phi = optim::unconstrained_to_ar(u_ar);
    let theta = optim::unconstrained_to_ma(u_ma);
    check_roots(&phi, &theta)?;

    let e = regression_residuals(&data, beta);
    let run = kalman::kalman_full(&StateSpace::new(&phi, &theta), &e)
        .ok_or(Error::NonConvergence(MAX_ITER))?;
    let k = p + q + beta.len() + 1;
    let aicc_value = aicc(run.loglik, k, n_eff)?;

    let last_y = y[n - d..].to_vec();
    let last_x = (0..d)
        .map(|i| {
            x_cols
                .iter()
                .map(|(_, col)| col[n - d + i])
                .collect::<Vec<f64>>()
        })
        .collect();

    Ok(DynRegFit {
        order,
        covariate_set: x_cols.iter().map(|(name, _)| name.clone()).collect(),
        beta: beta.to_vec(),
        has_intercept: data.has_intercept,
        phi,
        theta,
        sigma2: run.sigma2,
        log_likelihood: run.loglik,
        aicc: aicc_value,
        residuals: run.innovations,
        n_effective: n_eff,
        last_y,
        last_x,
        next_error_mean: run.next_mean,
        next_error_var_ratio: run.next_var_ratio,
    })
}

/// Characteristic roots must sit strictly outside the unit circle.
fn check_roots(phi: &[f64], theta: &[f64]) -> Result<()> {
    let min_root = |coef: &[f64]| -> f64 {
        if coef.is_empty() {
            return f64::INFINITY;
        }
        let p = coef.len();
        let mut companion = DMatrix::<f64>::zeros(p, p);
        for (i, &c) in coef.iter().enumerate() {
            companion[(0, i)] = c;
        }
        for i in 1..p {
            companion[(i, i - 1)] = 1.0;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .map(|ev| if ev.norm() > 1e-12 { 1.0 / ev.norm() } else { f64::INFINITY })
            .fold(f64::INFINITY, f64::min)
    };
    let neg_theta: Vec<f64> = theta.iter().map(|v| -v).collect();
    if min_root(phi) <= 1.0 + 1e-6 || min_root(&neg_theta) <= 1.0 + 1e-6 {
        return Err(Error::NonStationary);
    }
    Ok(())
}

fn yule_walker(x: &[f64], p: usize) -> Vec<f64> {
    if p == 0 {
        return Vec::new();
    }
    let rho = stats::acf(x, p);
    if rho.len() < p {
        return vec![0.0; p];
    }
    // Levinson-Durbin on the sample autocorrelations.
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    let mut var = 1.0;
    for k in 0..p {
        let mut acc = rho[k];
        for i in 0..k {
            acc -= prev[i] * rho[k - 1 - i];
        }
        let reflection = (acc / var).clamp(-0.95, 0.95);
        phi[..k].copy_from_slice(&prev[..k]);
        for i in 0..k {
            phi[i] = prev[i] - reflection * prev[k - 1 - i];
        }
        phi[k] = reflection;
        var *= 1.0 - reflection * reflection;
        prev[..=k].copy_from_slice(&phi[..=k]);
    }
    phi
}

/// One-step forecast: regression part plus the ARMA error forecast,
/// undifferenced back to the level scale, with a 95% interval.
pub fn forecast_one_step_dynreg(fit: &DynRegFit, next_covariates: &[f64]) -> Result<ForecastPoint> {
    if next_covariates.len() != fit.covariate_set.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.covariate_set.len(),
            got: next_covariates.len(),
        });
    }
    let d = fit.order.d;

    // Regression part on the differenced scale.
    let mut reg = 0.0;
    let coef_offset = usize::from(fit.has_intercept);
    if fit.has_intercept {
        reg += fit.beta[0];
    }
    if !next_covariates.is_empty() {
        // Difference the last d covariate rows together with the new row.
        let mut rows: Vec<Vec<f64>> = fit.last_x.clone();
        rows.push(next_covariates.to_vec());
        for _ in 0..d {
            rows = rows.windows(2).map(|w| {
                w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect()
            }).collect();
        }
        let dx = rows.last().expect("one row remains after differencing");
        for (j, &x) in dx.iter().enumerate() {
            reg += fit.beta[coef_offset + j] * x;
        }
    }

    let mean_diff = reg + fit.next_error_mean;
    // Undifference: y_{n+1} = diff forecast + binomial combination of the
    // last observed levels.
    let mean = match d {
        0 => mean_diff,
        1 => fit.last_y[0] + mean_diff,
        2 => 2.0 * fit.last_y[1] - fit.last_y[0] + mean_diff,
        _ => unreachable!("d capped at 2"),
    };
    let var = fit.sigma2 * fit.next_error_var_ratio;
    let half = 1.96 * var.sqrt();
    Ok(ForecastPoint::with_interval(mean, mean - half, mean + half, ModelTag::Arima))
}

/// KPSS level-stationarity statistic with a Bartlett-window long-run
/// variance, lag truncation floor(4 (n/100)^1/4).
fn kpss_level(x: &[f64]) -> f64 {
    let n = x.len();
    let m = stats::mean(x);
    let e: Vec<f64> = x.iter().map(|v| v - m).collect();
    let mut cum = 0.0;
    let mut sum_s2 = 0.0;
    for &v in &e {
        cum += v;
        sum_s2 += cum * cum;
    }
    let l = (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    let mut lr_var = e.iter().map(|v| v * v).sum::<f64>() / n as f64;
    for k in 1..=l.min(n - 1) {
        let w = 1.0 - k as f64 / (l + 1) as f64;
        let gamma: f64 = (k..n).map(|t| e[t] * e[t - k]).sum::<f64>() / n as f64;
        lr_var += 2.0 * w * gamma;
    }
    if lr_var <= 0.0 {
        return 0.0;
    }
    sum_s2 / (n as f64 * n as f64 * lr_var)
}

/// Differencing order from repeated KPSS tests on the regression residuals,
/// capped at d = 2.
pub fn choose_d(y: &[f64], x_cols: &[(String, Vec<f64>)]) -> usize {
    for d in 0..MAX_D {
        let data = match prepare(y, x_cols, d) {
            Ok(p) => p,
            Err(_) => return d,
        };
        if data.z_y.len() < 20 {
            return d;
        }
        let resid = if data.design.ncols() > 0 {
            match stats::ols(&data.design, &DVector::from_vec(data.z_y.clone())) {
                Ok(beta) => regression_residuals(&data, beta.as_slice()),
                Err(_) => data.z_y.clone(),
            }
        } else {
            let m = stats::mean(&data.z_y);
            data.z_y.iter().map(|v| v - m).collect()
        };
        if kpss_level(&resid) <= KPSS_CRIT_5PCT {
            return d;
        }
    }
    MAX_D
}

/// One row of the model-selection leaderboard.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub covariates: Vec<String>,
    pub order: ArimaOrder,
    pub aicc: f64,
    pub log_likelihood: f64,
    pub k_params: usize,
}

/// Output of [`select_best_dynreg`]: the winning fit plus the per-subset
/// AICc leaderboard (sorted ascending).
#[derive(Debug)]
pub struct DynRegSelection {
    pub best: DynRegFit,
    pub leaderboard: Vec<LeaderboardEntry>,
}

/// Exhaustive covariate-subset enumeration crossed with a stepwise
/// neighborhood search over (p, q) seeded at (2, d, 2); d per subset from a
/// KPSS heuristic. Ties break toward fewer parameters.
pub fn select_best_dynreg(
    frame: &TimeSeriesFrame,
    target: &str,
    candidate_covariates: &[String],
) -> Result<DynRegSelection> {
    use rayon::prelude::*;

    if candidate_covariates.len() > 6 {
        return Err(Error::Config(format!(
            "at most 6 candidate covariates supported, got {}",
            candidate_covariates.len()
        )));
    }
    let y = frame.column(target)?.to_vec();
    let all_cols: Vec<(String, Vec<f64>)> = candidate_covariates
        .iter()
        .map(|c| frame.column(c).map(|v| (c.clone(), v.to_vec())))
        .collect::<Result<_>>()?;

    let n_subsets = 1usize << candidate_covariates.len();
    let subset_results: Vec<(Vec<LeaderboardEntry>, Option<DynRegFit>, Option<String>)> =
        (0..n_subsets)
            .into_par_iter()
            .map(|mask| {
                let x_cols: Vec<(String, Vec<f64>)> = all_cols
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, c)| c.clone())
                    .collect();
                let d = choose_d(&y, &x_cols);
                stepwise_order_search(&y, &x_cols, d)
            })
            .collect();

    let mut leaderboard = Vec::new();
    let mut best: Option<DynRegFit> = None;
    let mut last_error = String::from("no fits attempted");
    for (entries, fit, err) in subset_results {
        leaderboard.extend(entries);
        if let Some(e) = err {
            last_error = e;
        }
        if let Some(f) = fit {
            let replace = match &best {
                None => true,
                Some(b) => {
                    f.aicc < b.aicc - 1e-9
                        || ((f.aicc - b.aicc).abs() <= 1e-9 && f.k_params() < b.k_params())
                }
            };
            if replace {
                best = Some(f);
            }
        }
    }
    leaderboard.sort_by(|a, b| a.aicc.partial_cmp(&b.aicc).expect("finite AICc"));

    match best {
        Some(best) => Ok(DynRegSelection { best, leaderboard }),
        None => Err(Error::AllCandidatesFailed(last_error)),
    }
}

/// Stepwise (p, q) search for one covariate subset. Returns the evaluated
/// leaderboard entries, the subset's best fit, and the last error seen.
fn stepwise_order_search(
    y: &[f64],
    x_cols: &[(String, Vec<f64>)],
    d: usize,
) -> (Vec<LeaderboardEntry>, Option<DynRegFit>, Option<String>) {
    use std::collections::HashMap;

    let mut cache: HashMap<(usize, usize), Option<DynRegFit>> = HashMap::new();
    let mut last_error: Option<String> = None;
    let mut entries = Vec::new();

    let try_order = |p: usize,
                         q: usize,
                         cache: &mut HashMap<(usize, usize), Option<DynRegFit>>,
                         entries: &mut Vec<LeaderboardEntry>,
                         last_error: &mut Option<String>|
     -> Option<DynRegFit> {
        if let Some(cached) = cache.get(&(p, q)) {
            return cached.clone();
        }
        let result = fit_from_columns(y, x_cols, ArimaOrder { p, d, q });
        let fit = match result {
            Ok(f) => {
                entries.push(LeaderboardEntry {
                    covariates: f.covariate_set.clone(),
                    order: f.order,
                    aicc: f.aicc,
                    log_likelihood: f.log_likelihood,
                    k_params: f.k_params(),
                });
                Some(f)
            }
            Err(e) => {
                *last_error = Some(e.to_string());
                None
            }
        };
        cache.insert((p, q), fit.clone());
        fit
    };

    // Seed at (2, d, 2), falling back to smaller orders if it fails.
    let mut current: Option<DynRegFit> = None;
    for &(p, q) in &[(2, 2), (1, 1), (0, 0)] {
        current = try_order(p, q, &mut cache, &mut entries, &mut last_error);
        if current.is_some() {
            break;
        }
    }
    let mut current = match current {
        Some(f) => f,
        None => return (entries, None, last_error),
    };

    loop {
        let (p, q) = (current.order.p, current.order.q);
        let mut moves: Vec<(usize, usize)> = Vec::new();
        let push = |pp: isize, qq: isize, moves: &mut Vec<(usize, usize)>| {
            if (0..=MAX_P as isize).contains(&pp) && (0..=MAX_Q as isize).contains(&qq) {
                moves.push((pp as usize, qq as usize));
            }
        };
        let (pi, qi) = (p as isize, q as isize);
        push(pi + 1, qi, &mut moves);
        push(pi - 1, qi, &mut moves);
        push(pi, qi + 1, &mut moves);
        push(pi, qi - 1, &mut moves);
        push(pi + 1, qi + 1, &mut moves);
        push(pi - 1, qi - 1, &mut moves);

        let mut improved = false;
        for (pp, qq) in moves {
            if let Some(fit) = try_order(pp, qq, &mut cache, &mut entries, &mut last_error) {
                let better = fit.aicc < current.aicc - 1e-9
                    || ((fit.aicc - current.aicc).abs() <= 1e-9
                        && fit.k_params() < current.k_params());
                if better {
                    current = fit;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (entries, Some(current), last_error)
}

/// JSON fit summary with the Ljung-Box diagnostic at the default lag count.
pub fn fit_summary_json(fit: &DynRegFit) -> serde_json::Value {
    let fitted_df = fit.order.p + fit.order.q;
    let h = default_ljung_box_lags(fit.residuals.len(), fitted_df);
    let lb = ljung_box(&fit.residuals, h, fitted_df).ok();
    json!({
        "order": { "p": fit.order.p, "d": fit.order.d, "q": fit.order.q },
        "covariates": fit.covariate_set,
        "intercept": fit.has_intercept.then(|| fit.beta[0]),
        "beta": fit.beta,
        "phi": fit.phi,
        "theta": fit.theta,
        "sigma2": fit.sigma2,
        "log_likelihood": fit.log_likelihood,
        "aicc": fit.aicc,
        "ljung_box": lb.map(|(q_stat, p_value)| json!({
            "q": q_stat,
            "lags": h,
            "df": h - fitted_df,
            "p_value": p_value,
        })),
    })
}
