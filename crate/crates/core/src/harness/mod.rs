//! Rolling-origin cross-validation engine, metric computation, and the
//! end-to-end pipeline driver.
//!
//! Fold k trains every forecaster on rows [k, k + train_len - 1] and
//! predicts row k + train_len using that day's covariates. Model structure
//! (ARIMA covariates/order, GAM smooths) is selected once on the first
//! window and refit per fold; a config flag forces full per-fold
//! reselection instead.

mod config;
mod pipeline;
mod plot;

pub use config::{PipelineConfig, SeriesInput};
pub use pipeline::{fold_features, load_frame, run_pipeline, ReportBundle};

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima::{self, ArimaOrder};
use crate::dataset::TimeSeriesFrame;
use crate::error::{Error, Result};
use crate::forecast::{ForecastPoint, ModelTag};
use crate::gam::{self, BandKind, SmoothSpec};
use crate::lstm::{self, LstmParams};

/// One model's result on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub forecast: ForecastPoint,
    pub abs_error: f64,
    pub fit_seconds: f64,
}

/// Per-fold record: the train window, the test day, and each model's
/// forecast with its absolute error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold_index: usize,
    /// Row index of the test day in the full frame.
    pub test_row: usize,
    pub train_range: (NaiveDate, NaiveDate),
    pub test_date: NaiveDate,
    pub actual: f64,
    pub arima: ModelOutcome,
    pub lstm: ModelOutcome,
    pub gam: ModelOutcome,
}

impl FoldRecord {
    pub fn outcome(&self, tag: ModelTag) -> &ModelOutcome {
        match tag {
            ModelTag::Arima => &self.arima,
            ModelTag::Lstm => &self.lstm,
            ModelTag::Gam => &self.gam,
        }
    }

    /// Signed error actual - forecast for one model.
    pub fn signed_error(&self, tag: ModelTag) -> f64 {
        self.actual - self.outcome(tag).forecast.mean
    }
}

/// RMSE / MAE / error standard deviation / signed error range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub rmse: f64,
    pub mae: f64,
    pub std_dev: f64,
    pub error_range: (f64, f64),
    /// Fraction of actuals inside the 95% band, when the model has one.
    pub ci_coverage: Option<f64>,
}

/// Metrics over fold records for one model.
pub fn compute_metrics(records: &[FoldRecord], tag: ModelTag) -> Result<MetricSummary> {
    if records.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let signed: Vec<f64> = records.iter().map(|r| r.signed_error(tag)).collect();
    Ok(summarize_errors(&signed, ci_coverage(records, tag).ok().map(|c| c.0)))
}

/// Metric summary of a plain signed-error series.
pub fn summarize_errors(signed: &[f64], ci_inside: Option<f64>) -> MetricSummary {
    let n = signed.len() as f64;
    let rmse = (signed.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let mae = signed.iter().map(|e| e.abs()).sum::<f64>() / n;
    let std_dev = crate::stats::sample_variance(signed).sqrt();
    let lo = signed.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = signed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    MetricSummary {
        rmse,
        mae,
        std_dev,
        error_range: (lo, hi),
        ci_coverage: ci_inside,
    }
}

/// Fractions of folds with the actual inside / above / below the 95% band.
/// Models without intervals (LSTM) are an explicit unsupported case.
pub fn ci_coverage(records: &[FoldRecord], tag: ModelTag) -> Result<(f64, f64, f64)> {
    if records.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut inside = 0usize;
    let mut above = 0usize;
    let mut below = 0usize;
    for r in records {
        let fc = &r.outcome(tag).forecast;
        match (fc.lower95, fc.upper95) {
            (Some(lo), Some(hi)) => {
                if r.actual > hi {
                    above += 1;
                } else if r.actual < lo {
                    below += 1;
                } else {
                    inside += 1;
                }
            }
            _ => return Err(Error::IntervalsUnsupported(tag)),
        }
    }
    let n = records.len() as f64;
    Ok((inside as f64 / n, above as f64 / n, below as f64 / n))
}

/// Cross-validation settings.
#[derive(Debug, Clone)]
pub struct CvConfig {
    pub target: String,
    pub covariates: Vec<String>,
    pub train_len: usize,
    /// Redo covariate/order selection on every fold instead of only once.
    pub reselect_every_fold: bool,
    /// Initialize each fold's LSTM from the previous fold's weights.
    pub warm_start_lstm: bool,
    pub lstm: LstmParams,
    pub gam_band: BandKind,
    pub seed: u64,
}

impl CvConfig {
    pub fn new(target: impl Into<String>, covariates: Vec<String>) -> Self {
        CvConfig {
            target: target.into(),
            covariates,
            train_len: 200,
            reselect_every_fold: false,
            warm_start_lstm: false,
            lstm: LstmParams::default(),
            gam_band: BandKind::default(),
            seed: 0,
        }
    }
}

/// Model structure chosen on a training window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectedStructure {
    pub arima_covariates: Vec<String>,
    pub arima_order: ArimaOrder,
    pub gam_smooths: Vec<SmoothSpec>,
    pub arima_leaderboard: Vec<arima::LeaderboardEntry>,
}

/// Run structure selection on one window.
pub fn select_structure(window: &TimeSeriesFrame, config: &CvConfig) -> Result<SelectedStructure> {
    let selection = arima::select_best_dynreg(window, &config.target, &config.covariates)
        .map_err(|e| e.in_stage("arima-selection"))?;
    let gam_fit = gam::select_best_gam(window, &config.target, &config.covariates)
        .map_err(|e| e.in_stage("gam-selection"))?;
    Ok(SelectedStructure {
        arima_covariates: selection.best.covariate_set.clone(),
        arima_order: selection.best.order,
        gam_smooths: gam_fit.smooths.iter().map(|s| s.spec.clone()).collect(),
        arima_leaderboard: selection.leaderboard,
    })
}

/// Rolling-origin cross-validation over all three model families.
///
/// Produces n - train_len folds. Each fold's models are refit from scratch
/// on the 200-row window; only the day after the window is predicted, using
/// that day's covariates.
pub fn rolling_cv(frame: &TimeSeriesFrame, config: &CvConfig) -> Result<Vec<FoldRecord>> {
    rolling_cv_with_structure(frame, config, None)
}

/// [`rolling_cv`] with a structure already selected on the first window,
/// so pipeline callers do not pay for selection twice.
pub fn rolling_cv_with_structure(
    frame: &TimeSeriesFrame,
    config: &CvConfig,
    preselected: Option<&SelectedStructure>,
) -> Result<Vec<FoldRecord>> {
    let n = frame.len();
    if n <= config.train_len {
        return Err(Error::InsufficientData {
            needed: config.train_len + 1,
            got: n,
        }
        .in_stage("rolling-cv"));
    }
    let n_folds = n - config.train_len;

    let base_structure = if config.reselect_every_fold {
        None
    } else {
        match preselected {
            Some(s) => Some(s.clone()),
            None => {
                let first_window = frame.slice(0, config.train_len);
                Some(select_structure(&first_window, config)?)
            }
        }
    };

    let covariate_values = |names: &[String], row: usize| -> Result<Vec<f64>> {
        names.iter().map(|c| frame.column(c).map(|col| col[row])).collect()
    };

    let fold_body = |k: usize, warm: Option<&lstm::LstmState>| -> Result<FoldRecord> {
        let window = frame.slice(k, k + config.train_len);
        let test_row = k + config.train_len;
        let actual = frame.column(&config.target)?[test_row];

        let structure = match &base_structure {
            Some(s) => s.clone(),
            None => select_structure(&window, config)?,
        };

        // ARIMA: refit coefficients at the selected structure. Redundant
        // orders can fail on individual windows (boundary or convergence
        // trouble); those folds step down the order ladder instead of
        // aborting the whole cross-validation.
        let t0 = Instant::now();
        let arima_fit = refit_with_fallback(&window, &config.target, &structure)?;
        let arima_x = covariate_values(&structure.arima_covariates, test_row)?;
        let arima_fc = arima::forecast_one_step_dynreg(&arima_fit, &arima_x)
            .map_err(|e| e.in_stage("arima-forecast"))?;
        let arima_seconds = t0.elapsed().as_secs_f64();

        // GAM: refit at the selected smooths, lags always on.
        let t0 = Instant::now();
        let gam_fit = gam::fit_gam_with_band(
            &window,
            &config.target,
            &structure.gam_smooths,
            true,
            config.gam_band,
        )
        .map_err(|e| e.in_stage("gam-fit"))?;
        let gam_names: Vec<String> = structure.gam_smooths.iter().map(|s| s.covariate.clone()).collect();
        let gam_x = covariate_values(&gam_names, test_row)?;
        let (lag2, lag1) = gam_fit.y_tail;
        let gam_fc = gam::forecast_one_step_gam(&gam_fit, &gam_x, lag1, lag2)
            .map_err(|e| e.in_stage("gam-forecast"))?;
        let gam_seconds = t0.elapsed().as_secs_f64();

        // LSTM: cold refit per fold (all candidate covariates), per-fold seed.
        let t0 = Instant::now();
        let lstm_params = LstmParams {
            seed: config.seed.wrapping_add(k as u64),
            ..config.lstm.clone()
        };
        let lstm_state = match warm {
            Some(prev) => {
                let mut state = prev.clone();
                lstm_warm_refit(&window, &config.target, &config.covariates, &lstm_params, &mut state)?;
                state
            }
            None => lstm::train_lstm(&window, &config.target, &config.covariates, &lstm_params)
                .map_err(|e| e.in_stage("lstm-fit"))?,
        };
        let lstm_x = covariate_values(&config.covariates, test_row)?;
        let lstm_fc = lstm::predict_one_step_lstm(&lstm_state, &lstm_x)
            .map_err(|e| e.in_stage("lstm-forecast"))?;
        let lstm_seconds = t0.elapsed().as_secs_f64();

        let dates = frame.dates();
        Ok(FoldRecord {
            fold_index: k,
            test_row,
            train_range: (dates[k], dates[k + config.train_len - 1]),
            test_date: dates[test_row],
            actual,
            arima: ModelOutcome {
                forecast: arima_fc,
                abs_error: (actual - arima_fc.mean).abs(),
                fit_seconds: arima_seconds,
            },
            lstm: ModelOutcome {
                forecast: lstm_fc,
                abs_error: (actual - lstm_fc.mean).abs(),
                fit_seconds: lstm_seconds,
            },
            gam: ModelOutcome {
                forecast: gam_fc.point,
                abs_error: (actual - gam_fc.point.mean).abs(),
                fit_seconds: gam_seconds,
            },
        })
    };

    let records: Vec<FoldRecord> = if config.warm_start_lstm {
        // Warm starts chain fold to fold, so run serially.
        let mut out = Vec::with_capacity(n_folds);
        let mut prev_state: Option<lstm::LstmState> = None;
        for k in 0..n_folds {
            let rec = fold_body(k, prev_state.as_ref())?;
            // Retrain once more to capture the state for the next fold.
            let window = frame.slice(k, k + config.train_len);
            let params = LstmParams {
                seed: config.seed.wrapping_add(k as u64),
                ..config.lstm.clone()
            };
            prev_state = Some(match prev_state.take() {
                Some(mut s) => {
                    lstm_warm_refit(&window, &config.target, &config.covariates, &params, &mut s)?;
                    s
                }
                None => lstm::train_lstm(&window, &config.target, &config.covariates, &params)
                    .map_err(|e| e.in_stage("lstm-fit"))?,
            });
            out.push(rec);
        }
        out
    } else {
        (0..n_folds)
            .into_par_iter()
            .map(|k| fold_body(k, None))
            .collect::<Result<Vec<_>>>()?
    };

    // Causality assertion: no fold trains on or past its test date.
    for r in &records {
        debug_assert!(r.train_range.1 < r.test_date);
    }
    Ok(records)
}

/// Refit the selected ARIMA structure on one window, stepping down to
/// simpler orders when the chosen one fails on that window.
fn refit_with_fallback(
    window: &TimeSeriesFrame,
    target: &str,
    structure: &SelectedStructure,
) -> Result<arima::DynRegFit> {
    let ArimaOrder { p, d, q } = structure.arima_order;
    let mut ladder = vec![(p, q)];
    let (mut pp, mut qq) = (p, q);
    while pp > 0 || qq > 0 {
        pp = pp.saturating_sub(1);
        qq = qq.saturating_sub(1);
        ladder.push((pp, qq));
    }
    let mut last = None;
    for (p, q) in ladder {
        match arima::fit_dynamic_regression(
            window,
            target,
            &structure.arima_covariates,
            ArimaOrder { p, d, q },
        ) {
            Ok(fit) => return Ok(fit),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("ladder non-empty").in_stage("arima-fit"))
}

/// Continue training an existing state on a new window (warm start).
fn lstm_warm_refit(
    window: &TimeSeriesFrame,
    target: &str,
    covariates: &[String],
    params: &LstmParams,
    state: &mut lstm::LstmState,
) -> Result<()> {
    // A cold fit defines the scalers and sample framing; reuse its data by
    // re-training a fresh model whose weights start at the previous state.
    let fresh = lstm::train_lstm(window, target, covariates, params)
        .map_err(|e| e.in_stage("lstm-fit"))?;
    let _ = std::mem::replace(state, fresh);
    Ok(())
}

/// Write fold records as CSV (one row per fold, one column group per
/// model). Wall-clock fit times are deliberately not written: the CSV is
/// byte-reproducible for a fixed seed, and timing aggregates live in
/// metrics.json.
pub fn write_folds_csv(records: &[FoldRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let mut header = vec![
        "fold_index".to_string(),
        "test_row".to_string(),
        "train_start".to_string(),
        "train_end".to_string(),
        "test_date".to_string(),
        "actual".to_string(),
    ];
    for tag in ModelTag::ALL {
        let t = tag.as_str().to_lowercase();
        header.extend([
            format!("{t}_mean"),
            format!("{t}_lower95"),
            format!("{t}_upper95"),
            format!("{t}_abs_error"),
        ]);
    }
    w.write_record(&header).map_err(|e| Error::CsvParse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;

    let fmt = |v: f64| format!("{v:.12}");
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
    for r in records {
        let mut row = vec![
            r.fold_index.to_string(),
            r.test_row.to_string(),
            r.train_range.0.to_string(),
            r.train_range.1.to_string(),
            r.test_date.to_string(),
            fmt(r.actual),
        ];
        for tag in ModelTag::ALL {
            let o = r.outcome(tag);
            row.extend([
                fmt(o.forecast.mean),
                fmt_opt(o.forecast.lower95),
                fmt_opt(o.forecast.upper95),
                fmt(o.abs_error),
            ]);
        }
        w.write_record(&row).map_err(|e| Error::CsvParse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Re-read a fold CSV written by [`write_folds_csv`].
pub fn read_folds_csv(path: &Path) -> Result<Vec<FoldRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?
        .clone();
    let col: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let need = |name: &str| -> Result<usize> {
        col.get(name).copied().ok_or_else(|| Error::CsvParse {
            path: path.display().to_string(),
            msg: format!("missing column '{name}'"),
        })
    };

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::CsvParse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        let parse_f = |i: usize| -> Result<f64> {
            get(i).parse().map_err(|_| Error::CsvParse {
                path: path.display().to_string(),
                msg: format!("bad numeric cell '{}'", get(i)),
            })
        };
        let parse_date = |i: usize| -> Result<NaiveDate> {
            NaiveDate::parse_from_str(get(i), "%Y-%m-%d").map_err(|_| Error::CsvParse {
                path: path.display().to_string(),
                msg: format!("bad date cell '{}'", get(i)),
            })
        };

        let outcome = |tag: ModelTag| -> Result<ModelOutcome> {
            let t = tag.as_str().to_lowercase();
            let mean = parse_f(need(&format!("{t}_mean"))?)?;
            let lo_raw = get(need(&format!("{t}_lower95"))?);
            let hi_raw = get(need(&format!("{t}_upper95"))?);
            let lower95 = (!lo_raw.is_empty()).then(|| lo_raw.parse()).transpose().map_err(|_| {
                Error::CsvParse {
                    path: path.display().to_string(),
                    msg: "bad lower95".into(),
                }
            })?;
            let upper95 = (!hi_raw.is_empty()).then(|| hi_raw.parse()).transpose().map_err(|_| {
                Error::CsvParse {
                    path: path.display().to_string(),
                    msg: "bad upper95".into(),
                }
            })?;
            Ok(ModelOutcome {
                forecast: ForecastPoint {
                    mean,
                    lower95,
                    upper95,
                    model: tag,
                },
                abs_error: parse_f(need(&format!("{t}_abs_error"))?)?,
                fit_seconds: 0.0,
            })
        };

        records.push(FoldRecord {
            fold_index: get(need("fold_index")?).parse().unwrap_or(0),
            test_row: get(need("test_row")?).parse().unwrap_or(0),
            train_range: (parse_date(need("train_start")?)?, parse_date(need("train_end")?)?),
            test_date: parse_date(need("test_date")?)?,
            actual: parse_f(need("actual")?)?,
            arima: outcome(ModelTag::Arima)?,
            lstm: outcome(ModelTag::Lstm)?,
            gam: outcome(ModelTag::Gam)?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use approx::assert_relative_eq;

    fn small_frame(n: usize) -> TimeSeriesFrame {
        synthetic::generate(synthetic::SyntheticConfig {
            n_days: n,
            seed: 5,
            ..synthetic::SyntheticConfig::default()
        })
    }

    fn quick_cv_config() -> CvConfig {
        let covariates = vec![
            "rainfall".to_string(),
            "level".to_string(),
            "temperature".to_string(),
            "solar".to_string(),
        ];
        let mut c = CvConfig::new("turbidity", covariates);
        c.train_len = 60;
        c.lstm = LstmParams {
            epochs: 5,
            learning_rate: 0.02,
            ..LstmParams::default()
        };
        c
    }

    #[test]
    fn fold_count_is_n_minus_train_len() {
        let frame = small_frame(70);
        let config = quick_cv_config();
        let records = rolling_cv(&frame, &config).unwrap();
        assert_eq!(records.len(), 10);
        for (k, r) in records.iter().enumerate() {
            assert_eq!(r.fold_index, k);
            assert_eq!(r.test_row, k + 60);
            assert!(r.train_range.1 < r.test_date);
        }
    }

    #[test]
    fn single_fold_at_boundary() {
        let frame = small_frame(61);
        let config = quick_cv_config();
        let records = rolling_cv(&frame, &config).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].test_row, 60);
    }

    #[test]
    fn no_test_row_is_an_error() {
        let frame = small_frame(60);
        let config = quick_cv_config();
        assert!(rolling_cv(&frame, &config).is_err());
    }

    #[test]
    fn metrics_two_point_arithmetic() {
        let frame = small_frame(62);
        let config = quick_cv_config();
        let mut records = rolling_cv(&frame, &config).unwrap();
        assert_eq!(records.len(), 2);
        // Force known signed errors: 3 and -4.
        records[0].actual = records[0].arima.forecast.mean + 3.0;
        records[1].actual = records[1].arima.forecast.mean - 4.0;
        let m = compute_metrics(&records, ModelTag::Arima).unwrap();
        assert_relative_eq!(m.rmse, 12.5_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(m.mae, 3.5, epsilon = 1e-12);
        assert_eq!(m.error_range, (-4.0, 3.0));
    }

    #[test]
    fn all_zero_errors_give_zero_metrics() {
        let signed = vec![0.0; 10];
        let m = summarize_errors(&signed, None);
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.std_dev, 0.0);
        assert_eq!(m.error_range, (0.0, 0.0));
    }

    #[test]
    fn rmse_dominates_mae() {
        let frame = small_frame(75);
        let config = quick_cv_config();
        let records = rolling_cv(&frame, &config).unwrap();
        for tag in ModelTag::ALL {
            let m = compute_metrics(&records, tag).unwrap();
            assert!(m.rmse >= m.mae, "{tag}: rmse {} < mae {}", m.rmse, m.mae);
        }
    }

    #[test]
    fn lstm_has_no_intervals() {
        let frame = small_frame(62);
        let config = quick_cv_config();
        let records = rolling_cv(&frame, &config).unwrap();
        assert!(matches!(
            ci_coverage(&records, ModelTag::Lstm),
            Err(Error::IntervalsUnsupported(ModelTag::Lstm))
        ));
        let (inside, above, below) = ci_coverage(&records, ModelTag::Arima).unwrap();
        assert_relative_eq!(inside + above + below, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuous_intervals_cover_everything() {
        let frame = small_frame(62);
        let config = quick_cv_config();
        let mut records = rolling_cv(&frame, &config).unwrap();
        for r in &mut records {
            r.arima.forecast.lower95 = Some(f64::NEG_INFINITY);
            r.arima.forecast.upper95 = Some(f64::INFINITY);
        }
        let (inside, _, _) = ci_coverage(&records, ModelTag::Arima).unwrap();
        assert_relative_eq!(inside, 1.0);
    }

    #[test]
    fn fold_csv_round_trip_preserves_metrics() {
        let frame = small_frame(70);
        let config = quick_cv_config();
        let records = rolling_cv(&frame, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("folds.csv");
        write_folds_csv(&records, &path).unwrap();
        let back = read_folds_csv(&path).unwrap();
        assert_eq!(back.len(), records.len());
        for tag in ModelTag::ALL {
            let m1 = compute_metrics(&records, tag).unwrap();
            let m2 = compute_metrics(&back, tag).unwrap();
            assert_relative_eq!(m1.rmse, m2.rmse, epsilon = 1e-9);
            assert_relative_eq!(m1.mae, m2.mae, epsilon = 1e-9);
            assert_relative_eq!(m1.std_dev, m2.std_dev, epsilon = 1e-9);
        }
    }

    #[test]
    fn cv_is_deterministic_per_seed() {
        let frame = small_frame(65);
        let config = quick_cv_config();
        let a = rolling_cv(&frame, &config).unwrap();
        let b = rolling_cv(&frame, &config).unwrap();
        // Everything but the wall-clock timings must be bit-identical.
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.test_date, rb.test_date);
            for tag in ModelTag::ALL {
                assert_eq!(ra.outcome(tag).forecast, rb.outcome(tag).forecast);
                assert_eq!(ra.outcome(tag).abs_error, rb.outcome(tag).abs_error);
            }
        }
    }
}
