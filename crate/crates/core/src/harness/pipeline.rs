//! End-to-end driver: ingest or generate the frame, run the 3-model
//! rolling cross-validation, extract window features, train and evaluate
//! the meta-model, and write the report bundle (CSVs, JSON, SVG plots).

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::dataset::{aggregate_daily, align_frame, ingest_csv, GapPolicy, TimeSeriesFrame};
use crate::error::{Error, Result};
use crate::forecast::ModelTag;
use crate::harness::plot;
use crate::harness::{
    ci_coverage, compute_metrics, rolling_cv_with_structure, select_structure, write_folds_csv,
    FoldRecord, MetricSummary, PipelineConfig, SelectedStructure,
};
use crate::metamodel::{
    self, build_meta_dataset, constant_forecast, meta_report_json, oracle_forecast, train_meta,
    MetaDataset, MetaModelFit, RoutedForecasts,
};
use crate::synthetic::{self, SyntheticConfig};
use crate::tsfeat::{self, FeatureVector};

/// Everything the pipeline produced, in memory plus the files written.
pub struct ReportBundle {
    pub frame: TimeSeriesFrame,
    pub structure: Option<SelectedStructure>,
    pub records: Vec<FoldRecord>,
    pub overall_metrics: Vec<(ModelTag, MetricSummary)>,
    pub meta_dataset: MetaDataset,
    pub meta_fit: MetaModelFit,
    pub routed: RoutedForecasts,
    pub oracle: RoutedForecasts,
    pub per_model_test_metrics: Vec<(ModelTag, MetricSummary)>,
    pub written: Vec<PathBuf>,
}

/// Resolve the input frame per config: explicit frame CSV, the synthetic
/// generator, or raw-series ingestion.
pub fn load_frame(config: &PipelineConfig) -> Result<TimeSeriesFrame> {
    if let Some(path) = &config.frame_csv {
        return TimeSeriesFrame::read_csv(path).map_err(|e| e.in_stage("ingest"));
    }
    if config.synthetic {
        return Ok(synthetic::generate(SyntheticConfig {
            seed: config.synthetic_seed,
            ..SyntheticConfig::default()
        }));
    }
    if config.inputs.is_empty() {
        return Err(Error::Config(
            "no inputs: set frame_csv, synthetic = true, or input.<var>.* groups".into(),
        )
        .in_stage("ingest"));
    }
    let mut series = Vec::with_capacity(config.inputs.len());
    for input in &config.inputs {
        let raw = ingest_csv(&input.path, &input.schema()).map_err(|e| e.in_stage("ingest"))?;
        series.push(aggregate_daily(&raw));
    }
    let outcome = align_frame(
        &series,
        GapPolicy {
            max_interp_days: config.max_gap_days,
        },
    )
    .map_err(|e| e.in_stage("align"))?;
    Ok(outcome.frame)
}

/// Window features for every fold's test day, in fold order.
pub fn fold_features(
    frame: &TimeSeriesFrame,
    records: &[FoldRecord],
    window_len: usize,
    target: &str,
) -> Result<Vec<FeatureVector>> {
    let turbidity = frame.column(target)?;
    records
        .iter()
        .map(|r| tsfeat::extract_feature_vector(turbidity, frame.dates(), r.test_row, window_len))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("features"))
}

/// Run the full pipeline and write the report bundle into
/// `config.output_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<ReportBundle> {
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::Io {
        path: config.output_dir.display().to_string(),
        source: e,
    })?;
    let out = |name: &str| config.output_dir.join(name);
    let mut written = Vec::new();

    // Ingest.
    let frame = load_frame(config)?;
    frame.write_csv(&out("frame.csv"))?;
    written.push(out("frame.csv"));

    // Rolling cross-validation.
    let cv_config = config.cv_config();
    let structure = if config.reselect_every_fold {
        None
    } else {
        Some(select_structure(&frame.slice(0, config.train_len.min(frame.len())), &cv_config)?)
    };
    let records = rolling_cv_with_structure(&frame, &cv_config, structure.as_ref())?;
    write_folds_csv(&records, &out("folds.csv"))?;
    written.push(out("folds.csv"));

    let overall_metrics: Vec<(ModelTag, MetricSummary)> = ModelTag::ALL
        .iter()
        .map(|&tag| compute_metrics(&records, tag).map(|m| (tag, m)))
        .collect::<Result<_>>()?;

    let metrics_json = json!({
        "seed": config.seed,
        "train_len": config.train_len,
        "window_len": config.window_len,
        "n_folds": records.len(),
        "structure": structure.as_ref().map(|s| json!({
            "arima_covariates": s.arima_covariates,
            "arima_order": s.arima_order,
            "gam_smooths": s.gam_smooths,
        })),
        "models": overall_metrics.iter().map(|(tag, m)| json!({
            "model": tag.as_str(),
            "rmse": m.rmse,
            "mae": m.mae,
            "std_dev": m.std_dev,
            "error_range": [m.error_range.0, m.error_range.1],
            "ci_coverage": ci_coverage(&records, *tag).ok().map(|(i, a, b)| json!({
                "inside": i, "above": a, "below": b
            })),
            "total_fit_seconds": records.iter().map(|r| r.outcome(*tag).fit_seconds).sum::<f64>(),
        })).collect::<Vec<_>>(),
    });
    write_json(&out("metrics.json"), &metrics_json)?;
    written.push(out("metrics.json"));

    // Window features.
    let features = fold_features(&frame, &records, config.window_len, &config.target)?;
    tsfeat::write_features_csv(&features, &out("features.csv"))?;
    written.push(out("features.csv"));

    // Meta-model.
    let turbidity = frame.column(&config.target)?;
    let meta_dataset =
        build_meta_dataset(&records, turbidity, frame.dates(), config.window_len)
            .map_err(|e| e.in_stage("meta"))?;
    let meta_fit = train_meta(&meta_dataset, &config.forest_params())
        .map_err(|e| e.in_stage("meta"))?;

    let test_records: Vec<FoldRecord> = records[meta_dataset.split_index..].to_vec();
    let test_features: Vec<FeatureVector> = features[meta_dataset.split_index..].to_vec();
    let routed = metamodel::meta_forecast(&meta_fit, &test_records, &test_features)
        .map_err(|e| e.in_stage("meta"))?;
    let oracle = oracle_forecast(&test_records).map_err(|e| e.in_stage("meta"))?;
    let per_model_test_metrics: Vec<(ModelTag, MetricSummary)> = ModelTag::ALL
        .iter()
        .map(|&tag| constant_forecast(&test_records, tag).map(|r| (tag, r.metrics)))
        .collect::<Result<_>>()?;

    let report = meta_report_json(
        &meta_dataset,
        &meta_fit,
        &routed,
        &per_model_test_metrics,
        &oracle,
    );
    write_json(&out("meta_report.json"), &report)?;
    written.push(out("meta_report.json"));

    let importance_names: Vec<&str> = FeatureVector::NAMES.to_vec();
    meta_fit
        .forest
        .write_importance_csv(&importance_names, &out("feature_importance.csv"))?;
    written.push(out("feature_importance.csv"));

    // Training-loss curve of one representative LSTM (the first window).
    let first_window = frame.slice(0, config.train_len.min(frame.len()));
    let lstm_state = crate::lstm::train_lstm(
        &first_window,
        &config.target,
        &config.covariates,
        &cv_config.lstm,
    )
    .map_err(|e| e.in_stage("lstm-fit"))?;
    crate::lstm::write_epoch_losses_csv(&lstm_state, &out("lstm_loss.csv"))?;
    written.push(out("lstm_loss.csv"));

    // Plots.
    written.extend(write_plots(&config.output_dir, &records, &test_records, &routed)?);

    Ok(ReportBundle {
        frame,
        structure,
        records,
        overall_metrics,
        meta_dataset,
        meta_fit,
        routed,
        oracle,
        per_model_test_metrics,
        written,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value).expect("serializable") + "\n")
        .map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
}

const MODEL_COLORS: [(&str, &str); 3] = [
    ("ARIMA", "#c03030"),
    ("LSTM", "#2c8a43"),
    ("GAM", "#1f6fd0"),
];

fn write_plots(
    dir: &Path,
    records: &[FoldRecord],
    test_records: &[FoldRecord],
    routed: &RoutedForecasts,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let observed: Vec<f64> = records.iter().map(|r| r.actual).collect();

    for tag in ModelTag::ALL {
        let forecast: Vec<f64> = records.iter().map(|r| r.outcome(tag).forecast.mean).collect();
        let lo: Vec<f64> = records
            .iter()
            .map(|r| r.outcome(tag).forecast.lower95.unwrap_or(f64::NAN))
            .collect();
        let hi: Vec<f64> = records
            .iter()
            .map(|r| r.outcome(tag).forecast.upper95.unwrap_or(f64::NAN))
            .collect();
        let band = if lo.iter().all(|v| v.is_finite()) {
            Some((lo.as_slice(), hi.as_slice()))
        } else {
            None
        };
        let path = dir.join(format!("forecasts_{}.svg", tag.as_str().to_lowercase()));
        plot::forecast_chart(
            &path,
            &format!("{} one-step forecasts over {} folds", tag, records.len()),
            &observed,
            &forecast,
            band,
        )?;
        written.push(path);
    }

    // Meta-routed forecasts over the test split.
    let meta_observed: Vec<f64> = test_records.iter().map(|r| r.actual).collect();
    let meta_forecast: Vec<f64> = routed.steps.iter().map(|s| s.forecast_mean).collect();
    let path = dir.join("forecasts_meta.svg");
    plot::forecast_chart(
        &path,
        &format!("Meta-routed forecasts over {} test folds", test_records.len()),
        &meta_observed,
        &meta_forecast,
        None,
    )?;
    written.push(path);

    // Error density per model.
    let errors: Vec<Vec<f64>> = ModelTag::ALL
        .iter()
        .map(|&tag| records.iter().map(|r| r.signed_error(tag)).collect())
        .collect();
    let density: Vec<(&str, &[f64], &str)> = MODEL_COLORS
        .iter()
        .zip(&errors)
        .map(|(&(name, color), errs)| (name, errs.as_slice(), color))
        .collect();
    let path = dir.join("error_density.svg");
    plot::density_chart(&path, "Forecast error density", &density)?;
    written.push(path);

    // Observed vs predicted scatter.
    let predicted: Vec<Vec<f64>> = ModelTag::ALL
        .iter()
        .map(|&tag| records.iter().map(|r| r.outcome(tag).forecast.mean).collect())
        .collect();
    let scatter: Vec<(&str, &[f64], &[f64], &str)> = MODEL_COLORS
        .iter()
        .zip(&predicted)
        .map(|(&(name, color), pred)| (name, observed.as_slice(), pred.as_slice(), color))
        .collect();
    let path = dir.join("observed_vs_predicted.svg");
    plot::scatter_chart(&path, "Observed vs predicted turbidity", &scatter)?;
    written.push(path);

    Ok(written)
}
