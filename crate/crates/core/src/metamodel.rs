//! Meta-model orchestration: label each fold with the sub-model of lowest
//! absolute error, join labels with turbidity-window features, train the
//! random-forest router on the chronological first 70%, and route test-fold
//! forecasts through it.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::forecast::ModelTag;
use crate::forest::{self, Forest, ForestParams};
use crate::harness::{summarize_errors, FoldRecord, MetricSummary};
use crate::tsfeat::{extract_feature_vector, FeatureVector};

/// Which model won a fold, with the full error triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaLabel {
    pub date: NaiveDate,
    pub label: ModelTag,
    /// Absolute errors (ARIMA, LSTM, GAM).
    pub errors: (f64, f64, f64),
}

/// Best model = argmin of absolute error; ties break in the declared tag
/// order ARIMA < LSTM < GAM.
pub fn label_best_model(
    date: NaiveDate,
    actual: f64,
    pred_arima: f64,
    pred_lstm: f64,
    pred_gam: f64,
) -> Result<MetaLabel> {
    for (name, v) in [
        ("actual", actual),
        ("ARIMA prediction", pred_arima),
        ("LSTM prediction", pred_lstm),
        ("GAM prediction", pred_gam),
    ] {
        if !v.is_finite() {
            let _ = name;
            return Err(Error::NonFinite("meta label input"));
        }
    }
    let errors = (
        (actual - pred_arima).abs(),
        (actual - pred_lstm).abs(),
        (actual - pred_gam).abs(),
    );
    let triple = [errors.0, errors.1, errors.2];
    let mut label = ModelTag::Arima;
    let mut best = triple[0];
    for tag in [ModelTag::Lstm, ModelTag::Gam] {
        let e = triple[tag.class_index()];
        if e < best {
            best = e;
            label = tag;
        }
    }
    Ok(MetaLabel { date, label, errors })
}

/// Feature/label rows in chronological order with a 70/30 split point.
#[derive(Debug, Clone)]
pub struct MetaDataset {
    pub rows: Vec<(FeatureVector, MetaLabel)>,
    /// First `split_index` rows train the classifier; the rest test it.
    pub split_index: usize,
}

impl MetaDataset {
    pub fn train_rows(&self) -> &[(FeatureVector, MetaLabel)] {
        &self.rows[..self.split_index]
    }

    pub fn test_rows(&self) -> &[(FeatureVector, MetaLabel)] {
        &self.rows[self.split_index..]
    }

    pub fn label_distribution(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        for (_, label) in &self.rows {
            counts[label.label.class_index()] += 1;
        }
        let n = self.rows.len() as f64;
        [counts[0] as f64 / n, counts[1] as f64 / n, counts[2] as f64 / n]
    }
}

/// Minimum fold count for a usable meta dataset.
const MIN_FOLDS: usize = 40;

/// Join each fold's window features with its best-model label and split
/// chronologically, train = ceil(0.7 n).
///
/// `turbidity` and `dates` are the full frame's target column; each fold's
/// 30-day window ends the day before its test date.
pub fn build_meta_dataset(
    fold_records: &[FoldRecord],
    turbidity: &[f64],
    dates: &[NaiveDate],
    window_len: usize,
) -> Result<MetaDataset> {
    if fold_records.len() < MIN_FOLDS {
        return Err(Error::TooFewFolds {
            needed: MIN_FOLDS,
            got: fold_records.len(),
        });
    }
    let mut sorted: Vec<&FoldRecord> = fold_records.iter().collect();
    sorted.sort_by_key(|r| r.test_date);

    let mut rows = Vec::with_capacity(sorted.len());
    for record in sorted {
        if record.test_row < window_len {
            return Err(Error::InsufficientData {
                needed: window_len,
                got: record.test_row,
            });
        }
        let features = extract_feature_vector(turbidity, dates, record.test_row, window_len)?;
        let label = label_best_model(
            record.test_date,
            record.actual,
            record.arima.forecast.mean,
            record.lstm.forecast.mean,
            record.gam.forecast.mean,
        )?;
        rows.push((features, label));
    }

    let split_index = (0.7 * rows.len() as f64).ceil() as usize;
    Ok(MetaDataset { rows, split_index })
}

/// A trained router with its bookkeeping.
#[derive(Debug)]
pub struct MetaModelFit {
    pub forest: Forest,
    pub train_accuracy: f64,
    pub oob_accuracy: Option<f64>,
    pub test_accuracy: f64,
    /// confusion[actual][predicted] over test rows.
    pub confusion: [[usize; 3]; 3],
}

/// Fit the random-forest router on the training split.
pub fn train_meta(dataset: &MetaDataset, params: &ForestParams) -> Result<MetaModelFit> {
    let train = dataset.train_rows();
    let x: Vec<Vec<f64>> = train.iter().map(|(f, _)| f.values().to_vec()).collect();
    let y: Vec<usize> = train.iter().map(|(_, l)| l.label.class_index()).collect();
    let distinct = {
        let mut seen = [false; 3];
        for &c in &y {
            seen[c] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::SingleClass);
    }

    let forest = forest::fit_forest(&x, &y, 3, params)?;

    let accuracy_on = |rows: &[(FeatureVector, MetaLabel)]| -> Result<f64> {
        let mut correct = 0usize;
        for (f, l) in rows {
            let (cls, _) = forest.predict_class(&f.values())?;
            if cls == l.label.class_index() {
                correct += 1;
            }
        }
        Ok(correct as f64 / rows.len() as f64)
    };
    let train_accuracy = accuracy_on(train)?;
    let test = dataset.test_rows();
    let test_accuracy = if test.is_empty() { f64::NAN } else { accuracy_on(test)? };

    let mut confusion = [[0usize; 3]; 3];
    for (f, l) in test {
        let (cls, _) = forest.predict_class(&f.values())?;
        confusion[l.label.class_index()][cls] += 1;
    }

    Ok(MetaModelFit {
        oob_accuracy: forest.oob_accuracy,
        forest,
        train_accuracy,
        test_accuracy,
        confusion,
    })
}

/// One routed forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedStep {
    pub date: NaiveDate,
    pub chosen: ModelTag,
    pub forecast_mean: f64,
    pub actual: f64,
    pub abs_error: f64,
}

/// Routed forecasts plus their metric summary.
#[derive(Debug, Clone)]
pub struct RoutedForecasts {
    pub steps: Vec<RoutedStep>,
    pub metrics: MetricSummary,
}

fn route(records: &[FoldRecord], choose: impl Fn(&FoldRecord) -> Result<ModelTag>) -> Result<RoutedForecasts> {
    let mut steps = Vec::with_capacity(records.len());
    let mut signed = Vec::with_capacity(records.len());
    for r in records {
        let tag = choose(r)?;
        let mean = r.outcome(tag).forecast.mean;
        signed.push(r.actual - mean);
        steps.push(RoutedStep {
            date: r.test_date,
            chosen: tag,
            forecast_mean: mean,
            actual: r.actual,
            abs_error: (r.actual - mean).abs(),
        });
    }
    Ok(RoutedForecasts {
        metrics: summarize_errors(&signed, None),
        steps,
    })
}

/// Route each test fold through the classifier's chosen sub-model.
///
/// Records and feature vectors must align one-to-one by date.
pub fn meta_forecast(
    fit: &MetaModelFit,
    records: &[FoldRecord],
    features: &[FeatureVector],
) -> Result<RoutedForecasts> {
    if records.len() != features.len() {
        return Err(Error::DimensionMismatch {
            expected: records.len(),
            got: features.len(),
        });
    }
    for (r, f) in records.iter().zip(features) {
        let expected_end = r.test_date.pred_opt().expect("date arithmetic");
        if f.window_end != expected_end {
            return Err(Error::DateMisalignment(r.test_date));
        }
    }
    let lookup: std::collections::HashMap<NaiveDate, &FeatureVector> =
        features.iter().map(|f| (f.window_end, f)).collect();
    route(records, |r| {
        let f = lookup
            .get(&r.test_date.pred_opt().expect("date arithmetic"))
            .ok_or(Error::DateMisalignment(r.test_date))?;
        let (cls, _) = fit.forest.predict_class(&f.values())?;
        Ok(ModelTag::from_class_index(cls).expect("class in range"))
    })
}

/// Route with perfect hindsight: each fold uses its true best model.
pub fn oracle_forecast(records: &[FoldRecord]) -> Result<RoutedForecasts> {
    route(records, |r| {
        Ok(label_best_model(
            r.test_date,
            r.actual,
            r.arima.forecast.mean,
            r.lstm.forecast.mean,
            r.gam.forecast.mean,
        )?
        .label)
    })
}

/// Route every fold through one fixed sub-model.
pub fn constant_forecast(records: &[FoldRecord], tag: ModelTag) -> Result<RoutedForecasts> {
    route(records, |_| Ok(tag))
}

/// Meta run report: label distribution, test-split confusion matrix, routed
/// metrics against per-model and oracle metrics.
pub fn meta_report_json(
    dataset: &MetaDataset,
    fit: &MetaModelFit,
    routed: &RoutedForecasts,
    per_model_test: &[(ModelTag, MetricSummary)],
    oracle: &RoutedForecasts,
) -> serde_json::Value {
    let dist = dataset.label_distribution();
    json!({
        "rows": dataset.rows.len(),
        "train_rows": dataset.split_index,
        "test_rows": dataset.rows.len() - dataset.split_index,
        "label_distribution": {
            "ARIMA": dist[0],
            "LSTM": dist[1],
            "GAM": dist[2],
        },
        "classifier": {
            "forest_params": {
                "n_trees": fit.forest.params.n_trees,
                "mtry": fit.forest.params.mtry.unwrap_or_else(|| {
                    (fit.forest.n_features as f64).sqrt().floor() as usize
                }),
                "min_leaf": fit.forest.params.min_leaf,
                "max_depth": fit.forest.params.max_depth,
                "bootstrap": fit.forest.params.bootstrap,
                "seed": fit.forest.params.seed,
            },
            "train_accuracy": fit.train_accuracy,
            "oob_accuracy": fit.oob_accuracy,
            "test_accuracy": fit.test_accuracy,
            "confusion_rows_are_actual": ["ARIMA", "LSTM", "GAM"],
            "confusion": fit.confusion,
            "feature_importance": FeatureVector::NAMES
                .iter()
                .zip(fit.forest.normalized_importance())
                .map(|(n, v)| json!({ "feature": n, "importance": v }))
                .collect::<Vec<_>>(),
        },
        "routed_test_metrics": metric_json(&routed.metrics),
        "oracle_test_metrics": metric_json(&oracle.metrics),
        "per_model_test_metrics": per_model_test
            .iter()
            .map(|(tag, m)| json!({ "model": tag.as_str(), "metrics": metric_json(m) }))
            .collect::<Vec<_>>(),
        "notes": "per-model test metrics cover exactly the chronological test rows the classifier is evaluated on",
    })
}

fn metric_json(m: &MetricSummary) -> serde_json::Value {
    json!({
        "rmse": m.rmse,
        "mae": m.mae,
        "std_dev": m.std_dev,
        "error_range": [m.error_range.0, m.error_range.1],
        "ci_coverage": m.ci_coverage,
    })
}
