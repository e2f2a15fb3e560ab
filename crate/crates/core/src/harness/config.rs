//! Flat key=value pipeline configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Raw input series are
//! declared as `input.<variable>.path/date_col/value_col/unit` groups.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::dataset::{CsvSchema, Unit};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::gam::BandKind;
use crate::harness::CvConfig;
use crate::lstm::LstmParams;

#[derive(Debug, Clone)]
pub struct SeriesInput {
    pub variable: String,
    pub path: PathBuf,
    pub date_col: String,
    pub value_col: String,
    pub unit: Unit,
}

impl SeriesInput {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            date_col: self.date_col.clone(),
            value_col: self.value_col.clone(),
            variable: self.variable.clone(),
            unit: self.unit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Raw per-variable CSVs to ingest (mutually exclusive with frame_csv
    /// and synthetic).
    pub inputs: Vec<SeriesInput>,
    /// Pre-aligned frame CSV to load directly.
    pub frame_csv: Option<PathBuf>,
    /// Generate the bundled synthetic dataset instead of reading files.
    pub synthetic: bool,
    pub synthetic_seed: u64,
    pub output_dir: PathBuf,
    pub target: String,
    pub covariates: Vec<String>,
    pub train_len: usize,
    pub window_len: usize,
    pub seed: u64,
    pub max_gap_days: u32,
    pub lstm_units: usize,
    pub lstm_epochs: usize,
    pub lstm_learning_rate: f64,
    pub lstm_lag_input: bool,
    pub forest_trees: usize,
    pub forest_mtry: Option<usize>,
    pub gam_band: BandKind,
    pub reselect_every_fold: bool,
    pub warm_start_lstm: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            frame_csv: None,
            synthetic: false,
            synthetic_seed: 42,
            output_dir: PathBuf::from("out"),
            target: "turbidity".to_string(),
            covariates: vec![
                "rainfall".to_string(),
                "level".to_string(),
                "temperature".to_string(),
                "solar".to_string(),
            ],
            train_len: 200,
            window_len: 30,
            seed: 42,
            max_gap_days: 2,
            lstm_units: 10,
            lstm_epochs: 50,
            // Full-batch training needs a larger step than the per-sample
            // default the LstmParams type carries.
            lstm_learning_rate: 0.03,
            lstm_lag_input: false,
            forest_trees: 500,
            forest_mtry: None,
            gam_band: BandKind::Prediction,
            reselect_every_fold: false,
            warm_start_lstm: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            kv.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_map(kv)
    }

    fn from_map(kv: BTreeMap<String, String>) -> Result<Self> {
        let mut config = PipelineConfig::default();

        // Collect input.<variable>.<field> groups first.
        let mut inputs: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (key, value) in &kv {
            if let Some(rest) = key.strip_prefix("input.") {
                let (variable, field) = rest.split_once('.').ok_or_else(|| {
                    Error::Config(format!("bad input key '{key}'"))
                })?;
                inputs
                    .entry(variable.to_string())
                    .or_default()
                    .insert(field.to_string(), value.clone());
            }
        }
        for (variable, fields) in inputs {
            let get = |f: &str| -> Result<&String> {
                fields
                    .get(f)
                    .ok_or_else(|| Error::Config(format!("input.{variable}.{f} missing")))
            };
            config.inputs.push(SeriesInput {
                variable: variable.clone(),
                path: PathBuf::from(get("path")?),
                date_col: fields.get("date_col").cloned().unwrap_or_else(|| "date".into()),
                value_col: fields.get("value_col").cloned().unwrap_or_else(|| "value".into()),
                unit: Unit::parse(fields.get("unit").map(String::as_str).unwrap_or("NTU"))?,
            });
        }

        let parse_usize = |key: &str, v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: expected integer, got '{v}'")))
        };
        let parse_f64 = |key: &str, v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: expected number, got '{v}'")))
        };
        let parse_bool = |key: &str, v: &str| -> Result<bool> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Config(format!("{key}: expected bool, got '{v}'"))),
            }
        };

        for (key, value) in &kv {
            match key.as_str() {
                k if k.starts_with("input.") => {}
                "frame_csv" => config.frame_csv = Some(PathBuf::from(value)),
                "synthetic" => config.synthetic = parse_bool(key, value)?,
                "synthetic_seed" => config.synthetic_seed = parse_usize(key, value)? as u64,
                "output_dir" => config.output_dir = PathBuf::from(value),
                "target" => config.target = value.clone(),
                "covariates" => {
                    config.covariates = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                }
                "train_len" => config.train_len = parse_usize(key, value)?,
                "window_len" => config.window_len = parse_usize(key, value)?,
                "seed" => config.seed = parse_usize(key, value)? as u64,
                "max_gap_days" => config.max_gap_days = parse_usize(key, value)? as u32,
                "lstm_units" => config.lstm_units = parse_usize(key, value)?,
                "lstm_epochs" => config.lstm_epochs = parse_usize(key, value)?,
                "lstm_learning_rate" => config.lstm_learning_rate = parse_f64(key, value)?,
                "lstm_lag_input" => config.lstm_lag_input = parse_bool(key, value)?,
                "forest_trees" => config.forest_trees = parse_usize(key, value)?,
                "forest_mtry" => config.forest_mtry = Some(parse_usize(key, value)?),
                "gam_band" => {
                    config.gam_band = match value.as_str() {
                        "prediction" => BandKind::Prediction,
                        "confidence" => BandKind::Confidence,
                        other => {
                            return Err(Error::Config(format!(
                                "gam_band: expected prediction|confidence, got '{other}'"
                            )))
                        }
                    }
                }
                "reselect_every_fold" => config.reselect_every_fold = parse_bool(key, value)?,
                "warm_start_lstm" => config.warm_start_lstm = parse_bool(key, value)?,
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        Ok(config)
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            target: self.target.clone(),
            covariates: self.covariates.clone(),
            train_len: self.train_len,
            reselect_every_fold: self.reselect_every_fold,
            warm_start_lstm: self.warm_start_lstm,
            lstm: LstmParams {
                units: self.lstm_units,
                epochs: self.lstm_epochs,
                learning_rate: self.lstm_learning_rate,
                include_lag_turbidity: self.lstm_lag_input,
                seed: self.seed,
                ..LstmParams::default()
            },
            gam_band: self.gam_band,
            seed: self.seed,
        }
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.forest_trees,
            mtry: self.forest_mtry,
            seed: self.seed,
            ..ForestParams::default()
        }
    }
}
