//! Command-line driver for the turbidity forecasting pipeline.
//!
//! Stages can run separately (`ingest`, `cv`, `features`, `meta`) or end to
//! end (`report`). All stages read the same flat key=value config; failures
//! exit nonzero with a stage-tagged message.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use turbcast::harness::{
    self, ci_coverage, compute_metrics, load_frame, rolling_cv, run_pipeline, select_structure,
    write_folds_csv, PipelineConfig,
};
use turbcast::metamodel::{
    build_meta_dataset, constant_forecast, meta_forecast, meta_report_json, oracle_forecast,
    train_meta,
};
use turbcast::synthetic::{write_raw_csvs, SyntheticConfig};
use turbcast::tsfeat;
use turbcast::ModelTag;

#[derive(Parser)]
#[command(name = "turbcast", about = "One-step-ahead stream turbidity forecasting", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Flat key=value config file; omit to use built-in defaults with the
    /// bundled synthetic dataset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> anyhow::Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => PipelineConfig {
                synthetic: true,
                ..PipelineConfig::default()
            },
        };
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the bundled synthetic dataset's raw CSVs and a matching config.
    Synth {
        /// Directory for the raw CSV files.
        #[arg(long, default_value = "synth")]
        dir: PathBuf,
        /// Generator seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Ingest raw series, aggregate to daily, align, and write frame.csv.
    Ingest(ConfigArg),
    /// Run the 3-model rolling cross-validation; write folds.csv and
    /// metrics.json.
    Cv(ConfigArg),
    /// Extract turbidity window features for every fold; write features.csv.
    Features(ConfigArg),
    /// Train and evaluate the meta-model from folds.csv and features.csv;
    /// write meta_report.json.
    Meta(ConfigArg),
    /// Run the whole pipeline and write the full report bundle with plots.
    Report(ConfigArg),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth { dir, seed } => synth(&dir, seed),
        Command::Ingest(arg) => ingest(&arg.load()?),
        Command::Cv(arg) => cv(&arg.load()?),
        Command::Features(arg) => features(&arg.load()?),
        Command::Meta(arg) => meta(&arg.load()?),
        Command::Report(arg) => report(&arg.load()?),
    }
}

fn synth(dir: &std::path::Path, seed: u64) -> anyhow::Result<()> {
    let config = SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    };
    let frame = write_raw_csvs(&config, dir)?;
    let config_path = dir.join("pipeline.conf");
    let text = format!(
        "\
# turbcast pipeline configuration for the bundled synthetic dataset
output_dir = {dir}/out
seed = {seed}
train_len = 200
window_len = 30
lstm_learning_rate = 0.03

input.turbidity.path = {dir}/turbidity_hourly.csv
input.turbidity.date_col = datetime
input.turbidity.value_col = value
input.turbidity.unit = NTU

input.level.path = {dir}/level_hourly.csv
input.level.date_col = datetime
input.level.value_col = value
input.level.unit = m

input.rainfall.path = {dir}/rainfall_daily.csv
input.rainfall.unit = mm

input.temperature.path = {dir}/temperature_daily.csv
input.temperature.unit = degC

input.solar.path = {dir}/solar_daily.csv
input.solar.unit = MJ/m2
",
        dir = dir.display()
    );
    std::fs::write(&config_path, text)
        .with_context(|| format!("writing {}", config_path.display()))?;
    println!(
        "wrote {} raw days to {} and config {}",
        frame.len(),
        dir.display(),
        config_path.display()
    );
    Ok(())
}

fn ensure_output_dir(config: &PipelineConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))
}

fn ingest(config: &PipelineConfig) -> anyhow::Result<()> {
    ensure_output_dir(config)?;
    let frame = load_frame(config)?;
    let path = config.output_dir.join("frame.csv");
    frame.write_csv(&path)?;
    println!("wrote {} rows x {} variables to {}", frame.len(), frame.names().len(), path.display());
    Ok(())
}

fn cv(config: &PipelineConfig) -> anyhow::Result<()> {
    ensure_output_dir(config)?;
    let frame = load_frame(config)?;
    anyhow::ensure!(
        frame.len() > config.train_len,
        "[rolling-cv] frame has {} rows; train_len {} leaves no test day",
        frame.len(),
        config.train_len
    );
    let cv_config = config.cv_config();
    let structure = select_structure(&frame.slice(0, config.train_len.min(frame.len())), &cv_config)?;
    println!(
        "selected ARIMA{} on {:?}; GAM smooths {:?}",
        structure.arima_order,
        structure.arima_covariates,
        structure
            .gam_smooths
            .iter()
            .map(|s| format!("{}:{}", s.covariate, s.df))
            .collect::<Vec<_>>()
    );
    let records = rolling_cv(&frame, &cv_config)?;
    let path = config.output_dir.join("folds.csv");
    write_folds_csv(&records, &path)?;
    println!("{} folds -> {}", records.len(), path.display());
    for tag in ModelTag::ALL {
        let m = compute_metrics(&records, tag)?;
        let coverage = ci_coverage(&records, tag)
            .map(|(inside, _, _)| format!("{:.0}% in band", inside * 100.0))
            .unwrap_or_else(|_| "no intervals".to_string());
        println!(
            "  {:<5} rmse {:6.2}  mae {:6.2}  sd {:6.2}  range ({:.2}, {:.2})  {}",
            tag.as_str(),
            m.rmse,
            m.mae,
            m.std_dev,
            m.error_range.0,
            m.error_range.1,
            coverage
        );
    }
    Ok(())
}

fn features(config: &PipelineConfig) -> anyhow::Result<()> {
    ensure_output_dir(config)?;
    let frame = load_frame(config)?;
    let folds_path = config.output_dir.join("folds.csv");
    let records = harness::read_folds_csv(&folds_path)
        .with_context(|| format!("run `cv` first: missing {}", folds_path.display()))?;
    let features = harness::fold_features(&frame, &records, config.window_len, &config.target)?;
    let path = config.output_dir.join("features.csv");
    tsfeat::write_features_csv(&features, &path)?;
    println!("{} feature vectors -> {}", features.len(), path.display());
    Ok(())
}

fn meta(config: &PipelineConfig) -> anyhow::Result<()> {
    ensure_output_dir(config)?;
    let frame = load_frame(config)?;
    let folds_path = config.output_dir.join("folds.csv");
    let records = harness::read_folds_csv(&folds_path)
        .with_context(|| format!("run `cv` first: missing {}", folds_path.display()))?;
    let turbidity = frame.column(&config.target)?;
    let dataset = build_meta_dataset(&records, turbidity, frame.dates(), config.window_len)?;
    let fit = train_meta(&dataset, &config.forest_params())?;

    let test_records = records[dataset.split_index..].to_vec();
    let test_features: Vec<_> = dataset.test_rows().iter().map(|(f, _)| f.clone()).collect();
    let routed = meta_forecast(&fit, &test_records, &test_features)?;
    let oracle = oracle_forecast(&test_records)?;
    let per_model: Vec<_> = ModelTag::ALL
        .iter()
        .map(|&tag| constant_forecast(&test_records, tag).map(|r| (tag, r.metrics)))
        .collect::<turbcast::Result<_>>()?;

    let report = meta_report_json(&dataset, &fit, &routed, &per_model, &oracle);
    let path = config.output_dir.join("meta_report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "meta: {} train / {} test rows; routed test rmse {:.2} (oracle {:.2}) -> {}",
        dataset.split_index,
        dataset.rows.len() - dataset.split_index,
        routed.metrics.rmse,
        oracle.metrics.rmse,
        path.display()
    );
    Ok(())
}

fn report(config: &PipelineConfig) -> anyhow::Result<()> {
    let bundle = run_pipeline(config)?;
    println!(
        "pipeline complete: {} folds over {} days",
        bundle.records.len(),
        bundle.frame.len()
    );
    for (tag, m) in &bundle.overall_metrics {
        println!("  {:<5} rmse {:6.2}  mae {:6.2}", tag.as_str(), m.rmse, m.mae);
    }
    let dist = bundle.meta_dataset.label_distribution();
    println!(
        "  labels ARIMA {:.1}% / LSTM {:.1}% / GAM {:.1}%",
        dist[0] * 100.0,
        dist[1] * 100.0,
        dist[2] * 100.0
    );
    println!(
        "  test split: routed rmse {:.2}, oracle {:.2}, singles {}",
        bundle.routed.metrics.rmse,
        bundle.oracle.metrics.rmse,
        bundle
            .per_model_test_metrics
            .iter()
            .map(|(t, m)| format!("{} {:.2}", t.as_str(), m.rmse))
            .collect::<Vec<_>>()
            .join(", ")
    );
    for path in &bundle.written {
        println!("  wrote {}", path.display());
    }
    Ok(())
}
