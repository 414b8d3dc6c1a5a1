use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use chrono::Duration;

use super::plot::render_svg;
use super::RunConfig;
use crate::dataset::{fit_scaler, prepare_split, BLOCK_HOURS};
use crate::forecast::{evaluate_forecast, rolling_forecast_windowed, ForecastReport};
use crate::ingest::{
    extract_temperature_series, find_discontinuities, load_series, parse_meteoblue_csv, TemperatureSeries,
};
use crate::metrics::MetricSummary;
use crate::model::Model;
use crate::rnn::{train_with_progress, TrainReport};

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => out.write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn ingest(config: &RunConfig) -> anyhow::Result<TemperatureSeries> {
    let path = config.input()?;
    load_series(path).with_context(|| format!("ingest: {}", path.display()))
}

/// Prints record count, time range, continuity, and temperature range.
/// Fails if the file has any gap.
pub fn cmd_ingest(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    let path = config.input()?;
    let text = read_text(path)?;
    let (meta, records) = parse_meteoblue_csv(&text).with_context(|| format!("ingest: {}", path.display()))?;
    let gaps = find_discontinuities(&records);

    let first = records.first().and_then(|r| r.local_time()).expect("parser yields valid records");
    let last = records.last().and_then(|r| r.local_time()).expect("parser yields valid records");
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.temperature), hi.max(r.temperature)));

    writeln!(out, "file: {}", path.display())?;
    writeln!(
        out,
        "station: {} ({}, {}; {} m), UTC offset {:+}",
        meta.city, meta.latitude, meta.longitude, meta.altitude, meta.utc_offset
    )?;
    writeln!(out, "records: {}", records.len())?;
    writeln!(out, "first: {first} (local)")?;
    writeln!(out, "last: {last} (local)")?;
    writeln!(out, "temperature: min {lo} {unit}, max {hi} {unit}", unit = meta.unit)?;
    if gaps.is_empty() {
        writeln!(out, "gaps: none")?;
        // confirms the series is usable downstream
        extract_temperature_series(&records, &meta)?;
        Ok(())
    } else {
        writeln!(out, "gaps: {}", gaps.len())?;
        for gap in &gaps {
            writeln!(out, "  {gap}")?;
        }
        bail!("ingest: {} has {} discontinuities, first at index {}", path.display(), gaps.len(), gaps[0].index)
    }
}

/// Trains on the input's training split and saves the model.
pub fn cmd_train(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<(Model, TrainReport)> {
    let series = ingest(config)?;
    let (split, dropped) = prepare_split(series.values(), config.split_ratio).context("dataset")?;
    let scaler = fit_scaler(&split.train).context("dataset")?;
    let scaled = split.scaled(&scaler);
    let train_config = config.train_config();

    let report = train_with_progress(&scaled, &train_config, |epoch, loss| {
        if epoch % 100 == 0 {
            eprintln!("epoch {epoch}: loss {loss:.6}");
        }
    })
    .context("train")?;

    let model = Model { params: report.params.clone(), scaler, train_config, split_ratio: config.split_ratio };
    model.save(&config.model_path).context("saving model")?;

    writeln!(
        out,
        "blocks: {} train, {} test ({} trailing pairs dropped)",
        split.train.len(),
        split.test.len(),
        dropped
    )?;
    writeln!(out, "scaler: min {} max {}", scaler.min, scaler.max)?;
    writeln!(out, "epoch 1 loss: {:.6}", report.epoch_losses[0])?;
    writeln!(out, "epoch {} loss: {:.6}", report.epoch_losses.len(), report.epoch_losses.last().unwrap())?;
    writeln!(out, "wall time: {:.2} s", report.wall_seconds)?;
    writeln!(out, "model: {}", config.model_path.display())?;
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSummary {
    pub windows: usize,
    pub metrics: MetricSummary,
    pub first_window: ForecastReport,
}

/// Rolls a forecast from every test block (or only the first with
/// `single_window`) and scores all forecast hours together.
///
/// Window `k` starts at the first hour of test block `k`, uses the preceding
/// `context_hours` actual readings as context, and runs for
/// `min(horizon, remaining test hours)`.
pub fn cmd_evaluate(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<EvaluationSummary> {
    let model =
        Model::load(&config.model_path).with_context(|| format!("loading model {}", config.model_path.display()))?;
    let series = ingest(config)?;
    let (split, _) = prepare_split(series.values(), model.split_ratio).context("dataset")?;
    let values = series.values();

    let test_start = BLOCK_HOURS * split.train.len();
    // last target of the last test block
    let test_end = BLOCK_HOURS * (split.train.len() + split.test.len()) + 1;
    let windows = if config.single_window { 1 } else { split.test.len() };

    let mut predicted = Vec::new();
    let mut actual = Vec::new();
    let mut first_window = None;
    for k in 0..windows {
        let start = test_start + k * BLOCK_HOURS;
        let horizon = config.horizon.min(test_end - start);
        let context = &values[start.saturating_sub(config.context_hours)..start];
        let truth = &values[start..start + horizon];
        let report = rolling_forecast_windowed(
            &model.params,
            &model.scaler,
            context,
            horizon,
            config.context_hours,
            series.timestamp(start),
        )
        .with_context(|| format!("forecast window {k}"))?;
        let report = evaluate_forecast(report, truth)
            .with_context(|| format!("window {k} starting {}", series.timestamp(start)))?;
        predicted.extend_from_slice(&report.predicted);
        actual.extend_from_slice(truth);
        first_window.get_or_insert(report);
    }
    let metrics = MetricSummary::compute(&predicted, &actual).context("metrics")?;
    let first_window = first_window.expect("split guarantees a test block");

    writeln!(out, "windows: {windows}")?;
    writeln!(out, "{metrics}")?;
    if let Some(path) = &config.out_path {
        std::fs::write(path, first_window.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EvaluationSummary { windows, metrics, first_window })
}

/// Forecasts `horizon` hours past the last reading of the input.
pub fn cmd_forecast(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<ForecastReport> {
    let model =
        Model::load(&config.model_path).with_context(|| format!("loading model {}", config.model_path.display()))?;
    let series = ingest(config)?;
    let values = series.values();
    let context = &values[values.len().saturating_sub(config.context_hours)..];
    let start = series.end() + Duration::hours(1);
    let report =
        rolling_forecast_windowed(&model.params, &model.scaler, context, config.horizon, config.context_hours, start)
            .context("forecast")?;
    write_output(config.out_path.as_deref(), &report.to_csv(), out)?;
    Ok(report)
}

/// Renders a report CSV (given as `--input`) to SVG.
pub fn cmd_export_plot(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    let path = config.input()?;
    let report = ForecastReport::from_csv(&read_text(path)?).with_context(|| format!("report {}", path.display()))?;
    write_output(config.out_path.as_deref(), &render_svg(&report), out)
}
