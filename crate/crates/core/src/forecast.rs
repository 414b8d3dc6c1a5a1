//! Autoregressive multi-step forecasting.
//!
//! Each predicted hour is appended to the context and fed back as the next
//! input. The network only ever sees the most recent [`CONTEXT_HOURS`]
//! values, the sequence length it was trained on. Predictions leave this
//! module in °C.

use chrono::{DateTime, Duration, NaiveDateTime, Utc};

use crate::dataset::Scaler;
use crate::metrics::{MetricSummary, MetricsError};
use crate::rnn::{forward, Mode, RnnError, RnnParams};

/// Hours of history the network sees per prediction.
pub const CONTEXT_HOURS: usize = 24;

/// Forecast length used by the evaluation protocol.
pub const DEFAULT_HORIZON: usize = 48;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForecastError {
    #[error("forecast context is empty")]
    EmptyContext,
    #[error("horizon must be at least 1 hour")]
    ZeroHorizon,
    #[error("context window must be at least 1 hour")]
    ZeroWindow,
    #[error("model produced a non-finite value at forecast step {step}")]
    NonFinite { step: usize },
    #[error("expected {expected} actual values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("report CSV line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Rnn(#[from] RnnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Predicted hours, optionally aligned with what actually happened.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    /// Timestamp of the first predicted hour.
    pub start: DateTime<Utc>,
    pub predicted: Vec<f64>,
    pub actual: Option<Vec<f64>>,
    pub metrics: Option<MetricSummary>,
}

impl ForecastReport {
    pub fn horizon(&self) -> usize {
        self.predicted.len()
    }

    pub fn timestamp(&self, step: usize) -> DateTime<Utc> {
        self.start + Duration::hours(step as i64)
    }

    pub fn mape(&self) -> Option<f64> {
        self.metrics.map(|m| m.mape)
    }

    pub fn accuracy_percent(&self) -> Option<f64> {
        self.metrics.map(|m| m.accuracy_percent)
    }

    /// `timestamp,predicted_c` or `timestamp,predicted_c,actual_c`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(match self.actual {
            Some(_) => "timestamp,predicted_c,actual_c\n",
            None => "timestamp,predicted_c\n",
        });
        for (i, p) in self.predicted.iter().enumerate() {
            let ts = self.timestamp(i).format(TIMESTAMP_FORMAT);
            match &self.actual {
                Some(actual) => out.push_str(&format!("{ts},{p},{}\n", actual[i])),
                None => out.push_str(&format!("{ts},{p}\n")),
            }
        }
        out
    }

    /// Reads a report written by [`to_csv`](Self::to_csv). Metrics are
    /// recomputed when an actual column is present.
    pub fn from_csv(text: &str) -> Result<Self, ForecastError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let csv_err =
            |e: csv::Error| ForecastError::Csv { line: e.position().map_or(0, |p| p.line()), message: e.to_string() };
        let headers = reader.headers().map_err(csv_err)?.clone();
        let with_actual = match headers.iter().collect::<Vec<_>>().as_slice() {
            ["timestamp", "predicted_c"] => false,
            ["timestamp", "predicted_c", "actual_c"] => true,
            other => {
                return Err(ForecastError::Csv { line: 1, message: format!("unexpected header {:?}", other.join(",")) })
            }
        };

        let mut start = None;
        let mut predicted = Vec::new();
        let mut actual = Vec::new();
        for row in reader.records() {
            let row = row.map_err(csv_err)?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |message: String| ForecastError::Csv { line, message };
            let ts = NaiveDateTime::parse_from_str(&row[0], TIMESTAMP_FORMAT)
                .map_err(|e| bad(format!("bad timestamp {:?}: {e}", &row[0])))?
                .and_utc();
            let expected = *start.get_or_insert(ts) + Duration::hours(predicted.len() as i64);
            if ts != expected {
                return Err(bad(format!("timestamp {ts} breaks the hourly sequence (expected {expected})")));
            }
            let number = |i: usize| {
                row[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("malformed number {:?}", &row[i])))
            };
            predicted.push(number(1)?);
            if with_actual {
                actual.push(number(2)?);
            }
        }
        let start = start.ok_or(ForecastError::Csv { line: 2, message: "report has no rows".into() })?;
        let report = Self { start, predicted, actual: None, metrics: None };
        if with_actual {
            evaluate_forecast(report, &actual)
        } else {
            Ok(report)
        }
    }
}

/// Runs the context through the network in eval mode and returns the last
/// output. Values are in scaled units.
pub fn predict_next(params: &RnnParams, context: &[f64]) -> Result<f64, ForecastError> {
    if context.is_empty() {
        return Err(ForecastError::EmptyContext);
    }
    let trace = forward(params, context, Mode::Eval)?;
    Ok(*trace.outputs.last().expect("non-empty context"))
}

/// Forecasts `horizon` hours from a °C context using a 24-hour window.
pub fn rolling_forecast(
    params: &RnnParams,
    scaler: &Scaler,
    context: &[f64],
    horizon: usize,
    start: DateTime<Utc>,
) -> Result<ForecastReport, ForecastError> {
    rolling_forecast_windowed(params, scaler, context, horizon, CONTEXT_HOURS, start)
}

/// As [`rolling_forecast`] with an explicit context window.
pub fn rolling_forecast_windowed(
    params: &RnnParams,
    scaler: &Scaler,
    context: &[f64],
    horizon: usize,
    window: usize,
    start: DateTime<Utc>,
) -> Result<ForecastReport, ForecastError> {
    if context.is_empty() {
        return Err(ForecastError::EmptyContext);
    }
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    if window == 0 {
        return Err(ForecastError::ZeroWindow);
    }
    let mut history: Vec<f64> = context.iter().map(|&v| scaler.scale(v)).collect();
    let mut predicted = Vec::with_capacity(horizon);
    for step in 0..horizon {
        let recent = &history[history.len().saturating_sub(window)..];
        let next = predict_next(params, recent)?;
        let celsius = scaler.invert_scale(next);
        if !next.is_finite() || !celsius.is_finite() {
            return Err(ForecastError::NonFinite { step });
        }
        history.push(next);
        predicted.push(celsius);
    }
    Ok(ForecastReport { start, predicted, actual: None, metrics: None })
}

/// Attaches actual values and their metrics to a forecast.
pub fn evaluate_forecast(report: ForecastReport, actual: &[f64]) -> Result<ForecastReport, ForecastError> {
    if actual.len() != report.horizon() {
        return Err(ForecastError::LengthMismatch { expected: report.horizon(), found: actual.len() });
    }
    let metrics = MetricSummary::compute(&report.predicted, actual)?;
    Ok(ForecastReport { actual: Some(actual.to_vec()), metrics: Some(metrics), ..report })
}
