//! Hourly temperature forecasting with a ReLU Elman recurrent network.
//!
//! The pipeline runs in this order:
//!
//! 1. [`ingest`] reads a meteoblue CSV export into a gap-free [`TemperatureSeries`].
//! 2. [`dataset`] pairs each hour with the next, cuts 24-pair day blocks and
//!    splits them 70/30 in time order, then min-max scales on the training side.
//! 3. [`rnn`] trains the network with BPTT and Adam.
//! 4. [`forecast`] rolls the trained model forward hour by hour.
//! 5. [`metrics`] scores forecasts with the relative-error accuracy measure.
//!
//! [`model`] persists everything needed to forecast again, and [`cli`] wires
//! the steps into the `thermocast` command.

pub mod cli;
pub mod dataset;
pub mod forecast;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod rnn;
pub mod synthetic;

pub use dataset::{DayBlock, SamplePair, Scaler, SplitDataset};
pub use forecast::ForecastReport;
pub use ingest::{SeriesMetadata, TemperatureSeries};
pub use metrics::MetricSummary;
pub use model::Model;
pub use rnn::{RnnParams, TrainConfig, TrainReport};
