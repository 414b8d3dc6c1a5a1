//! Trains on a synthetic diurnal series and scores a 48-hour rolling
//! forecast from the last training block.
//!
//! cargo run --release --example synthetic -- [hidden] [epochs] [keep_prob] [seed] [noise_seed] [hidden|output]

use thermocast::dataset::{fit_scaler, prepare_split, BLOCK_HOURS};
use thermocast::forecast::{evaluate_forecast, rolling_forecast};
use thermocast::rnn::{train, TrainConfig};
use thermocast::synthetic::diurnal_series;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let config = TrainConfig {
        hidden_size: arg(0, "32").parse()?,
        epochs: arg(1, "200").parse()?,
        dropout_keep_prob: arg(2, "0.5").parse()?,
        seed: arg(3, "0").parse()?,
        dropout_site: arg(5, "hidden").parse()?,
        ..TrainConfig::default()
    };
    let noise_seed: u64 = arg(4, "42").parse()?;

    let series = diurnal_series(1440, 0.2, noise_seed);
    let (split, _) = prepare_split(series.values(), 0.7)?;
    let scaler = fit_scaler(&split.train)?;
    let report = train(&split.scaled(&scaler), &config)?;

    let start = BLOCK_HOURS * split.train.len();
    let context = &series.values()[start - BLOCK_HOURS..start];
    let forecast = rolling_forecast(&report.params, &scaler, context, 48, series.timestamp(start))?;
    let scored = evaluate_forecast(forecast, &series.values()[start..start + 48])?;
    let m = scored.metrics.expect("evaluated");
    println!(
        "H={} epochs={} keep={} site={} seed={}: loss {:.5} -> {:.5}, accuracy {:.3}%, mae {:.4} C, {:.1}s",
        config.hidden_size,
        config.epochs,
        config.dropout_keep_prob,
        config.dropout_site,
        config.seed,
        report.epoch_losses[0],
        report.epoch_losses.last().unwrap(),
        m.accuracy_percent,
        m.mae_c,
        report.wall_seconds
    );
    Ok(())
}
