//! Seeded synthetic diurnal temperature curves for demos and tests.

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{SeriesMetadata, TemperatureSeries};

/// `27 + 3 sin(2πi/24) + u_i` with `u_i` uniform in `[-noise, noise]`.
pub fn diurnal_values(hours: usize, noise: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..hours)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / 24.0;
            let jitter = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
            27.0 + 3.0 * phase.sin() + jitter
        })
        .collect()
}

/// [`diurnal_values`] as a series starting 2019-10-22 00:00 local time at UTC+7.
pub fn diurnal_series(hours: usize, noise: f64, seed: u64) -> TemperatureSeries {
    let metadata = SeriesMetadata {
        latitude: 10.7734,
        longitude: 106.604,
        altitude: 7.0,
        city: "Synthetic".into(),
        utc_offset: 7,
        variable_name: "Temperature".into(),
        unit: "°C".into(),
    };
    let start = Utc.with_ymd_and_hms(2019, 10, 21, 17, 0, 0).unwrap();
    TemperatureSeries::new(start, diurnal_values(hours, noise, seed), metadata).expect("finite synthetic values")
}
