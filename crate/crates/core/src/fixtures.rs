//! Deterministic synthetic weather for a network of cities.
//!
//! Irradiance follows a clear-sky daily arc scaled by a slowly drifting cloud
//! cover; temperature, pressure and humidity carry daily cycles and weather
//! anomalies. Everything is drawn from a per-city ChaCha stream, so the same
//! seed always produces the same samples.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::store::{self, WeatherSample};

pub const CITY_COUNT: usize = 317;
pub const DEFAULT_DAYS: usize = 30;

pub fn city_id(index: usize) -> String {
    format!("city-{index:03}")
}

/// First sample time of every synthetic series.
pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap()
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Hourly samples for one city over `days` days.
pub fn synthesize_city(index: usize, days: usize, seed: u64) -> Vec<WeatherSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let latitude = 43.6 + 4.6 * rng.random::<f64>();
    let peak = 1000.0 - 12.0 * (latitude - 43.6);
    let mean_temperature = 22.0 - 0.8 * (latitude - 43.6);
    let base_pressure = 1013.0 - 25.0 * rng.random::<f64>();

    let mut cloud: f64 = rng.random_range(0.0..0.6);
    let mut anomaly = 0.0;
    let mut pressure_drift = 0.0;
    let start = epoch();
    let mut samples = Vec::with_capacity(days * 24);
    for hour in 0..days * 24 {
        if hour % 24 == 0 {
            anomaly = 0.7 * anomaly + 1.5 * unit.sample(&mut rng);
            pressure_drift = 0.8 * pressure_drift + 3.0 * unit.sample(&mut rng);
        }
        cloud = (0.9 * cloud + 0.1 * rng.random::<f64>() + 0.05 * unit.sample(&mut rng)).clamp(0.0, 0.95);

        let local = (hour % 24) as f64;
        let elevation = (PI * (local - 6.0) / 12.0).sin().max(0.0);
        let irradiance = peak * elevation.powf(1.2) * (1.0 - 0.75 * cloud);
        let temperature = mean_temperature + anomaly + 6.0 * (2.0 * PI * (local - 9.0) / 24.0).sin() + 0.3 * unit.sample(&mut rng);
        let humidity = 65.0 - 20.0 * (2.0 * PI * (local - 9.0) / 24.0).sin() + 25.0 * cloud + 3.0 * unit.sample(&mut rng);

        samples.push(WeatherSample {
            city_id: city_id(index),
            timestamp: start + Duration::hours(hour as i64),
            temperature: round1(temperature),
            pressure: round1(base_pressure + pressure_drift),
            humidity: round1(humidity.clamp(0.0, 100.0)),
            irradiance: round1(irradiance.max(0.0)),
        });
    }
    samples
}

/// Samples for `cities` cities, ordered by city then time.
pub fn synthesize(cities: usize, days: usize, seed: u64) -> Vec<WeatherSample> {
    (0..cities).flat_map(|i| synthesize_city(i, days, seed)).collect()
}

/// Writes one `<city>.csv` per city into `dir`.
pub fn write_fixtures(dir: &Path, cities: usize, days: usize, seed: u64) -> store::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| store::StoreError::Io { path: dir.to_path_buf(), source })?;
    (0..cities)
        .map(|i| {
            let path = dir.join(format!("{}.csv", city_id(i)));
            let mut body = Vec::new();
            store::write_samples(&synthesize_city(i, days, seed), &mut body)
                .map_err(|source| store::StoreError::Io { path: path.clone(), source })?;
            store::write_atomic(&path, &body)?;
            Ok(path)
        })
        .collect()
}
