use std::cell::Cell;
use std::path::{Path, PathBuf};

use agrisynth::power::{PowerClient, PowerError, PowerRequest, Source, Transport, TransportError};
use agrisynth_core::{Date, WeatherSeries};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/power")
}

fn request() -> PowerRequest {
    PowerRequest {
        lat: 39.74,
        lon: -104.99,
        start: "2024-01-01".parse().unwrap(),
        end: "2024-01-31".parse().unwrap(),
    }
}

/// Golden rows, parsed with plain string splitting so the CSV reader is not
/// part of the check.
fn golden() -> Vec<(Date, f64, f64, f64)> {
    let text = std::fs::read_to_string(fixture_dir().join("expected_2024_01.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

fn assert_matches_golden(series: &WeatherSeries) {
    let gold = golden();
    assert_eq!(series.len(), gold.len());
    for (d, (date, tmin, tmax, rain)) in series.days.iter().zip(gold) {
        assert_eq!(d.date, date);
        assert!((d.tmin - tmin).abs() < 1e-9, "{date} tmin");
        assert!((d.tmax - tmax).abs() < 1e-9, "{date} tmax");
        assert!((d.rain_mm - rain).abs() < 1e-9, "{date} rain");
    }
}

struct Counting<'a> {
    calls: &'a Cell<usize>,
    body: Result<String, TransportError>,
}

impl Transport for Counting<'_> {
    fn get(&self, _url: &str) -> Result<String, TransportError> {
        self.calls.set(self.calls.get() + 1);
        self.body.clone()
    }
}

fn fixture_body() -> String {
    std::fs::read_to_string(fixture_dir().join(request().cache_file_name())).unwrap()
}

#[test]
fn fixture_mode_matches_golden_series() {
    let client = PowerClient::fixture(fixture_dir());
    let series = client.fetch_daily(&request()).unwrap();
    assert_matches_golden(&series);
    assert_eq!(client.network_requests(), 0);
}

#[test]
fn swapped_day_is_reordered() {
    let series = PowerClient::fixture(fixture_dir()).fetch_daily(&request()).unwrap();
    let d = series.days.iter().find(|d| d.date == "2024-01-17".parse().unwrap()).unwrap();
    assert_eq!((d.tmin, d.tmax), (-2.31, 4.08));
}

#[test]
fn missing_fixture_is_reported() {
    let mut req = request();
    req.end = "2024-01-30".parse().unwrap();
    let err = PowerClient::fixture(fixture_dir()).fetch_daily(&req).unwrap_err();
    assert!(matches!(err, PowerError::FixtureMissing(_)), "{err:?}");
}

#[test]
fn cache_hit_makes_no_network_calls() {
    let cache = tempfile::tempdir().unwrap();
    std::fs::write(cache.path().join(request().cache_file_name()), fixture_body()).unwrap();
    let calls = Cell::new(0);
    let transport = Counting { calls: &calls, body: Err(TransportError { status: None, message: "offline".into() }) };
    let client = PowerClient::new(transport, Source::Live { cache_dir: cache.path().into() });
    let series = client.fetch_daily(&request()).unwrap();
    assert_matches_golden(&series);
    assert_eq!(calls.get(), 0);
    assert_eq!(client.network_requests(), 0);
}

#[test]
fn cache_miss_downloads_once_then_hits() {
    let cache = tempfile::tempdir().unwrap();
    let calls = Cell::new(0);
    let transport = Counting { calls: &calls, body: Ok(fixture_body()) };
    let client = PowerClient::new(transport, Source::Live { cache_dir: cache.path().join("nested") });
    let first = client.fetch_daily(&request()).unwrap();
    let second = client.fetch_daily(&request()).unwrap();
    assert_eq!(calls.get(), 1);
    assert_eq!(first, second);
    assert!(cache.path().join("nested").join(request().cache_file_name()).is_file());
}

#[test]
fn unparseable_download_is_not_cached() {
    let cache = tempfile::tempdir().unwrap();
    let calls = Cell::new(0);
    let transport = Counting { calls: &calls, body: Ok("{\"messages\": []}".into()) };
    let client = PowerClient::new(transport, Source::Live { cache_dir: cache.path().into() });
    assert!(matches!(client.fetch_daily(&request()), Err(PowerError::ApiSchemaChange(_))));
    assert!(!cache.path().join(request().cache_file_name()).exists());
}

/// Hits the real POWER API; run with `cargo test -- --ignored`.
#[test]
#[ignore = "needs network access"]
fn live_smoke() {
    let cache = tempfile::tempdir().unwrap();
    let client = PowerClient::live(cache.path());
    let series = client.fetch_daily(&request()).unwrap();
    assert_eq!(series.len(), 31);
    assert!(series.days.iter().all(|d| d.tmin <= d.tmax && d.rain_mm >= 0.0));
    assert!(client.network_requests() >= 1);
}
