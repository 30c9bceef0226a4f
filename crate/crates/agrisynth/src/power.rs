//! NASA POWER daily point client with an on-disk cache and a fixture mode.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use agrisynth_core::{Date, WeatherDay, WeatherSeries};
use serde::Deserialize;

pub const ENDPOINT: &str = "https://power.larc.nasa.gov/api/temporal/daily/point";
pub const PARAMETERS: [&str; 3] = ["T2M_MAX", "T2M_MIN", "PRECTOTCORR"];
const FILL_VALUE: f64 = -999.0;

#[derive(Debug, thiserror::Error)]
pub enum PowerError {
    #[error("invalid coordinates lat={lat} lon={lon}")]
    InvalidCoords { lat: f64, lon: f64 },
    #[error("start {start} is after end {end}")]
    InvalidRange { start: Date, end: Date },
    #[error("network failure after {attempts} attempts: {message}")]
    NetworkFailure { attempts: u32, message: String },
    #[error("unexpected API response: {0}")]
    ApiSchemaChange(String),
    #[error("no fixture at {0}")]
    FixtureMissing(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportError {
    /// HTTP status, when the server answered.
    pub status: Option<u16>,
    pub message: String,
}

impl TransportError {
    fn retryable(&self) -> bool {
        match self.status {
            None => true,
            Some(s) => s == 429 || s >= 500,
        }
    }
}

pub trait Transport {
    fn get(&self, url: &str) -> Result<String, TransportError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        UreqTransport { agent: config.into() }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<String, TransportError> {
        let mut resp = self.agent.get(url).call().map_err(|e| match e {
            ureq::Error::StatusCode(s) => TransportError { status: Some(s), message: format!("HTTP {s}") },
            other => TransportError { status: None, message: other.to_string() },
        })?;
        resp.body_mut()
            .read_to_string()
            .map_err(|e| TransportError { status: None, message: e.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// Query the API, caching responses under `cache_dir`.
    Live { cache_dir: PathBuf },
    /// Read responses from `dir`; never touches the network.
    Fixture { dir: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRequest {
    pub lat: f64,
    pub lon: f64,
    pub start: Date,
    pub end: Date,
}

impl PowerRequest {
    pub fn validate(&self) -> Result<(), PowerError> {
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return Err(PowerError::InvalidCoords { lat: self.lat, lon: self.lon });
        }
        if self.start > self.end {
            return Err(PowerError::InvalidRange { start: self.start, end: self.end });
        }
        Ok(())
    }

    /// `{lat}_{lon}_{start}_{end}.json`, dates as YYYYMMDD.
    pub fn cache_file_name(&self) -> String {
        format!("{}_{}_{}_{}.json", self.lat, self.lon, self.start.compact(), self.end.compact())
    }

    pub fn url(&self) -> String {
        format!(
            "{ENDPOINT}?parameters={}&community=AG&longitude={}&latitude={}&start={}&end={}&format=JSON",
            PARAMETERS.join(","),
            self.lon,
            self.lat,
            self.start.compact(),
            self.end.compact()
        )
    }
}

pub struct PowerClient<T> {
    transport: T,
    source: Source,
    retry: RetryPolicy,
    requests: Cell<usize>,
}

impl PowerClient<UreqTransport> {
    pub fn live(cache_dir: impl Into<PathBuf>) -> Self {
        PowerClient::new(UreqTransport::default(), Source::Live { cache_dir: cache_dir.into() })
    }

    pub fn fixture(dir: impl Into<PathBuf>) -> Self {
        PowerClient::new(UreqTransport::default(), Source::Fixture { dir: dir.into() })
    }
}

impl<T: Transport> PowerClient<T> {
    pub fn new(transport: T, source: Source) -> Self {
        PowerClient { transport, source, retry: RetryPolicy::default(), requests: Cell::new(0) }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// HTTP requests issued so far, retries included.
    pub fn network_requests(&self) -> usize {
        self.requests.get()
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn fetch_daily(&self, req: &PowerRequest) -> Result<WeatherSeries, PowerError> {
        req.validate()?;
        let body = match &self.source {
            Source::Fixture { dir } => {
                let path = dir.join(req.cache_file_name());
                if !path.is_file() {
                    return Err(PowerError::FixtureMissing(path));
                }
                read(&path)?
            }
            Source::Live { cache_dir } => {
                let path = cache_dir.join(req.cache_file_name());
                if path.is_file() {
                    read(&path)?
                } else {
                    let body = self.download(&req.url())?;
                    // Only cache what parses, so a bad response is retried next time.
                    parse_daily(&body, req.start, req.end)?;
                    write_atomic(cache_dir, &path, &body)?;
                    body
                }
            }
        };
        parse_daily(&body, req.start, req.end)
    }

    fn download(&self, url: &str) -> Result<String, PowerError> {
        let mut delay = self.retry.base_delay;
        let mut last = String::new();
        for attempt in 1..=self.retry.attempts.max(1) {
            self.requests.set(self.requests.get() + 1);
            match self.transport.get(url) {
                Ok(body) => return Ok(body),
                Err(e) => {
                    last = e.message.clone();
                    if !e.retryable() {
                        return Err(PowerError::NetworkFailure { attempts: attempt, message: last });
                    }
                }
            }
            if attempt < self.retry.attempts {
                std::thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(PowerError::NetworkFailure { attempts: self.retry.attempts.max(1), message: last })
    }
}

fn read(path: &Path) -> Result<String, PowerError> {
    std::fs::read_to_string(path).map_err(|source| PowerError::Io { path: path.into(), source })
}

fn write_atomic(dir: &Path, path: &Path, body: &str) -> Result<(), PowerError> {
    let io = |source| PowerError::Io { path: path.into(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Deserialize)]
struct Response {
    properties: Properties,
}

#[derive(Deserialize)]
struct Properties {
    parameter: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Parse a POWER daily JSON body into one record per day of `start..=end`.
/// Swapped tmin/tmax are reordered; fill values are an error.
pub fn parse_daily(body: &str, start: Date, end: Date) -> Result<WeatherSeries, PowerError> {
    let resp: Response = serde_json::from_str(body).map_err(|e| PowerError::ApiSchemaChange(e.to_string()))?;
    let series: Vec<&BTreeMap<String, f64>> = PARAMETERS
        .iter()
        .map(|p| {
            resp.properties
                .parameter
                .get(*p)
                .ok_or_else(|| PowerError::ApiSchemaChange(format!("missing parameter {p}")))
        })
        .collect::<Result<_, _>>()?;
    let mut days = Vec::with_capacity((start.days_until(end) + 1) as usize);
    let mut date = start;
    while date <= end {
        let key = date.compact();
        let mut vals = [0.0; 3];
        for (i, s) in series.iter().enumerate() {
            let v = *s
                .get(&key)
                .ok_or_else(|| PowerError::ApiSchemaChange(format!("{} has no value for {key}", PARAMETERS[i])))?;
            if v == FILL_VALUE || !v.is_finite() {
                return Err(PowerError::ApiSchemaChange(format!("{} is missing data for {key}", PARAMETERS[i])));
            }
            vals[i] = v;
        }
        let [tmax, tmin, rain] = vals;
        days.push(WeatherDay { date, tmin, tmax, rain_mm: rain.max(0.0) }.ordered());
        date = date.add_days(1);
    }
    Ok(WeatherSeries::new(days))
}
