//! Synthetic data generators: per-column distributions, Richardson-type daily
//! weather, gradient soil grids and joint soil/fertilizer/yield field trials.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, sin};
use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::linalg::{cholesky_psd, Matrix};
use crate::npk::NpkRates;
use crate::rng::Rng;
use crate::table::{Column, Table};
use crate::weather::{WeatherDay, WeatherSeries};

pub const FIELD_ID: &str = "field_id";
pub const SEASON: &str = "season";
pub const YIELD: &str = "yield_kgha";
pub const SOIL_COLUMNS: [&str; 5] = ["ph", "organic_matter_pct", "soil_n_mgkg", "soil_p_mgkg", "soil_k_mgkg"];
pub const RATE_COLUMNS: [&str; 3] = ["n_kgha", "p_kgha", "k_kgha"];

const SOIL_UNITS: [&str; 5] = ["pH", "%", "mg/kg", "mg/kg", "mg/kg"];
const SOIL_BOUNDS: [(f64, f64); 5] = [
    (0.0, 14.0),
    (0.0, 100.0),
    (0.0, f64::INFINITY),
    (0.0, f64::INFINITY),
    (0.0, f64::INFINITY),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
    #[error("soil covariance is not positive semi-definite")]
    NotPositiveSemiDefinite,
}

fn invalid(msg: impl Into<String>) -> GenerateError {
    GenerateError::InvalidSpec(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Normal { mean: f64, sigma: f64 },
    LogNormal { mu_log: f64, sigma_log: f64 },
    Uniform { a: f64, b: f64 },
    /// Beta(alpha, beta) rescaled onto `[lo, hi]`.
    Beta { alpha: f64, beta: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub clamp: Option<(f64, f64)>,
}

impl DistSpec {
    pub fn new(family: Family) -> Self {
        DistSpec { family, clamp: None }
    }

    pub fn clamped(mut self, lo: f64, hi: f64) -> Self {
        self.clamp = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let ok = match self.family {
            Family::Normal { mean, sigma } => mean.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Family::LogNormal { mu_log, sigma_log } => mu_log.is_finite() && sigma_log > 0.0,
            Family::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            Family::Beta { alpha, beta, lo, hi } => alpha > 0.0 && beta > 0.0 && lo < hi,
        };
        if !ok {
            return Err(invalid(format!("{:?}", self.family)));
        }
        if let Some((lo, hi)) = self.clamp {
            if !(lo < hi) {
                return Err(invalid("clamp requires lo < hi"));
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut Rng) -> f64 {
        let x = match self.family {
            Family::Normal { mean, sigma } => rng.normal(mean, sigma),
            Family::LogNormal { mu_log, sigma_log } => exp(rng.normal(mu_log, sigma_log)),
            Family::Uniform { a, b } => rng.uniform_range(a, b),
            Family::Beta { alpha, beta, lo, hi } => lo + (hi - lo) * rng.beta(alpha, beta),
        };
        match self.clamp {
            Some((lo, hi)) => x.clamp(lo, hi),
            None => x,
        }
    }
}

/// `n` i.i.d. draws from `spec`, clamp applied last.
pub fn gen_column(spec: &DistSpec, n: usize, rng: &mut Rng) -> Result<Vec<f64>, GenerateError> {
    spec.validate()?;
    Ok((0..n).map(|_| spec.draw(rng)).collect())
}

/// Richardson-type weather generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherParams {
    /// Annual mean of the daily mean temperature, °C.
    pub t_mean: f64,
    /// Amplitude of the seasonal sinusoid, °C.
    pub t_amp: f64,
    /// Day of year at which the sinusoid crosses `t_mean` going up.
    pub t_phase: f64,
    /// Daily noise on the mean temperature, °C.
    pub t_sigma: f64,
    /// Expected tmax − tmin, °C.
    pub diurnal_range: f64,
    pub p_wet_given_wet: f64,
    pub p_wet_given_dry: f64,
    pub rain_shape: f64,
    /// Gamma scale for wet-day rainfall, mm.
    pub rain_scale: f64,
}

impl WeatherParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !(self.t_mean.is_finite() && self.t_phase.is_finite()) {
            return Err(invalid("temperature parameters must be finite"));
        }
        if !(self.t_amp >= 0.0 && self.t_sigma >= 0.0) {
            return Err(invalid("t_amp and t_sigma must be >= 0"));
        }
        if !(self.diurnal_range > 0.0) {
            return Err(invalid("diurnal_range must be > 0"));
        }
        if !(prob(self.p_wet_given_wet) && prob(self.p_wet_given_dry)) {
            return Err(invalid("transition probabilities must lie in [0, 1]"));
        }
        if !(self.rain_shape > 0.0 && self.rain_scale > 0.0) {
            return Err(invalid("rain_shape and rain_scale must be > 0"));
        }
        Ok(())
    }

    /// Long-run fraction of wet days of the occurrence chain.
    pub fn stationary_wet_fraction(&self) -> f64 {
        let denom = 1.0 - self.p_wet_given_wet + self.p_wet_given_dry;
        if denom <= 0.0 {
            0.0
        } else {
            self.p_wet_given_dry / denom
        }
    }

    /// Noise-free daily mean temperature for day-of-year `doy`.
    pub fn seasonal_mean(&self, doy: u32) -> f64 {
        self.t_mean
            + self.t_amp * sin(2.0 * core::f64::consts::PI * (doy as f64 - self.t_phase) / 365.0)
    }
}

/// Generate `n_days` of weather starting at `start`.
///
/// The first day's wet state is drawn from the chain's stationary distribution.
pub fn gen_weather(
    params: &WeatherParams,
    start: Date,
    n_days: usize,
    rng: &Rng,
) -> Result<WeatherSeries, GenerateError> {
    gen_weather_after(params, start, n_days, None, rng)
}

/// Like [`gen_weather`], but when `previous_wet` is given the first day is a
/// Markov transition out of that state instead of a stationary draw.
pub fn gen_weather_after(
    params: &WeatherParams,
    start: Date,
    n_days: usize,
    previous_wet: Option<bool>,
    rng: &Rng,
) -> Result<WeatherSeries, GenerateError> {
    params.validate()?;
    if n_days == 0 {
        return Err(invalid("n_days must be >= 1"));
    }
    let mut temp_rng = rng.split("weather/temperature");
    let mut occ_rng = rng.split("weather/occurrence");
    let mut amount_rng = rng.split("weather/amount");
    let half_range = 0.5 * params.diurnal_range;
    let spread = 0.5 * params.t_sigma;

    let mut wet = previous_wet;
    let mut days = Vec::with_capacity(n_days);
    for i in 0..n_days {
        let date = start.add_days(i as i64);
        let p_wet = match wet {
            None => params.stationary_wet_fraction(),
            Some(true) => params.p_wet_given_wet,
            Some(false) => params.p_wet_given_dry,
        };
        let is_wet = occ_rng.uniform() < p_wet;
        wet = Some(is_wet);
        let rain_mm = if is_wet {
            // Gamma draws are almost surely > 0; keep wet days strictly wet.
            amount_rng
                .gamma(params.rain_shape, params.rain_scale)
                .max(f64::MIN_POSITIVE)
        } else {
            0.0
        };

        let anomaly = temp_rng.standard_normal();
        let e_min = temp_rng.standard_normal();
        let e_max = temp_rng.standard_normal();
        let mean = params.seasonal_mean(date.ordinal()) + params.t_sigma * anomaly;
        let day = WeatherDay {
            date,
            tmin: mean - half_range + spread * e_min,
            tmax: mean + half_range + spread * e_max,
            rain_mm,
        }
        .ordered();
        days.push(day);
    }
    Ok(WeatherSeries::new(days))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoilGridParams {
    pub width: usize,
    pub height: usize,
    pub base: f64,
    /// Change in value per cell along x and y.
    pub gradient: (f64, f64),
    pub noise_sigma: f64,
    pub clamp: (f64, f64),
}

/// Table `(x, y, value)`, one row per cell in row-major order (y outer).
pub fn gen_soil_grid(params: &SoilGridParams, rng: &Rng) -> Result<Table, GenerateError> {
    if params.width == 0 || params.height == 0 {
        return Err(invalid("grid dimensions must be >= 1"));
    }
    if !(params.noise_sigma >= 0.0) {
        return Err(invalid("noise_sigma must be >= 0"));
    }
    let (lo, hi) = params.clamp;
    if !(lo < hi) {
        return Err(invalid("clamp requires lo < hi"));
    }
    let mut noise = rng.split("soil_grid/noise");
    let cells = params.width * params.height;
    let mut xs = Vec::with_capacity(cells);
    let mut ys = Vec::with_capacity(cells);
    let mut values = Vec::with_capacity(cells);
    let (gx, gy) = params.gradient;
    for y in 0..params.height {
        for x in 0..params.width {
            let eps = params.noise_sigma * noise.standard_normal();
            let v = params.base + gx * x as f64 + gy * y as f64 + eps;
            xs.push(x as i64);
            ys.push(y as i64);
            values.push(v.clamp(lo, hi));
        }
    }
    Ok(Table::from_columns([
        ("x", Column::Int(xs)),
        ("y", Column::Int(ys)),
        ("value", Column::Float(values)),
    ])
    .expect("grid columns are rectangular"))
}

/// Quadratic-concave yield response to fertilizer plus linear soil terms:
/// `y = β0 + Σ βᵢxᵢ − Σ γᵢxᵢ² + Σ cⱼ soilⱼ`, floored at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldResponse {
    pub intercept: f64,
    /// Linear coefficients for (n, p, k).
    pub beta: [f64; 3],
    /// Curvature for (n, p, k); all strictly positive.
    pub gamma: [f64; 3],
    /// Linear coefficients on the soil columns, in [`SOIL_COLUMNS`] order.
    pub soil: [f64; 5],
    pub noise_sigma: f64,
}

impl YieldResponse {
    /// Noise-free yield for a soil vector and applied rates.
    pub fn expected(&self, soil: &[f64], rates: NpkRates) -> f64 {
        let x = rates.to_array();
        let mut y = self.intercept;
        for i in 0..3 {
            y += self.beta[i] * x[i] - self.gamma[i] * x[i] * x[i];
        }
        for (c, s) in self.soil.iter().zip(soil) {
            y += c * s;
        }
        y.max(0.0)
    }

    /// Unconstrained yield-maximizing rates, `βᵢ / (2γᵢ)`.
    pub fn vertex(&self) -> NpkRates {
        NpkRates::from_array([
            self.beta[0] / (2.0 * self.gamma[0]),
            self.beta[1] / (2.0 * self.gamma[1]),
            self.beta[2] / (2.0 * self.gamma[2]),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRanges {
    pub n: (f64, f64),
    pub p: (f64, f64),
    pub k: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialGenParams {
    pub n: usize,
    pub soil_means: [f64; 5],
    pub soil_cov: [[f64; 5]; 5],
    pub rate_ranges: RateRanges,
    pub yield_response: YieldResponse,
    pub seasons: Vec<(String, f64)>,
    /// Multiplier on expected yield per season, parallel to `seasons`; empty
    /// means 1 for every season.
    #[serde(default)]
    pub season_factors: Vec<f64>,
}

impl TrialGenParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.seasons.is_empty() {
            return Err(invalid("at least one season is required"));
        }
        if self.seasons.iter().any(|(_, w)| !(*w >= 0.0)) {
            return Err(invalid("season weights must be >= 0"));
        }
        let total: f64 = self.seasons.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("season weights must sum to 1"));
        }
        if !self.season_factors.is_empty() && self.season_factors.len() != self.seasons.len() {
            return Err(invalid("season_factors must be empty or match seasons"));
        }
        if self.season_factors.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(invalid("season factors must be > 0"));
        }
        if self.yield_response.gamma.iter().any(|g| !(*g > 0.0)) {
            return Err(invalid("response curvature gamma must be > 0"));
        }
        if !(self.yield_response.noise_sigma >= 0.0) {
            return Err(invalid("noise_sigma must be >= 0"));
        }
        for (lo, hi) in [self.rate_ranges.n, self.rate_ranges.p, self.rate_ranges.k] {
            if !(lo >= 0.0 && lo <= hi) {
                return Err(invalid("rate ranges must satisfy 0 <= lo <= hi"));
            }
        }
        for i in 0..5 {
            for j in 0..i {
                if (self.soil_cov[i][j] - self.soil_cov[j][i]).abs() > 1e-12 {
                    return Err(invalid("soil covariance must be symmetric"));
                }
            }
        }
        Ok(())
    }

    fn cov_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.soil_cov.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }
}

/// Joint soil / applied-rate / yield / season field-trial table.
pub fn gen_trials(params: &TrialGenParams, rng: &Rng) -> Result<Table, GenerateError> {
    params.validate()?;
    let chol =
        cholesky_psd(&params.cov_matrix(), 1e-12).map_err(|_| GenerateError::NotPositiveSemiDefinite)?;
    let mut soil_rng = rng.split("trials/soil");
    let mut rate_rng = rng.split("trials/rates");
    let mut noise_rng = rng.split("trials/noise");
    let mut season_rng = rng.split("trials/season");
    let weights: Vec<f64> = params.seasons.iter().map(|(_, w)| *w).collect();
    let resp = &params.yield_response;

    let n = params.n;
    let mut soil_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 5];
    let mut rate_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 3];
    let mut yields = Vec::with_capacity(n);
    let mut seasons = Vec::with_capacity(n);
    for _ in 0..n {
        let z: Vec<f64> = (0..5).map(|_| soil_rng.standard_normal()).collect();
        let mut soil = [0.0; 5];
        for i in 0..5 {
            let mut v = params.soil_means[i];
            for j in 0..=i {
                v += chol[(i, j)] * z[j];
            }
            let (lo, hi) = SOIL_BOUNDS[i];
            soil[i] = v.clamp(lo, hi);
        }
        let r = &params.rate_ranges;
        let rates = NpkRates::new(
            rate_rng.uniform_range(r.n.0, r.n.1),
            rate_rng.uniform_range(r.p.0, r.p.1),
            rate_rng.uniform_range(r.k.0, r.k.1),
        );
        let eps = resp.noise_sigma * noise_rng.standard_normal();
        let s = season_rng.weighted_index(&weights);
        let factor = params.season_factors.get(s).copied().unwrap_or(1.0);
        let y = (factor * resp.expected(&soil, rates) + eps).max(0.0);
        let season = &params.seasons[s].0;

        for i in 0..5 {
            soil_cols[i].push(soil[i]);
        }
        for (col, x) in rate_cols.iter_mut().zip(rates.to_array()) {
            col.push(x);
        }
        yields.push(y);
        seasons.push(season.clone());
    }

    let mut t = Table::new();
    t.push_column(FIELD_ID, Column::Int((0..n as i64).collect())).expect("fresh");
    t.push_column(SEASON, Column::Category(seasons)).expect("fresh");
    for (i, col) in soil_cols.into_iter().enumerate() {
        t.push_column(SOIL_COLUMNS[i], Column::Float(col)).expect("fresh");
        t.set_units(SOIL_COLUMNS[i], Some(SOIL_UNITS[i].into())).expect("exists");
    }
    for (i, col) in rate_cols.into_iter().enumerate() {
        t.push_column(RATE_COLUMNS[i], Column::Float(col)).expect("fresh");
        t.set_units(RATE_COLUMNS[i], Some("kg/ha".into())).expect("exists");
    }
    t.push_column(YIELD, Column::Float(yields)).expect("fresh");
    t.set_units(YIELD, Some("kg/ha".into())).expect("exists");
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, std_dev};
    use alloc::string::ToString;

    fn weather() -> WeatherParams {
        WeatherParams {
            t_mean: 22.0,
            t_amp: 6.0,
            t_phase: 80.0,
            t_sigma: 2.0,
            diurnal_range: 11.0,
            p_wet_given_wet: 0.6,
            p_wet_given_dry: 0.2,
            rain_shape: 0.8,
            rain_scale: 9.0,
        }
    }

    fn start() -> Date {
        "2020-01-01".parse().unwrap()
    }

    #[test]
    fn uniform_column_support() {
        let xs = gen_column(&DistSpec::new(Family::Uniform { a: 0.0, b: 1.0 }), 1000, &mut Rng::new(5)).unwrap();
        assert_eq!(xs.len(), 1000);
        assert!(xs.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn zero_sigma_is_invalid() {
        let spec = DistSpec::new(Family::Normal { mean: 5.0, sigma: 0.0 });
        assert!(matches!(gen_column(&spec, 3, &mut Rng::new(1)), Err(GenerateError::InvalidSpec(_))));
        let bad_clamp = DistSpec::new(Family::Uniform { a: 0.0, b: 1.0 }).clamped(2.0, 1.0);
        assert!(gen_column(&bad_clamp, 3, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn normal_column_moments() {
        let xs = gen_column(&DistSpec::new(Family::Normal { mean: 10.0, sigma: 2.0 }), 10_000, &mut Rng::new(42))
            .unwrap();
        assert!((mean(&xs) - 10.0).abs() < 0.1);
        assert!((std_dev(&xs) - 2.0).abs() < 0.1);
    }

    #[test]
    fn other_families_respect_support_and_clamp() {
        let mut rng = Rng::new(9);
        let logn = gen_column(&DistSpec::new(Family::LogNormal { mu_log: 0.0, sigma_log: 0.5 }), 500, &mut rng).unwrap();
        assert!(logn.iter().all(|x| *x > 0.0));
        let beta = gen_column(
            &DistSpec::new(Family::Beta { alpha: 2.0, beta: 5.0, lo: 4.0, hi: 8.0 }),
            500,
            &mut rng,
        )
        .unwrap();
        assert!(beta.iter().all(|x| (4.0..=8.0).contains(x)));
        let clamped = gen_column(
            &DistSpec::new(Family::Normal { mean: 0.0, sigma: 10.0 }).clamped(-1.0, 1.0),
            500,
            &mut rng,
        )
        .unwrap();
        assert!(clamped.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn flat_weather_sits_on_mean() {
        let p = WeatherParams { t_amp: 0.0, t_sigma: 0.0, ..weather() };
        let w = gen_weather(&p, start(), 400, &Rng::new(1)).unwrap();
        for d in &w.days {
            assert!(((d.tmin + d.tmax) / 2.0 - p.t_mean).abs() < 1e-12);
        }
    }

    #[test]
    fn absorbing_dry_state() {
        let p = WeatherParams { p_wet_given_dry: 0.0, ..weather() };
        let w = gen_weather_after(&p, start(), 365, Some(false), &Rng::new(3)).unwrap();
        assert!(w.days.iter().all(|d| d.rain_mm == 0.0));
        // Stationary start is also dry when p_wet_given_dry = 0.
        let w = gen_weather(&p, start(), 365, &Rng::new(3)).unwrap();
        assert!(w.days.iter().all(|d| d.rain_mm == 0.0));
    }

    #[test]
    fn wet_fraction_matches_stationary() {
        let p = WeatherParams { p_wet_given_wet: 0.5, p_wet_given_dry: 0.5, ..weather() };
        let w = gen_weather(&p, start(), 10_000, &Rng::new(42)).unwrap();
        let wet = w.days.iter().filter(|d| d.is_wet()).count() as f64 / 10_000.0;
        assert!((wet - 0.5).abs() < 0.02, "{wet}");
    }

    #[test]
    fn weather_invariants_and_dates() {
        let w = gen_weather(&weather(), start(), 730, &Rng::new(8)).unwrap();
        for (i, d) in w.days.iter().enumerate() {
            assert!(d.tmin <= d.tmax);
            assert!(d.rain_mm >= 0.0);
            assert_eq!(d.date, start().add_days(i as i64));
        }
        assert!(gen_weather(&weather(), start(), 0, &Rng::new(8)).is_err());
    }

    #[test]
    fn soil_grid_pure_gradient() {
        let p = SoilGridParams {
            width: 3,
            height: 2,
            base: 5.0,
            gradient: (1.0, 0.0),
            noise_sigma: 0.0,
            clamp: (0.0, 14.0),
        };
        let t = gen_soil_grid(&p, &Rng::new(0)).unwrap();
        assert_eq!(t.float("value").unwrap(), &[5.0, 6.0, 7.0, 5.0, 6.0, 7.0]);
        assert_eq!(t.column("x").unwrap(), &Column::Int(vec![0, 1, 2, 0, 1, 2]));
        assert_eq!(t.column("y").unwrap(), &Column::Int(vec![0, 0, 0, 1, 1, 1]));
    }

    #[test]
    fn soil_grid_single_cell_and_clamp() {
        let one = SoilGridParams {
            width: 1,
            height: 1,
            base: 6.5,
            gradient: (3.0, 3.0),
            noise_sigma: 0.0,
            clamp: (0.0, 14.0),
        };
        let t = gen_soil_grid(&one, &Rng::new(0)).unwrap();
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.float("value").unwrap(), &[6.5]);
        let clamp = SoilGridParams { width: 5, height: 5, base: 13.0, gradient: (1.0, 0.0), noise_sigma: 0.5, ..one };
        let t = gen_soil_grid(&clamp, &Rng::new(4)).unwrap();
        assert!(t.float("value").unwrap().iter().all(|v| *v <= 14.0 && *v >= 0.0));
        assert!(gen_soil_grid(&SoilGridParams { width: 0, ..one }, &Rng::new(0)).is_err());
    }

    pub(crate) fn trial_params() -> TrialGenParams {
        let mut cov = [[0.0; 5]; 5];
        let sd = [0.6, 0.8, 8.0, 6.0, 30.0];
        for i in 0..5 {
            cov[i][i] = sd[i] * sd[i];
        }
        cov[1][2] = 0.5 * sd[1] * sd[2];
        cov[2][1] = cov[1][2];
        TrialGenParams {
            n: 5000,
            soil_means: [6.2, 1.8, 25.0, 18.0, 160.0],
            soil_cov: cov,
            rate_ranges: RateRanges { n: (0.0, 160.0), p: (0.0, 80.0), k: (0.0, 80.0) },
            yield_response: YieldResponse {
                intercept: 1200.0,
                beta: [18.0, 12.0, 6.0],
                gamma: [0.06, 0.08, 0.04],
                soil: [60.0, 120.0, 4.0, 5.0, 0.8],
                noise_sigma: 150.0,
            },
            seasons: vec![("A".to_string(), 0.7), ("B".to_string(), 0.3)],
            season_factors: Vec::new(),
        }
    }

    #[test]
    fn season_counts_follow_weights() {
        let t = gen_trials(&trial_params(), &Rng::new(42)).unwrap();
        let a = t.category(SEASON).unwrap().iter().filter(|s| *s == "A").count() as i64;
        assert!((a - 3500).abs() <= 100, "{a}");
        assert_eq!(t.n_rows(), 5000);
    }

    #[test]
    fn deterministic_response_without_noise() {
        let mut p = trial_params();
        p.n = 50;
        p.yield_response.noise_sigma = 0.0;
        p.rate_ranges = RateRanges { n: (0.0, 0.0), p: (0.0, 0.0), k: (0.0, 0.0) };
        let t = gen_trials(&p, &Rng::new(1)).unwrap();
        let y = t.float(YIELD).unwrap();
        for r in 0..t.n_rows() {
            let soil: Vec<f64> = SOIL_COLUMNS.iter().map(|c| t.float(c).unwrap()[r]).collect();
            let want = p.yield_response.intercept
                + soil.iter().zip(&p.yield_response.soil).map(|(s, c)| s * c).sum::<f64>();
            assert!((y[r] - want.max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn vertex_of_single_nutrient_response() {
        let resp = YieldResponse {
            intercept: 10.0,
            beta: [2.0, 0.0, 0.0],
            gamma: [0.01, 0.5, 0.5],
            soil: [0.0; 5],
            noise_sigma: 0.0,
        };
        assert!((resp.vertex().n - 100.0).abs() < 1e-12);
        // grid oracle
        let best = (0..=300)
            .max_by(|a, b| {
                let ya = resp.expected(&[0.0; 5], NpkRates::new(*a as f64, 0.0, 0.0));
                let yb = resp.expected(&[0.0; 5], NpkRates::new(*b as f64, 0.0, 0.0));
                ya.total_cmp(&yb)
            })
            .unwrap();
        assert_eq!(best, 100);
    }

    #[test]
    fn rejects_bad_trial_params() {
        let mut p = trial_params();
        p.soil_cov[0][0] = -1.0;
        assert_eq!(gen_trials(&p, &Rng::new(0)), Err(GenerateError::NotPositiveSemiDefinite));
        let mut p = trial_params();
        p.seasons[0].1 = 0.5;
        assert!(matches!(gen_trials(&p, &Rng::new(0)), Err(GenerateError::InvalidSpec(_))));
        let mut p = trial_params();
        p.yield_response.gamma[1] = 0.0;
        assert!(gen_trials(&p, &Rng::new(0)).is_err());
        let mut p = trial_params();
        p.season_factors = vec![1.0];
        assert!(gen_trials(&p, &Rng::new(0)).is_err());
    }

    #[test]
    fn season_factor_scales_expected_yield() {
        let mut p = trial_params();
        p.n = 200;
        p.yield_response.noise_sigma = 0.0;
        let plain = gen_trials(&p, &Rng::new(5)).unwrap();
        p.season_factors = vec![1.0, 0.5];
        let scaled = gen_trials(&p, &Rng::new(5)).unwrap();
        let seasons = plain.category(SEASON).unwrap();
        for (i, (a, b)) in plain.float(YIELD).unwrap().iter().zip(scaled.float(YIELD).unwrap()).enumerate() {
            let f = if seasons[i] == "B" { 0.5 } else { 1.0 };
            assert!((a * f - b).abs() < 1e-9);
        }
    }

    #[test]
    fn trial_physical_ranges() {
        let t = gen_trials(&trial_params(), &Rng::new(7)).unwrap();
        assert!(t.float("ph").unwrap().iter().all(|v| (0.0..=14.0).contains(v)));
        for c in &SOIL_COLUMNS[1..] {
            assert!(t.float(c).unwrap().iter().all(|v| *v >= 0.0));
        }
        assert!(t.float(YIELD).unwrap().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn concave_response_second_differences() {
        let resp = trial_params().yield_response;
        let soil = [6.0, 2.0, 20.0, 15.0, 150.0];
        let h = 5.0;
        for a in 1..30 {
            for b in 1..15 {
                let base = NpkRates::new(a as f64 * h, b as f64 * h, 40.0);
                let f = |r: NpkRates| resp.expected(&soil, r);
                let d2n = f(NpkRates { n: base.n + h, ..base }) - 2.0 * f(base) + f(NpkRates { n: base.n - h, ..base });
                let d2p = f(NpkRates { p: base.p + h, ..base }) - 2.0 * f(base) + f(NpkRates { p: base.p - h, ..base });
                assert!(d2n < 0.0 && d2p < 0.0);
            }
        }
    }
}
