//! Day-by-day season simulation: growing degree days drive crop stages, a
//! single-bucket water balance drives stress, and yield is the
//! stage-weighted mean of daily water sufficiency.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::generate::{gen_weather_after, GenerateError, WeatherParams};
use crate::npk::NpkRates;
use crate::rng::Rng;
use crate::table::{Column, Table};
use crate::weather::WeatherSeries;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulateError {
    #[error("weather series is empty")]
    EmptyWeather,
    #[error("action on day {day} is outside the {len}-day season")]
    ActionOutOfRange { day: usize, len: usize },
    #[error("invalid action on day {0}: amounts must be finite and >= 0")]
    InvalidAction(usize),
    #[error("invalid crop parameters: {0}")]
    InvalidCrop(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Sown,
    Emergence,
    Vegetative,
    Flowering,
    Maturity,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Sown, Stage::Emergence, Stage::Vegetative, Stage::Flowering, Stage::Maturity];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Sown => "sown",
            Stage::Emergence => "emergence",
            Stage::Vegetative => "vegetative",
            Stage::Flowering => "flowering",
            Stage::Maturity => "maturity",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropParams {
    pub t_base: f64,
    /// Cumulative GDD for emergence, vegetative, flowering, maturity.
    pub stage_gdd_thresholds: [f64; 4],
    pub potential_yield: f64,
    pub water_capacity: f64,
    pub daily_et: f64,
    /// Stress weight per stage, indexed like [`Stage::ALL`] (sown first).
    pub stress_weights: [f64; 5],
    /// Soil water on day 0; defaults to `water_capacity`.
    #[serde(default)]
    pub initial_water: Option<f64>,
}

impl Default for CropParams {
    fn default() -> Self {
        CropParams {
            t_base: 10.0,
            stage_gdd_thresholds: [100.0, 500.0, 1100.0, 1600.0],
            potential_yield: 9000.0,
            water_capacity: 120.0,
            daily_et: 4.0,
            stress_weights: [0.0, 0.2, 0.6, 1.0, 0.4],
            initial_water: None,
        }
    }
}

impl CropParams {
    pub fn validate(&self) -> Result<(), SimulateError> {
        let bad = |m: &str| Err(SimulateError::InvalidCrop(m.to_string()));
        let t = self.stage_gdd_thresholds;
        if !t.iter().all(|v| v.is_finite()) || !t.windows(2).all(|w| w[0] < w[1]) {
            return bad("stage thresholds must be finite and strictly increasing");
        }
        if !(self.water_capacity > 0.0 && self.water_capacity.is_finite()) {
            return bad("water_capacity must be > 0");
        }
        if !(self.daily_et >= 0.0) || !(self.potential_yield >= 0.0) || !self.t_base.is_finite() {
            return bad("daily_et and potential_yield must be >= 0, t_base finite");
        }
        if !self.stress_weights.iter().all(|w| (0.0..=1.0).contains(w)) {
            return bad("stress weights must lie in [0, 1]");
        }
        if let Some(w) = self.initial_water {
            if !(0.0..=self.water_capacity).contains(&w) {
                return bad("initial_water must lie in [0, water_capacity]");
            }
        }
        Ok(())
    }

    pub fn stage_for(&self, gdd_cum: f64) -> Stage {
        let crossed = self.stage_gdd_thresholds.iter().filter(|t| gdd_cum >= **t).count();
        Stage::ALL[crossed]
    }

    pub fn stress_weight(&self, stage: Stage) -> f64 {
        self.stress_weights[stage.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ActionKind {
    Fertilize { rates: NpkRates },
    Irrigate { mm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManagementAction {
    pub day: usize,
    #[serde(flatten)]
    pub kind: ActionKind,
}

impl ManagementAction {
    pub fn irrigate(day: usize, mm: f64) -> Self {
        ManagementAction { day, kind: ActionKind::Irrigate { mm } }
    }

    pub fn fertilize(day: usize, rates: NpkRates) -> Self {
        ManagementAction { day, kind: ActionKind::Fertilize { rates } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: Date,
    pub gdd: f64,
    pub gdd_cum: f64,
    pub stage: Stage,
    /// Soil water at the start of the day, mm.
    pub soil_water: f64,
    pub irrigation: f64,
    pub stress: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NutrientEntry {
    pub day: usize,
    pub date: Date,
    pub rates: NpkRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonLog {
    pub days: Vec<DailyRecord>,
    pub nutrients: Vec<NutrientEntry>,
    pub final_yield: f64,
}

impl SeasonLog {
    pub fn to_table(&self) -> Table {
        let d = &self.days;
        let mut t = Table::new();
        let cols = [
            ("date", Column::Date(d.iter().map(|r| r.date).collect()), None),
            ("gdd", Column::Float(d.iter().map(|r| r.gdd).collect()), Some("degC_day")),
            ("gdd_cum", Column::Float(d.iter().map(|r| r.gdd_cum).collect()), Some("degC_day")),
            ("stage", Column::Category(d.iter().map(|r| r.stage.as_str().to_string()).collect()), None),
            ("soil_water", Column::Float(d.iter().map(|r| r.soil_water).collect()), Some("mm")),
            ("irrigation", Column::Float(d.iter().map(|r| r.irrigation).collect()), Some("mm")),
            ("stress", Column::Float(d.iter().map(|r| r.stress).collect()), None),
        ];
        for (name, col, units) in cols {
            t.push_column(name, col).expect("columns share one length");
            if let Some(u) = units {
                t.set_units(name, Some(u.into())).expect("column exists");
            }
        }
        t
    }

    pub fn total_nutrients(&self) -> NpkRates {
        self.nutrients.iter().fold(NpkRates::ZERO, |acc, e| {
            NpkRates::new(acc.n + e.rates.n, acc.p + e.rates.p, acc.k + e.rates.k)
        })
    }
}

/// Simulate one season. Actions may be given in any order; several actions on
/// the same day accumulate.
pub fn run_season(
    weather: &WeatherSeries,
    crop: &CropParams,
    actions: &[ManagementAction],
) -> Result<SeasonLog, SimulateError> {
    if weather.is_empty() {
        return Err(SimulateError::EmptyWeather);
    }
    crop.validate()?;
    let len = weather.len();
    let mut irrigation = alloc::vec![0.0; len];
    let mut nutrients = Vec::new();
    let mut sorted: Vec<&ManagementAction> = actions.iter().collect();
    sorted.sort_by_key(|a| a.day);
    for a in sorted {
        if a.day >= len {
            return Err(SimulateError::ActionOutOfRange { day: a.day, len });
        }
        match a.kind {
            ActionKind::Irrigate { mm } => {
                if !(mm >= 0.0 && mm.is_finite()) {
                    return Err(SimulateError::InvalidAction(a.day));
                }
                irrigation[a.day] += mm;
            }
            ActionKind::Fertilize { rates } => {
                if !rates.to_array().iter().all(|v| *v >= 0.0 && v.is_finite()) {
                    return Err(SimulateError::InvalidAction(a.day));
                }
                nutrients.push(NutrientEntry { day: a.day, date: weather.days[a.day].date, rates });
            }
        }
    }

    let cap = crop.water_capacity;
    let mut water = crop.initial_water.unwrap_or(cap);
    let mut gdd_cum = 0.0;
    let mut weighted = 0.0;
    let mut total_weight = 0.0;
    let mut days = Vec::with_capacity(len);
    for (i, w) in weather.days.iter().enumerate() {
        let gdd = (0.5 * (w.tmax + w.tmin) - crop.t_base).max(0.0);
        gdd_cum += gdd;
        let stage = crop.stage_for(gdd_cum);
        let stress = water / cap;
        let weight = crop.stress_weight(stage);
        weighted += stress * weight;
        total_weight += weight;
        days.push(DailyRecord { date: w.date, gdd, gdd_cum, stage, soil_water: water, irrigation: irrigation[i], stress });
        water = (water + w.rain_mm + irrigation[i] - crop.daily_et).clamp(0.0, cap);
    }
    let final_yield = if total_weight > 0.0 {
        crop.potential_yield * weighted / total_weight
    } else {
        crop.potential_yield
    };
    Ok(SeasonLog { days, nutrients, final_yield })
}

/// Append `extend_days` synthetic days after `real`, continuing the wet/dry
/// chain from the last real day.
pub fn blend_weather(
    real: &WeatherSeries,
    params: &WeatherParams,
    extend_days: usize,
    rng: &Rng,
) -> Result<WeatherSeries, SimulateError> {
    let last = *real.days.last().ok_or(SimulateError::EmptyWeather)?;
    let mut out = real.clone();
    if extend_days > 0 {
        let synth = gen_weather_after(params, last.date.add_days(1), extend_days, Some(last.is_wet()), rng)?;
        out.days.extend(synth.days);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weather::WeatherDay;
    use alloc::vec;

    fn series(days: usize, tmin: f64, tmax: f64, rain: f64) -> WeatherSeries {
        let start = Date::from_ymd(2024, 4, 1).unwrap();
        WeatherSeries::new(
            (0..days)
                .map(|i| WeatherDay { date: start.add_days(i as i64), tmin, tmax, rain_mm: rain })
                .collect(),
        )
    }

    #[test]
    fn gdd_of_single_day() {
        let log = run_season(&series(1, 10.0, 30.0, 0.0), &CropParams::default(), &[]).unwrap();
        assert_eq!(log.days[0].gdd, 10.0);
    }

    #[test]
    fn saturated_bucket_gives_potential_yield() {
        let crop = CropParams::default();
        let log = run_season(&series(200, 15.0, 30.0, 50.0), &crop, &[]).unwrap();
        assert!(log.days.iter().all(|d| d.stress == 1.0));
        assert_eq!(log.final_yield, crop.potential_yield);
    }

    #[test]
    fn dry_bucket_drains_in_ten_days() {
        let crop = CropParams { water_capacity: 50.0, daily_et: 5.0, ..CropParams::default() };
        let log = run_season(&series(20, 10.0, 20.0, 0.0), &crop, &[]).unwrap();
        let water: Vec<f64> = log.days.iter().map(|d| d.soil_water).collect();
        assert_eq!(water[9], 5.0);
        assert!(water[10..].iter().all(|w| *w == 0.0));
    }

    #[test]
    fn irrigation_refills() {
        let crop = CropParams { water_capacity: 50.0, daily_et: 5.0, ..CropParams::default() };
        let w = series(5, 10.0, 20.0, 0.0);
        let log = run_season(&w, &crop, &[ManagementAction::irrigate(1, 3.0), ManagementAction::irrigate(1, 2.0)]).unwrap();
        assert_eq!(log.days[2].soil_water, 45.0);
        assert_eq!(log.days[1].irrigation, 5.0);
    }

    #[test]
    fn stages_follow_thresholds() {
        let crop = CropParams { stage_gdd_thresholds: [10.0, 20.0, 30.0, 40.0], ..CropParams::default() };
        let log = run_season(&series(6, 10.0, 30.0, 0.0), &crop, &[]).unwrap();
        let stages: Vec<Stage> = log.days.iter().map(|d| d.stage).collect();
        assert_eq!(
            stages,
            vec![Stage::Emergence, Stage::Vegetative, Stage::Flowering, Stage::Maturity, Stage::Maturity, Stage::Maturity]
        );
    }

    #[test]
    fn fertilizer_ledger_and_range_errors() {
        let w = series(3, 10.0, 20.0, 0.0);
        let crop = CropParams::default();
        let acts = [ManagementAction::fertilize(2, NpkRates::new(40.0, 0.0, 10.0)), ManagementAction::fertilize(0, NpkRates::new(10.0, 5.0, 0.0))];
        let log = run_season(&w, &crop, &acts).unwrap();
        assert_eq!(log.nutrients[0].day, 0);
        assert_eq!(log.total_nutrients(), NpkRates::new(50.0, 5.0, 10.0));
        assert_eq!(
            run_season(&w, &crop, &[ManagementAction::irrigate(3, 1.0)]),
            Err(SimulateError::ActionOutOfRange { day: 3, len: 3 })
        );
        assert_eq!(run_season(&WeatherSeries::default(), &crop, &[]), Err(SimulateError::EmptyWeather));
        assert!(run_season(&w, &crop, &[ManagementAction::irrigate(0, -1.0)]).is_err());
    }

    #[test]
    fn zero_weights_give_potential() {
        let crop = CropParams { stress_weights: [0.0; 5], water_capacity: 10.0, ..CropParams::default() };
        let log = run_season(&series(30, 10.0, 20.0, 0.0), &crop, &[]).unwrap();
        assert_eq!(log.final_yield, crop.potential_yield);
    }

    #[test]
    fn crop_validation() {
        let c = CropParams { stage_gdd_thresholds: [10.0, 10.0, 20.0, 30.0], ..CropParams::default() };
        assert!(c.validate().is_err());
        let c = CropParams { water_capacity: 0.0, ..CropParams::default() };
        assert!(c.validate().is_err());
    }

    fn wx() -> WeatherParams {
        WeatherParams {
            t_mean: 18.0,
            t_amp: 8.0,
            t_phase: 200.0,
            t_sigma: 2.0,
            diurnal_range: 10.0,
            p_wet_given_wet: 1.0,
            p_wet_given_dry: 0.2,
            rain_shape: 0.8,
            rain_scale: 8.0,
        }
    }

    #[test]
    fn blend_identity_and_absorbing_chain() {
        let real = series(5, 10.0, 20.0, 3.0);
        assert_eq!(blend_weather(&real, &wx(), 0, &Rng::new(1)).unwrap(), real);
        let out = blend_weather(&real, &wx(), 40, &Rng::new(1)).unwrap();
        assert_eq!(out.len(), 45);
        assert!(out.days[5..].iter().all(|d| d.is_wet()));
        assert!(out.days.windows(2).all(|w| w[0].date.days_until(w[1].date) == 1));
        assert_eq!(out, blend_weather(&real, &wx(), 40, &Rng::new(1)).unwrap());
        assert_eq!(blend_weather(&WeatherSeries::default(), &wx(), 3, &Rng::new(1)), Err(SimulateError::EmptyWeather));
    }
}
