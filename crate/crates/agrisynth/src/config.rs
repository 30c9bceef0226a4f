//! TOML run configurations, one per subcommand, and the config digest.

use std::path::{Path, PathBuf};

use agrisynth_core::augment::AugmentPlan;
use agrisynth_core::generate::{
    DistSpec, SoilGridParams, TrialGenParams, WeatherParams, YieldResponse, RATE_COLUMNS, SEASON, YIELD,
};
use agrisynth_core::model::{RegressorSpec, StackSpec};
use agrisynth_core::optimize::{ObjectiveSpec, SolverConfig};
use agrisynth_core::simulate::{CropParams, ManagementAction};
use agrisynth_core::validate::ValidationOptions;
use agrisynth_core::Date;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::demo::DemoConfig;
use crate::visualize::ChartSpec;
use crate::Error;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Load `path` if given, else the type's defaults.
pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Error> {
    path.map_or_else(|| Ok(T::default()), load)
}

/// `sha256:` of the config serialized as JSON with sorted keys.
pub fn digest<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_value(config).expect("configs serialize").to_string();
    let hash = Sha256::digest(canonical.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Resolve the mandatory seed: the flag wins over the config file.
pub fn seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, Error> {
    flag.or(config)
        .ok_or_else(|| Error::Usage("a seed is required: pass --seed or set `seed` in the config".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherGen {
    pub start: Date,
    pub days: usize,
    pub params: WeatherParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDist {
    pub name: String,
    #[serde(flatten)]
    pub dist: DistSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnsGen {
    pub n: usize,
    pub columns: Vec<NamedDist>,
}

/// Exactly one generator section must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub seed: Option<u64>,
    pub weather: Option<WeatherGen>,
    pub soil_grid: Option<SoilGridParams>,
    pub trials: Option<TrialGenParams>,
    pub columns: Option<ColumnsGen>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    pub seed: Option<u64>,
    pub plan: AugmentPlan,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default)]
    pub options: ValidationOptions,
}

fn default_target() -> String {
    YIELD.into()
}

fn default_season_col() -> String {
    SEASON.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub seed: Option<u64>,
    #[serde(default = "default_target")]
    pub target: String,
    /// Feature columns; default every numeric column except the target.
    pub features: Option<Vec<String>>,
    /// Hold these seasons out and report test metrics on them.
    #[serde(default)]
    pub test_seasons: Vec<String>,
    #[serde(default = "default_season_col")]
    pub season_col: String,
    pub regressor: Option<RegressorSpec>,
    pub stack: Option<StackSpec>,
}

fn default_rate_columns() -> [String; 3] {
    RATE_COLUMNS.map(String::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub seed: Option<u64>,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Analytic response used when no fitted model is supplied.
    pub yield_response: Option<YieldResponse>,
    /// Rate feature names of a fitted model, and observed-rate columns for
    /// explained variability.
    #[serde(default = "default_rate_columns")]
    pub rate_columns: [String; 3],
}

fn default_cache_dir() -> PathBuf {
    "cache/power".into()
}

fn default_fixture_dir() -> PathBuf {
    "fixtures/power".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSource {
    pub lat: f64,
    pub lon: f64,
    pub start: Date,
    pub end: Date,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_fixture_dir")]
    pub fixture_dir: PathBuf,
    /// Read from `fixture_dir` instead of the network (also `--offline`).
    #[serde(default)]
    pub offline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendWeather {
    pub days: usize,
    pub params: WeatherParams,
}

/// Weather comes from exactly one of `csv`, `power` or `generate`, and may
/// then be extended with synthetic days.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub crop: CropParams,
    #[serde(default)]
    pub actions: Vec<ManagementAction>,
    pub csv: Option<PathBuf>,
    pub power: Option<PowerSource>,
    pub generate: Option<WeatherGen>,
    pub extend: Option<ExtendWeather>,
}

impl SimulateConfig {
    pub fn is_stochastic(&self) -> bool {
        self.generate.is_some() || self.extend.as_ref().is_some_and(|e| e.days > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisualizeConfig {
    #[serde(default)]
    pub chart: ChartSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoRunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub demo: DemoConfig,
}
