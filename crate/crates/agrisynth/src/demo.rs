//! End-to-end scenario: a season-imbalanced trials table, temporal holdout
//! on the dominant season, and a stacked model trained with and without
//! SMOTE augmentation of the low-yield stratum.

use agrisynth_core::augment::{self, Amount, AugmentPlan, Method};
use agrisynth_core::generate::{
    gen_trials, RateRanges, TrialGenParams, YieldResponse, RATE_COLUMNS, SEASON, SOIL_COLUMNS, YIELD,
};
use agrisynth_core::model::{self, EvalReport, Regressor, RegressorSpec, StackSpec, StackedModel};
use agrisynth_core::table::CmpOp;
use agrisynth_core::validate::{self, ValidationOptions, ValidationReport};
use agrisynth_core::{Predicate, Rng, Table};
use serde::{Deserialize, Serialize};

use crate::csv_io::{read_csv_from, Schema};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoConfig {
    pub trials: TrialGenParams,
    pub test_season: String,
    /// Synthetic rows as a percentage of the training rows.
    pub growth_pct: f64,
    pub k: usize,
    /// SMOTE seeds come from training rows with yield at or below this
    /// quantile; `None` uses every training row.
    pub stratum_quantile: Option<f64>,
    pub stack: StackSpec,
    pub validation: ValidationOptions,
}

pub fn default_trials() -> TrialGenParams {
    let sd = [0.6, 0.8, 8.0, 6.0, 30.0];
    let mut cov = [[0.0; 5]; 5];
    for i in 0..5 {
        cov[i][i] = sd[i] * sd[i];
    }
    cov[1][2] = 0.5 * sd[1] * sd[2];
    cov[2][1] = cov[1][2];
    TrialGenParams {
        n: 1200,
        soil_means: [6.2, 1.8, 25.0, 18.0, 160.0],
        soil_cov: cov,
        rate_ranges: RateRanges { n: (0.0, 200.0), p: (0.0, 90.0), k: (0.0, 120.0) },
        yield_response: YieldResponse {
            intercept: 1500.0,
            beta: [22.0, 14.0, 8.0],
            gamma: [0.07, 0.10, 0.045],
            soil: [80.0, 150.0, 6.0, 6.0, 1.0],
            noise_sigma: 250.0,
        },
        seasons: vec![("A".into(), 0.15), ("B".into(), 0.15), ("C".into(), 0.70)],
        season_factors: vec![1.0, 1.0, 0.8],
    }
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            trials: default_trials(),
            test_season: "C".into(),
            growth_pct: 145.2,
            k: 5,
            stratum_quantile: Some(0.25),
            stack: StackSpec {
                bases: vec![
                    RegressorSpec::Ridge { lambda: 1.0 },
                    RegressorSpec::Knn { k: 10 },
                    RegressorSpec::Tree { max_depth: 6, min_leaf: 10 },
                ],
                folds: 5,
            },
            validation: ValidationOptions::default(),
        }
    }
}

pub fn feature_columns() -> Vec<String> {
    SOIL_COLUMNS.iter().chain(RATE_COLUMNS.iter()).map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub seed: u64,
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub synthetic_rows: usize,
    /// Realized growth of the training set, percent.
    pub growth_pct: f64,
    pub unaugmented: EvalReport,
    pub augmented: EvalReport,
    /// Test-season evaluation of each base learner fitted alone on the
    /// un-augmented training set.
    pub base_learners: Vec<(String, EvalReport)>,
    /// Synthetic training rows against the original training rows.
    pub validation: ValidationReport,
}

impl DemoReport {
    pub fn augmentation_helped(&self) -> bool {
        self.augmented.mape <= self.unaugmented.mape
    }

    pub fn overlap(&self) -> Option<f64> {
        self.validation.mahalanobis_overlap
    }
}

const BUNDLED_TRIALS: &str = include_str!("../data/trials.csv");
const BUNDLED_TRIALS_SCHEMA: &str = include_str!("../data/trials.schema.json");

/// The trials table shipped in `data/trials.csv` (generated from
/// `configs/trials.toml`, which matches [`default_trials`]).
pub fn bundled_trials() -> Table {
    let schema: Schema = serde_json::from_str(BUNDLED_TRIALS_SCHEMA).expect("bundled schema parses");
    read_csv_from(BUNDLED_TRIALS.as_bytes(), Some(&schema)).expect("bundled trials parse")
}

/// The default stack fitted on every row of the bundled trials, predicting
/// `yield_kgha` from [`feature_columns`].
pub fn pretrained_stack(seed: u64) -> Result<StackedModel, Error> {
    let trials = bundled_trials();
    let y = trials.float(YIELD)?.to_vec();
    let stack = DemoConfig::default().stack;
    Ok(model::fit_stacked_columns(&stack, &trials, &feature_columns(), &y, &Rng::new(seed).split("pretrained"))?)
}

/// Generate trials from `config.trials` and run the scenario on them.
pub fn run(config: &DemoConfig, seed: u64) -> Result<DemoReport, Error> {
    let trials = gen_trials(&config.trials, &Rng::new(seed).split("demo/trials"))?;
    run_on(&trials, config, seed)
}

/// Run the scenario on an existing trials table; `config.trials` is unused.
pub fn run_on(trials: &Table, config: &DemoConfig, seed: u64) -> Result<DemoReport, Error> {
    let rng = Rng::new(seed);
    let (train, test) = model::temporal_split(trials, SEASON, &[config.test_season.as_str()])?;
    let features = feature_columns();
    let y_train = train.float(YIELD)?.to_vec();
    let y_test = test.float(YIELD)?;

    let stacked = model::fit_stacked_columns(&config.stack, &train, &features, &y_train, &rng.split("demo/stack"))?;
    let unaugmented = model::evaluate(&stacked, &test, y_test)?;
    let mut base_learners = Vec::new();
    for spec in &config.stack.bases {
        let m = model::fit_columns(spec, &train, &features, &y_train)?;
        base_learners.push((model::describe(spec), model::evaluate(&m, &test, y_test)?));
    }

    let plan = AugmentPlan {
        method: Method::Smote { k: config.k, feature_cols: features.clone() },
        stratum: config.stratum_quantile.map(|q| Predicate::quantile(YIELD, CmpOp::Le, q)),
        amount: Amount::GrowthPct(config.growth_pct),
    };
    let augmented_train = augment::stratified_oversample(&train, &plan, &rng.split("demo/smote"))?;
    let y_aug = augmented_train.float(YIELD)?.to_vec();
    let stacked_aug =
        model::fit_stacked_columns(&config.stack, &augmented_train, &features, &y_aug, &rng.split("demo/stack"))?;
    let augmented = model::evaluate(&stacked_aug, &test, y_test)?;

    let synthetic = augment::synthetic_rows(&augmented_train)?;
    let mut opts = config.validation.clone();
    if opts.columns.is_none() {
        opts.columns = Some(features.iter().cloned().chain([YIELD.to_string()]).collect());
    }
    let validation = validate::validate_tables(&train, &synthetic, &opts)?;
    debug_assert_eq!(stacked.feature_cols(), stacked_aug.feature_cols());

    Ok(DemoReport {
        seed,
        rows: trials.n_rows(),
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        synthetic_rows: synthetic.n_rows(),
        growth_pct: 100.0 * synthetic.n_rows() as f64 / train.n_rows() as f64,
        unaugmented,
        augmented,
        base_learners,
        validation,
    })
}
