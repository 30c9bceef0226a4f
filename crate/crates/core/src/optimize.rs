//! Site-specific NPK recommendation: a scalarized yield / nutrient-use /
//! environmental objective over a yield model, penalty-based constraints,
//! simulated annealing and particle swarm search.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use libm::exp;
use serde::{Deserialize, Serialize};

use crate::generate::{YieldResponse, FIELD_ID, SOIL_COLUMNS};
use crate::model::{ModelError, Regressor};
use crate::npk::NpkRates;
use crate::rng::Rng;
use crate::stats;
use crate::table::{Column, Table, TableError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("yield model failed: {0}")]
    ModelFailure(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("observed series has zero variance")]
    ZeroVariance,
    #[error("need at least two values")]
    TooFewValues,
}

impl From<ModelError> for OptimizeError {
    fn from(e: ModelError) -> Self {
        OptimizeError::ModelFailure(e.to_string())
    }
}

/// Predicts yield (kg/ha) for one field's features under given rates.
pub trait YieldModel {
    /// Field feature columns, in the order `predict_yield` expects them.
    fn field_columns(&self) -> Vec<String>;

    fn predict_yield(&self, field: &[f64], rates: NpkRates) -> Result<f64, OptimizeError>;
}

impl YieldModel for YieldResponse {
    fn field_columns(&self) -> Vec<String> {
        SOIL_COLUMNS.iter().map(|s| s.to_string()).collect()
    }

    fn predict_yield(&self, field: &[f64], rates: NpkRates) -> Result<f64, OptimizeError> {
        Ok(self.expected(field, rates))
    }
}

/// Adapts a closure into a [`YieldModel`].
pub struct FnYield<F> {
    pub columns: Vec<String>,
    pub f: F,
}

impl<F: Fn(&[f64], NpkRates) -> f64> YieldModel for FnYield<F> {
    fn field_columns(&self) -> Vec<String> {
        self.columns.clone()
    }

    fn predict_yield(&self, field: &[f64], rates: NpkRates) -> Result<f64, OptimizeError> {
        Ok((self.f)(field, rates))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Field(usize),
    Rate(usize),
}

/// A fitted regressor used as a yield model: its features are split into the
/// three rate columns and everything else (the field's own features).
#[derive(Debug, Clone)]
pub struct SurrogateYield<R> {
    model: R,
    field_cols: Vec<String>,
    layout: Vec<Slot>,
}

impl<R: Regressor> SurrogateYield<R> {
    pub fn new(model: R, rate_cols: [&str; 3]) -> Result<Self, OptimizeError> {
        let mut field_cols = Vec::new();
        let mut layout = Vec::new();
        let mut seen = [false; 3];
        for name in model.feature_cols() {
            if let Some(r) = rate_cols.iter().position(|c| c == name) {
                seen[r] = true;
                layout.push(Slot::Rate(r));
            } else {
                layout.push(Slot::Field(field_cols.len()));
                field_cols.push(name.clone());
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(OptimizeError::ModelFailure(format!(
                "model has no `{}` feature",
                rate_cols[missing]
            )));
        }
        Ok(SurrogateYield { model, field_cols, layout })
    }

    pub fn model(&self) -> &R {
        &self.model
    }
}

impl<R: Regressor> YieldModel for SurrogateYield<R> {
    fn field_columns(&self) -> Vec<String> {
        self.field_cols.clone()
    }

    fn predict_yield(&self, field: &[f64], rates: NpkRates) -> Result<f64, OptimizeError> {
        let r = rates.to_array();
        let row: Vec<f64> = self
            .layout
            .iter()
            .map(|s| match *s {
                Slot::Field(i) => field[i],
                Slot::Rate(i) => r[i],
            })
            .collect();
        let y = self.model.predict_row(&row);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(OptimizeError::ModelFailure("non-finite prediction".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w_yield: f64,
    pub w_nue: f64,
    pub w_env: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub n: (f64, f64),
    pub p: (f64, f64),
    pub k: (f64, f64),
}

impl Bounds {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Bounds { n: (lo, hi), p: (lo, hi), k: (lo, hi) }
    }

    pub fn to_array(self) -> [(f64, f64); 3] {
        [self.n, self.p, self.k]
    }

    pub fn midpoint(&self) -> NpkRates {
        let b = self.to_array();
        NpkRates::from_array([0, 1, 2].map(|i| 0.5 * (b[i].0 + b[i].1)))
    }

    pub fn clip(&self, r: NpkRates) -> NpkRates {
        let b = self.to_array();
        let x = r.to_array();
        NpkRates::from_array([0, 1, 2].map(|i| x[i].clamp(b[i].0, b[i].1)))
    }

    pub fn contains(&self, r: NpkRates) -> bool {
        self.clip(r) == r
    }

    fn validate(&self) -> Result<(), OptimizeError> {
        for (lo, hi) in self.to_array() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(OptimizeError::InvalidConfig("bounds require finite lo <= hi".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub weights: Weights,
    pub bounds: Bounds,
    /// Cap on n + p + k; `None` leaves the total unconstrained.
    #[serde(default)]
    pub total_cap: Option<f64>,
    /// Per-nutrient rate above which environmental load accrues.
    pub sensitivity: [f64; 3],
    /// Penalty per kg/ha of constraint violation.
    pub penalty: f64,
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let w = self.weights;
        if [w.w_yield, w.w_nue, w.w_env].iter().any(|v| !(*v >= 0.0)) {
            return Err(OptimizeError::InvalidObjective("weights must be >= 0".into()));
        }
        if w.w_yield + w.w_nue + w.w_env <= 0.0 {
            return Err(OptimizeError::InvalidObjective("at least one weight must be > 0".into()));
        }
        if !(self.penalty > 0.0) {
            return Err(OptimizeError::InvalidObjective("penalty must be > 0".into()));
        }
        self.bounds
            .validate()
            .map_err(|_| OptimizeError::InvalidObjective("bounds require lo <= hi".into()))
    }

    /// Total-cap excess plus out-of-bounds excess, in kg/ha.
    pub fn violation(&self, r: NpkRates) -> f64 {
        let mut v = match self.total_cap {
            Some(cap) => (r.total() - cap).max(0.0),
            None => 0.0,
        };
        for (x, (lo, hi)) in r.to_array().iter().zip(self.bounds.to_array()) {
            v += (lo - x).max(0.0) + (x - hi).max(0.0);
        }
        v
    }

    /// Σ max(0, xᵢ − sᵢ)².
    pub fn env_load(&self, r: NpkRates) -> f64 {
        r.to_array()
            .iter()
            .zip(self.sensitivity)
            .map(|(x, s)| {
                let e = (x - s).max(0.0);
                e * e
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub score: f64,
    /// ŷ(rates) − ŷ(0).
    pub delta_yield: f64,
    pub nue: f64,
    pub env: f64,
    pub violation: f64,
}

pub fn objective<M: YieldModel + ?Sized>(
    rates: NpkRates,
    field: &[f64],
    model: &M,
    spec: &ObjectiveSpec,
) -> Result<ObjectiveValue, OptimizeError> {
    let base = model.predict_yield(field, NpkRates::ZERO)?;
    objective_with_baseline(rates, field, model, spec, base)
}

fn objective_with_baseline<M: YieldModel + ?Sized>(
    rates: NpkRates,
    field: &[f64],
    model: &M,
    spec: &ObjectiveSpec,
    baseline: f64,
) -> Result<ObjectiveValue, OptimizeError> {
    let delta_yield = model.predict_yield(field, rates)? - baseline;
    let total = rates.total();
    let nue = if total > 0.0 { delta_yield / total } else { 0.0 };
    let env = spec.env_load(rates);
    let violation = spec.violation(rates);
    let w = spec.weights;
    let score = w.w_yield * delta_yield + w.w_nue * nue - w.w_env * env - spec.penalty * violation;
    Ok(ObjectiveValue { score, delta_yield, nue, env, violation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    /// Initial temperature, relative to the objective's spread over the
    /// corners and midpoint of the search box.
    pub t0: f64,
    pub alpha: f64,
    pub iters: usize,
    /// Proposal standard deviation, kg/ha.
    pub step_sigma: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig { t0: 50.0, alpha: 0.99, iters: 5000, step_sigma: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub particles: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub iters: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig { particles: 30, inertia: 0.7, c1: 1.5, c2: 1.5, iters: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default)]
    pub sa: SaConfig,
    #[serde(default)]
    pub pso: PsoConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub best: NpkRates,
    pub best_score: f64,
    /// Best score seen so far, one entry per iteration; non-decreasing.
    pub trace: Vec<f64>,
    /// Per-iteration accept/reject decisions (annealing only).
    pub accepted: Vec<bool>,
}

fn corners_and_mid(bounds: &Bounds) -> Vec<NpkRates> {
    let b = bounds.to_array();
    let mut pts = vec![bounds.midpoint()];
    for mask in 0..8u8 {
        pts.push(NpkRates::from_array([0, 1, 2].map(|i| if mask >> i & 1 == 1 { b[i].1 } else { b[i].0 })));
    }
    pts
}

/// Simulated annealing from the box midpoint with Gaussian proposals clipped
/// to the bounds and geometric cooling.
///
/// Metropolis acceptance uses `exp(Δ / (T · s))`, where `s` is the spread
/// (max − min) of the objective over the box corners and midpoint (1 when
/// flat). This makes every decision invariant to positive rescaling of the
/// objective.
pub fn simulated_annealing<F>(
    mut f: F,
    bounds: &Bounds,
    config: &SaConfig,
    rng: &Rng,
) -> Result<SolverResult, OptimizeError>
where
    F: FnMut(NpkRates) -> Result<f64, OptimizeError>,
{
    bounds.validate()?;
    if !(config.t0 > 0.0) || !(config.alpha > 0.0 && config.alpha < 1.0) || config.iters == 0 || !(config.step_sigma >= 0.0) {
        return Err(OptimizeError::InvalidConfig(
            "annealing needs t0 > 0, 0 < alpha < 1, iters >= 1, step_sigma >= 0".into(),
        ));
    }
    let probes = corners_and_mid(bounds)
        .into_iter()
        .map(&mut f)
        .collect::<Result<Vec<_>, _>>()?;
    let spread = probes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - probes.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = if spread.is_finite() && spread > 0.0 { spread } else { 1.0 };

    let mut rng = rng.split("sa");
    let mut current = bounds.midpoint();
    let mut current_score = probes[0];
    let mut best = current;
    let mut best_score = current_score;
    let mut temperature = config.t0;
    let mut trace = Vec::with_capacity(config.iters);
    let mut accepted = Vec::with_capacity(config.iters);
    for _ in 0..config.iters {
        let x = current.to_array();
        let proposal = bounds.clip(NpkRates::from_array(
            [0, 1, 2].map(|i| x[i] + config.step_sigma * rng.standard_normal()),
        ));
        let score = f(proposal)?;
        let delta = score - current_score;
        let u = rng.uniform();
        let accept = delta >= 0.0 || u < exp(delta / (temperature * scale));
        if accept {
            current = proposal;
            current_score = score;
        }
        if score > best_score {
            best = proposal;
            best_score = score;
        }
        accepted.push(accept);
        trace.push(best_score);
        temperature *= config.alpha;
    }
    Ok(SolverResult { best, best_score, trace, accepted })
}

/// Global-best particle swarm. Each particle draws from its own child stream
/// and the global best is updated synchronously after every sweep, so results
/// do not depend on evaluation order.
pub fn particle_swarm<F>(
    mut f: F,
    bounds: &Bounds,
    config: &PsoConfig,
    rng: &Rng,
) -> Result<SolverResult, OptimizeError>
where
    F: FnMut(NpkRates) -> Result<f64, OptimizeError>,
{
    bounds.validate()?;
    if config.particles < 2 || config.iters == 0 {
        return Err(OptimizeError::InvalidConfig("swarm needs particles >= 2 and iters >= 1".into()));
    }
    let b = bounds.to_array();
    let mut streams: Vec<Rng> = (0..config.particles)
        .map(|i| rng.split(&format!("pso/particle/{i}")))
        .collect();
    let mut pos: Vec<[f64; 3]> = streams
        .iter_mut()
        .map(|r| [0, 1, 2].map(|i| r.uniform_range(b[i].0, b[i].1)))
        .collect();
    let mut vel = vec![[0.0; 3]; config.particles];
    let mut pbest = pos.clone();
    let mut pbest_score = pos
        .iter()
        .map(|x| f(NpkRates::from_array(*x)))
        .collect::<Result<Vec<_>, _>>()?;
    let argmax = |scores: &[f64]| {
        scores
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if *s > scores[best] { i } else { best })
    };
    let mut g = argmax(&pbest_score);
    let mut gbest = pbest[g];
    let mut gbest_score = pbest_score[g];
    let mut trace = Vec::with_capacity(config.iters);
    for _ in 0..config.iters {
        for p in 0..config.particles {
            let r = &mut streams[p];
            for d in 0..3 {
                let (r1, r2) = (r.uniform(), r.uniform());
                let v = config.inertia * vel[p][d]
                    + config.c1 * r1 * (pbest[p][d] - pos[p][d])
                    + config.c2 * r2 * (gbest[d] - pos[p][d]);
                let mut x = pos[p][d] + v;
                let mut v = v;
                if x < b[d].0 {
                    x = b[d].0;
                    v = 0.0;
                } else if x > b[d].1 {
                    x = b[d].1;
                    v = 0.0;
                }
                pos[p][d] = x;
                vel[p][d] = v;
            }
        }
        for p in 0..config.particles {
            let s = f(NpkRates::from_array(pos[p]))?;
            if s > pbest_score[p] {
                pbest_score[p] = s;
                pbest[p] = pos[p];
            }
        }
        g = argmax(&pbest_score);
        if pbest_score[g] > gbest_score {
            gbest_score = pbest_score[g];
            gbest = pbest[g];
        }
        trace.push(gbest_score);
    }
    Ok(SolverResult { best: NpkRates::from_array(gbest), best_score: gbest_score, trace, accepted: Vec::new() })
}

pub const REC_COLUMNS: [&str; 8] =
    ["field_id", "rec_n", "rec_p", "rec_k", "predicted_gain", "nue", "env_score", "solver_used"];

/// Run both solvers per field row and keep the better result.
///
/// The lower-bound corner ("fertilize as little as allowed") is also scored;
/// it is recommended, with `solver_used = "baseline"`, whenever neither solver
/// strictly beats it.
pub fn recommend_npk<M: YieldModel + ?Sized>(
    fields: &Table,
    model: &M,
    spec: &ObjectiveSpec,
    config: &SolverConfig,
    rng: &Rng,
) -> Result<Table, OptimizeError> {
    spec.validate()?;
    let cols = model.field_columns();
    let data: Vec<Vec<f64>> = cols.iter().map(|c| fields.numeric(c)).collect::<Result<_, _>>()?;
    let ids: Vec<i64> = match fields.column(FIELD_ID) {
        Ok(Column::Int(v)) => v.clone(),
        _ => (0..fields.n_rows() as i64).collect(),
    };
    let lower = NpkRates::from_array(spec.bounds.to_array().map(|(lo, _)| lo));
    let mut out: [Vec<f64>; 6] = Default::default();
    let mut solver_used = Vec::with_capacity(fields.n_rows());
    for row in 0..fields.n_rows() {
        let field: Vec<f64> = data.iter().map(|c| c[row]).collect();
        let baseline = model.predict_yield(&field, NpkRates::ZERO)?;
        let score = |r: NpkRates| objective_with_baseline(r, &field, model, spec, baseline).map(|v| v.score);
        let field_rng = rng.split(&format!("field/{row}"));
        let sa = simulated_annealing(score, &spec.bounds, &config.sa, &field_rng)?;
        let pso = particle_swarm(score, &spec.bounds, &config.pso, &field_rng)?;
        let (mut rec, mut best, mut used) = if pso.best_score > sa.best_score {
            (pso.best, pso.best_score, "pso")
        } else {
            (sa.best, sa.best_score, "sa")
        };
        let floor = score(lower)?;
        if floor >= best {
            rec = lower;
            best = floor;
            used = "baseline";
        }
        let _ = best;
        let v = objective_with_baseline(rec, &field, model, spec, baseline)?;
        for (col, x) in out.iter_mut().zip([rec.n, rec.p, rec.k, v.delta_yield, v.nue, v.env]) {
            col.push(x);
        }
        solver_used.push(used.to_string());
    }
    let [n, p, k, gain, nue, env] = out;
    let mut t = Table::new();
    t.push_column(REC_COLUMNS[0], Column::Int(ids))?;
    for (name, col) in REC_COLUMNS[1..7].iter().zip([n, p, k, gain, nue, env]) {
        t.push_column(*name, Column::Float(col))?;
    }
    t.push_column(REC_COLUMNS[7], Column::Category(solver_used))?;
    Ok(t)
}

/// `max(0, 1 − Var(recommended − observed) / Var(observed)) × 100`.
pub fn explained_variability(recommended: &[f64], observed: &[f64]) -> Result<f64, OptimizeError> {
    if recommended.len() != observed.len() {
        return Err(OptimizeError::LengthMismatch(recommended.len(), observed.len()));
    }
    if observed.len() < 2 {
        return Err(OptimizeError::TooFewValues);
    }
    let var_obs = stats::variance(observed);
    if !(var_obs > 0.0) {
        return Err(OptimizeError::ZeroVariance);
    }
    let resid: Vec<f64> = recommended.iter().zip(observed).map(|(r, o)| r - o).collect();
    Ok((1.0 - stats::variance(&resid) / var_obs).max(0.0) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> FnYield<impl Fn(&[f64], NpkRates) -> f64> {
        FnYield { columns: Vec::new(), f: |_: &[f64], r: NpkRates| 10.0 + 2.0 * r.n - 0.01 * r.n * r.n }
    }

    fn spec(weights: Weights) -> ObjectiveSpec {
        ObjectiveSpec {
            weights,
            bounds: Bounds::uniform(0.0, 200.0),
            total_cap: None,
            sensitivity: [0.0; 3],
            penalty: 100.0,
        }
    }

    const YIELD_ONLY: Weights = Weights { w_yield: 1.0, w_nue: 0.0, w_env: 0.0 };

    #[test]
    fn zero_rates_score_zero() {
        let s = ObjectiveSpec { sensitivity: [10.0; 3], ..spec(Weights { w_yield: 1.0, w_nue: 2.0, w_env: 3.0 }) };
        let v = objective(NpkRates::ZERO, &[], &quad(), &s).unwrap();
        assert_eq!((v.delta_yield, v.nue, v.env, v.score), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn total_cap_penalty_is_linear() {
        let free = spec(YIELD_ONLY);
        let capped = ObjectiveSpec { total_cap: Some(140.0), ..free };
        let r = NpkRates::new(100.0, 30.0, 20.0);
        let a = objective(r, &[], &quad(), &free).unwrap().score;
        let b = objective(r, &[], &quad(), &capped).unwrap().score;
        assert!((a - b - 100.0 * 10.0).abs() < 1e-9);
        assert_eq!(capped.violation(NpkRates::new(10.0, 10.0, 10.0)), 0.0);
    }

    #[test]
    fn out_of_bounds_excess_counts() {
        let s = spec(YIELD_ONLY);
        assert!((s.violation(NpkRates::new(-5.0, 210.0, 50.0)) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        let f = |_: NpkRates| Ok(0.0);
        let b = Bounds::uniform(0.0, 1.0);
        assert!(simulated_annealing(f, &b, &SaConfig { alpha: 1.0, ..SaConfig::default() }, &Rng::new(0)).is_err());
        assert!(simulated_annealing(f, &b, &SaConfig { iters: 0, ..SaConfig::default() }, &Rng::new(0)).is_err());
        assert!(particle_swarm(f, &b, &PsoConfig { particles: 1, ..PsoConfig::default() }, &Rng::new(0)).is_err());
        assert!(spec(Weights { w_yield: 0.0, w_nue: 0.0, w_env: 0.0 }).validate().is_err());
    }

    #[test]
    fn single_iteration_annealing() {
        let q = quad();
        let s = spec(YIELD_ONLY);
        let res = simulated_annealing(
            |r| objective(r, &[], &q, &s).map(|v| v.score),
            &s.bounds,
            &SaConfig { iters: 1, ..SaConfig::default() },
            &Rng::new(3),
        )
        .unwrap();
        assert_eq!(res.trace.len(), 1);
        let mid = s.bounds.midpoint();
        assert!(res.best == mid || (res.best.n - mid.n).abs() < 50.0);
    }

    #[test]
    fn degenerate_swarm_starts_at_optimum() {
        let q = quad();
        let s = ObjectiveSpec { bounds: Bounds { n: (100.0, 100.0), p: (0.0, 0.0), k: (0.0, 0.0) }, ..spec(YIELD_ONLY) };
        let res = particle_swarm(|r| objective(r, &[], &q, &s).map(|v| v.score), &s.bounds, &PsoConfig::default(), &Rng::new(1))
            .unwrap();
        assert_eq!(res.best, NpkRates::new(100.0, 0.0, 0.0));
        assert!(res.trace.iter().all(|v| (*v - 100.0).abs() < 1e-12));
    }

    #[test]
    fn env_only_recommends_nothing() {
        let q = quad();
        let s = spec(Weights { w_yield: 0.0, w_nue: 0.0, w_env: 1.0 });
        let fields = Table::from_columns([("field_id", Column::Int(vec![7, 8]))]).unwrap();
        let cfg = SolverConfig { sa: SaConfig { iters: 300, ..SaConfig::default() }, pso: PsoConfig { iters: 30, ..PsoConfig::default() } };
        let recs = recommend_npk(&fields, &q, &s, &cfg, &Rng::new(2)).unwrap();
        for c in ["rec_n", "rec_p", "rec_k"] {
            assert!(recs.float(c).unwrap().iter().all(|v| *v == 0.0));
        }
        assert_eq!(recs.column("field_id").unwrap(), &Column::Int(vec![7, 8]));
    }

    #[test]
    fn explained_variability_cases() {
        let obs = [1.0, 4.0, 2.0, 8.0, 5.0];
        assert_eq!(explained_variability(&obs, &obs).unwrap(), 100.0);
        let shifted: Vec<f64> = obs.iter().map(|v| v + 12.5).collect();
        assert!((explained_variability(&shifted, &obs).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(explained_variability(&obs[..2], &obs), Err(OptimizeError::LengthMismatch(2, 5)));
        assert_eq!(explained_variability(&[1.0, 2.0], &[3.0, 3.0]), Err(OptimizeError::ZeroVariance));
    }
}
