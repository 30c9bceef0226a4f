//! Row-level augmentation: SMOTE interpolation (with SMOTER-style target
//! interpolation), stratum-targeted oversampling, Gaussian jitter and
//! least-squares extrapolation along an index column.
//!
//! Every function returns the input rows untouched, followed by the new rows,
//! with a `synthetic` provenance column (`"false"` / `"true"`).

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::stats::{self, round_half_up};
use crate::table::{Column, Field, Predicate, Table, TableError};

pub const SYNTHETIC: &str = "synthetic";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("k = {k} neighbours requested but only {available} other rows exist")]
    KTooLarge { k: usize, available: usize },
    #[error("feature column `{0}` is not float64")]
    NonNumericFeature(String),
    #[error("column `{0}` is not float64")]
    NonNumericColumn(String),
    #[error("stratum matches no rows")]
    EmptyStratum,
    #[error("index column needs at least 3 distinct values, found {0}")]
    DegenerateIndex(usize),
    #[error("invalid augmentation plan: {0}")]
    InvalidPlan(String),
}

/// How many rows to add.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amount {
    Rows(usize),
    /// Percentage of the full input table's row count, rounded half-up.
    GrowthPct(f64),
}

impl Amount {
    pub fn resolve(self, total_rows: usize) -> Result<usize, AugmentError> {
        match self {
            Amount::Rows(n) => Ok(n),
            Amount::GrowthPct(pct) if pct >= 0.0 && pct.is_finite() => {
                Ok(round_half_up(pct / 100.0 * total_rows as f64) as usize)
            }
            Amount::GrowthPct(pct) => Err(AugmentError::InvalidPlan(alloc::format!(
                "growth_pct must be >= 0, got {pct}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Smote { k: usize, feature_cols: Vec<String> },
    Jitter { sigmas: Vec<(String, f64)> },
    /// Extrapolate beyond the index; the resolved amount is the horizon.
    Extrapolate { index_col: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    #[serde(flatten)]
    pub method: Method,
    #[serde(default)]
    pub stratum: Option<Predicate>,
    pub amount: Amount,
}

fn provenance_flags(table: &Table) -> Result<Vec<String>, TableError> {
    if table.has_column(SYNTHETIC) {
        Ok(table.category(SYNTHETIC)?.to_vec())
    } else {
        Ok(vec!["false".to_owned(); table.n_rows()])
    }
}

/// Append `new_rows` (same schema as `table`, without provenance) to `table`
/// and mark provenance.
fn assemble(table: &Table, new_rows: Table) -> Result<Table, AugmentError> {
    let mut flags = provenance_flags(table)?;
    let base = if table.has_column(SYNTHETIC) {
        table.drop_column(SYNTHETIC)?
    } else {
        table.clone()
    };
    flags.extend(core::iter::repeat_n("true".to_owned(), new_rows.n_rows()));
    let mut out = base.concat(&new_rows)?;
    out.push_column(SYNTHETIC, Column::Category(flags))?;
    Ok(out)
}

/// Table with the provenance column removed (if present), i.e. the schema
/// new rows are built in.
fn payload(table: &Table) -> Result<Table, TableError> {
    if table.has_column(SYNTHETIC) {
        table.drop_column(SYNTHETIC)
    } else {
        Ok(table.clone())
    }
}

fn feature_matrix(table: &Table, feature_cols: &[&str]) -> Result<Vec<Vec<f64>>, AugmentError> {
    feature_cols
        .iter()
        .map(|c| match table.column(c)? {
            Column::Float(v) => Ok(v.clone()),
            _ => Err(AugmentError::NonNumericFeature((*c).to_owned())),
        })
        .collect()
}

fn z_scales(features: &[Vec<f64>]) -> Vec<(f64, f64)> {
    features
        .iter()
        .map(|col| {
            let sd = stats::std_dev(col);
            (stats::mean(col), if sd > 0.0 { sd } else { 1.0 })
        })
        .collect()
}

/// `k` nearest other rows among `pool` (by Euclidean distance on z-scored
/// features), ties broken by lowest row index.
fn nearest(row: usize, pool: &[usize], z: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&j| j != row)
        .map(|&j| {
            let dist: f64 = z.iter().map(|c| (c[row] - c[j]) * (c[row] - c[j])).sum();
            (dist, j)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Core SMOTE draw over the rows in `pool`. Returns only the new rows.
fn smote_rows(
    table: &Table,
    pool: &[usize],
    feature_cols: &[&str],
    k: usize,
    n_new: usize,
    rng: &Rng,
) -> Result<Table, AugmentError> {
    if pool.len() < 2 {
        return Err(AugmentError::TooFewRows { needed: 2, found: pool.len() });
    }
    if k == 0 {
        return Err(AugmentError::InvalidPlan("k must be >= 1".into()));
    }
    if k > pool.len() - 1 {
        return Err(AugmentError::KTooLarge { k, available: pool.len() - 1 });
    }
    let features = feature_matrix(table, feature_cols)?;
    // Standardize with the statistics of the whole input table.
    let scales = z_scales(&features);
    let z: Vec<Vec<f64>> = features
        .iter()
        .zip(&scales)
        .map(|(col, (m, s))| col.iter().map(|x| (x - m) / s).collect())
        .collect();

    let mut draws = rng.split("smote/draws");
    let mut neighbours: Vec<Option<Vec<usize>>> = vec![None; table.n_rows()];
    let mut pairs = Vec::with_capacity(n_new);
    for _ in 0..n_new {
        let seed = pool[draws.index(pool.len())];
        let nn = neighbours[seed].get_or_insert_with(|| nearest(seed, pool, &z, k));
        let other = nn[draws.index(nn.len())];
        let lambda = draws.uniform();
        pairs.push((seed, other, lambda));
    }

    let base = payload(table)?;
    let mut out = Table::new();
    for f in base.fields() {
        let data = match &f.data {
            Column::Float(v) => Column::Float(
                pairs
                    .iter()
                    .map(|&(i, j, l)| v[i] + l * (v[j] - v[i]))
                    .collect(),
            ),
            other => other.take(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()),
        };
        out.push_field(Field { name: f.name.clone(), units: f.units.clone(), data })?;
    }
    Ok(out)
}

/// SMOTE over every row of `table`.
pub fn smote_augment(
    table: &Table,
    feature_cols: &[&str],
    k: usize,
    n_new: usize,
    rng: &Rng,
) -> Result<Table, AugmentError> {
    let pool: Vec<usize> = (0..table.n_rows()).collect();
    let new_rows = smote_rows(table, &pool, feature_cols, k, n_new, rng)?;
    assemble(table, new_rows)
}

fn jitter_rows(
    table: &Table,
    pool: &[usize],
    sigmas: &[(String, f64)],
    n_new: usize,
    rng: &Rng,
) -> Result<Table, AugmentError> {
    for (col, sigma) in sigmas {
        match table.column(col)? {
            Column::Float(_) => {}
            _ => return Err(AugmentError::NonNumericColumn(col.clone())),
        }
        if !(*sigma >= 0.0) {
            return Err(AugmentError::InvalidPlan(alloc::format!("sigma for `{col}` must be >= 0")));
        }
    }
    if pool.is_empty() {
        return Err(AugmentError::TooFewRows { needed: 1, found: 0 });
    }
    let mut pick = rng.split("jitter/rows");
    let rows: Vec<usize> = (0..n_new).map(|_| pool[pick.index(pool.len())]).collect();
    let mut out = payload(table)?.take_rows(&rows);
    let mut noise = rng.split("jitter/noise");
    // Column-major noise so each column's draws are contiguous in the stream.
    let mut jittered = Table::new();
    for f in out.fields() {
        let sigma = sigmas.iter().find(|(c, _)| *c == f.name).map(|(_, s)| *s);
        let data = match (&f.data, sigma) {
            (Column::Float(v), Some(s)) => {
                Column::Float(v.iter().map(|x| x + s * noise.standard_normal()).collect())
            }
            (other, _) => other.clone(),
        };
        jittered.push_field(Field { name: f.name.clone(), units: f.units.clone(), data })?;
    }
    out = jittered;
    Ok(out)
}

/// New rows are resampled originals plus independent normal noise per
/// jittered column.
pub fn jitter_augment(
    table: &Table,
    sigmas: &[(String, f64)],
    n_new: usize,
    rng: &Rng,
) -> Result<Table, AugmentError> {
    let pool: Vec<usize> = (0..table.n_rows()).collect();
    let new_rows = jitter_rows(table, &pool, sigmas, n_new, rng)?;
    assemble(table, new_rows)
}

fn index_values(table: &Table, index_col: &str) -> Result<Vec<f64>, AugmentError> {
    match table.column(index_col)? {
        Column::Float(v) => Ok(v.clone()),
        Column::Int(v) => Ok(v.iter().map(|&x| x as f64).collect()),
        Column::Date(v) => Ok(v.iter().map(|d| d.days() as f64).collect()),
        other => Err(AugmentError::Table(TableError::TypeMismatch {
            column: index_col.to_owned(),
            expected: "numeric or date",
            found: other.dtype(),
        })),
    }
}

/// Ordinary least squares `y = a + b x`.
pub fn ols_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = stats::mean(x);
    let my = stats::mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn extrapolate_rows(
    table: &Table,
    pool: &[usize],
    index_col: &str,
    horizon: usize,
    rng: &Rng,
) -> Result<Table, AugmentError> {
    let all_x = index_values(table, index_col)?;
    let x: Vec<f64> = pool.iter().map(|&i| all_x[i]).collect();
    let mut distinct = x.clone();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(AugmentError::DegenerateIndex(distinct.len()));
    }
    let gaps: Vec<f64> = distinct.windows(2).map(|w| w[1] - w[0]).collect();
    let mut step = stats::median(&gaps);
    let integral = !matches!(table.column(index_col)?, Column::Float(_));
    if integral {
        step = round_half_up(step).max(1.0);
    }
    let x_max = *distinct.last().expect("non-empty");
    let new_x: Vec<f64> = (1..=horizon).map(|h| x_max + step * h as f64).collect();
    // Non-float, non-index columns are carried from the latest observation.
    let last = pool
        .iter()
        .copied()
        .max_by(|&a, &b| all_x[a].total_cmp(&all_x[b]).then(b.cmp(&a)))
        .expect("non-empty pool");

    let mut resid_rng = rng.split("extrapolate/residuals");
    let base = payload(table)?;
    let mut out = Table::new();
    for f in base.fields() {
        let data = if f.name == index_col {
            match &f.data {
                Column::Float(_) => Column::Float(new_x.clone()),
                Column::Int(_) => Column::Int(new_x.iter().map(|&v| v as i64).collect()),
                Column::Date(_) => Column::Date(
                    new_x.iter().map(|&v| crate::date::Date::from_days(v as i32)).collect(),
                ),
                _ => unreachable!("index dtype checked above"),
            }
        } else {
            match &f.data {
                Column::Float(v) => {
                    let y: Vec<f64> = pool.iter().map(|&i| v[i]).collect();
                    let (a, b) = ols_line(&x, &y);
                    let resid: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - (a + b * xi)).collect();
                    Column::Float(
                        new_x
                            .iter()
                            .map(|xn| a + b * xn + resid[resid_rng.index(resid.len())])
                            .collect(),
                    )
                }
                other => other.take(&vec![last; horizon]),
            }
        };
        out.push_field(Field { name: f.name.clone(), units: f.units.clone(), data })?;
    }
    Ok(out)
}

/// Per float column, fit OLS against `index_col` and emit `horizon` rows past
/// the largest index (step = median gap), adding bootstrapped residuals.
pub fn extrapolate_augment(
    table: &Table,
    index_col: &str,
    horizon: usize,
    rng: &Rng,
) -> Result<Table, AugmentError> {
    let pool: Vec<usize> = (0..table.n_rows()).collect();
    let new_rows = extrapolate_rows(table, &pool, index_col, horizon, rng)?;
    assemble(table, new_rows)
}

/// Apply `plan.method` to the stratum rows only and append the result to the
/// full table. Growth percentages are relative to the full table.
pub fn stratified_oversample(table: &Table, plan: &AugmentPlan, rng: &Rng) -> Result<Table, AugmentError> {
    let n_new = plan.amount.resolve(table.n_rows())?;
    let pool: Vec<usize> = match &plan.stratum {
        None => (0..table.n_rows()).collect(),
        Some(p) => p
            .mask(table)?
            .into_iter()
            .enumerate()
            .filter_map(|(i, keep)| keep.then_some(i))
            .collect(),
    };
    if pool.is_empty() {
        return Err(AugmentError::EmptyStratum);
    }
    let new_rows = match &plan.method {
        Method::Smote { k, feature_cols } => {
            let cols: Vec<&str> = feature_cols.iter().map(String::as_str).collect();
            smote_rows(table, &pool, &cols, *k, n_new, rng)?
        }
        Method::Jitter { sigmas } => jitter_rows(table, &pool, sigmas, n_new, rng)?,
        Method::Extrapolate { index_col } => extrapolate_rows(table, &pool, index_col, n_new, rng)?,
    };
    assemble(table, new_rows)
}

/// Rows marked synthetic, with the provenance column dropped.
pub fn synthetic_rows(table: &Table) -> Result<Table, TableError> {
    let only = table.filter_rows(&Predicate::compare(
        SYNTHETIC,
        crate::table::CmpOp::Eq,
        crate::table::Value::Str("true".to_string()),
    ))?;
    only.drop_column(SYNTHETIC)
}

/// Rows marked original, with the provenance column dropped.
pub fn original_rows(table: &Table) -> Result<Table, TableError> {
    let only = table.filter_rows(&Predicate::compare(
        SYNTHETIC,
        crate::table::CmpOp::Eq,
        crate::table::Value::Str("false".to_string()),
    ))?;
    only.drop_column(SYNTHETIC)
}
