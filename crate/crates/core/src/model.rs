//! Surrogate regressors (ridge, k-nearest-neighbours, CART tree), a stacked
//! ensemble with an OLS meta-learner, temporal holdout and error metrics.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};
use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, cholesky_solve, pinv_solve_symmetric, Matrix};
use crate::rng::Rng;
use crate::stats;
use crate::table::{Column, Table, TableError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("normal equations are singular (rank-deficient design with lambda = 0)")]
    SingularSystem,
    #[error("k = {k} exceeds the {rows} training rows")]
    KTooLarge { k: usize, rows: usize },
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("season `{0}` does not occur in the table")]
    UnknownSeason(String),
    #[error("temporal split leaves the {0} side empty")]
    EmptySide(&'static str),
    #[error("target contains zero at row {0}; MAPE is undefined")]
    ZeroTarget(usize),
    #[error("feature and target lengths differ ({features} vs {targets})")]
    LengthMismatch { features: usize, targets: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorSpec {
    Ridge { lambda: f64 },
    Knn { k: usize },
    Tree { max_depth: usize, min_leaf: usize },
}

impl RegressorSpec {
    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            RegressorSpec::Ridge { lambda } if !(lambda >= 0.0) => {
                Err(ModelError::InvalidSpec("ridge lambda must be >= 0".into()))
            }
            RegressorSpec::Knn { k: 0 } => Err(ModelError::InvalidSpec("knn k must be >= 1".into())),
            RegressorSpec::Tree { max_depth, min_leaf } if max_depth == 0 || min_leaf == 0 => {
                Err(ModelError::InvalidSpec("tree max_depth and min_leaf must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Anything that maps a feature row to a prediction.
pub trait Regressor {
    /// Feature names, in the order `predict_row` expects them.
    fn feature_cols(&self) -> &[String];

    fn predict_row(&self, row: &[f64]) -> f64;

    fn predict(&self, x: &Table) -> Result<Vec<f64>, ModelError> {
        let m = design(x, self.feature_cols())?;
        Ok((0..m.rows()).map(|i| self.predict_row(m.row(i))).collect())
    }
}

/// Dense design matrix of the named numeric columns.
pub fn design(x: &Table, cols: &[String]) -> Result<Matrix, ModelError> {
    let columns: Vec<Vec<f64>> = cols.iter().map(|c| x.numeric(c)).collect::<Result<_, _>>()?;
    if columns.is_empty() {
        return Ok(Matrix::zeros(x.n_rows(), 0));
    }
    Ok(Matrix::from_columns(&columns))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub intercept: f64,
    pub coef: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Training rows, stored z-scored.
    pub train: Matrix,
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fitted {
    Ridge(RidgeModel),
    Knn(KnnModel),
    Tree(TreeModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub feature_cols: Vec<String>,
    pub fitted: Fitted,
}

impl Regressor for Model {
    fn feature_cols(&self) -> &[String] {
        &self.feature_cols
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.fitted {
            Fitted::Ridge(m) => m.intercept + m.coef.iter().zip(row).map(|(b, x)| b * x).sum::<f64>(),
            Fitted::Knn(m) => knn_predict(m, row),
            Fitted::Tree(m) => {
                let mut i = 0;
                loop {
                    match m.nodes[i] {
                        TreeNode::Leaf { value } => return value,
                        TreeNode::Split { feature, threshold, left, right } => {
                            i = if row[feature] <= threshold { left } else { right };
                        }
                    }
                }
            }
        }
    }
}

fn check_xy(x: &Matrix, y: &[f64]) -> Result<(), ModelError> {
    if x.rows() != y.len() {
        return Err(ModelError::LengthMismatch { features: x.rows(), targets: y.len() });
    }
    if x.rows() == 0 {
        return Err(ModelError::TooFewRows { needed: 1, found: 0 });
    }
    Ok(())
}

/// Fit every column of `x` as a feature.
pub fn fit(spec: &RegressorSpec, x: &Table, y: &[f64]) -> Result<Model, ModelError> {
    let cols: Vec<String> = x.column_names().into_iter().map(ToOwned::to_owned).collect();
    fit_columns(spec, x, &cols, y)
}

pub fn fit_columns(spec: &RegressorSpec, x: &Table, cols: &[String], y: &[f64]) -> Result<Model, ModelError> {
    let m = design(x, cols)?;
    Ok(Model { feature_cols: cols.to_vec(), fitted: fit_matrix(spec, &m, y)? })
}

pub fn fit_matrix(spec: &RegressorSpec, x: &Matrix, y: &[f64]) -> Result<Fitted, ModelError> {
    spec.validate()?;
    check_xy(x, y)?;
    Ok(match *spec {
        RegressorSpec::Ridge { lambda } => Fitted::Ridge(fit_ridge(x, y, lambda)?),
        RegressorSpec::Knn { k } => Fitted::Knn(fit_knn(x, y, k)?),
        RegressorSpec::Tree { max_depth, min_leaf } => Fitted::Tree(fit_tree(x, y, max_depth, min_leaf)),
    })
}

fn column_means(x: &Matrix) -> Vec<f64> {
    (0..x.cols()).map(|j| stats::mean(&x.column(j))).collect()
}

fn centered(x: &Matrix, means: &[f64]) -> Matrix {
    let mut c = x.clone();
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            c[(i, j)] -= means[j];
        }
    }
    c
}

/// Ridge with an unpenalized intercept: solve on centered data, then recover
/// the intercept from the means.
fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<RidgeModel, ModelError> {
    let means = column_means(x);
    let ybar = stats::mean(y);
    let xc = centered(x, &means);
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let mut a = xc.gram();
    for j in 0..a.rows() {
        a[(j, j)] += lambda;
    }
    let coef = if a.rows() == 0 {
        Vec::new()
    } else {
        let l = cholesky(&a).map_err(|_| ModelError::SingularSystem)?;
        cholesky_solve(&l, &xc.t_mul_vec(&yc))
    };
    let intercept = ybar - coef.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    Ok(RidgeModel { intercept, coef })
}

fn fit_knn(x: &Matrix, y: &[f64], k: usize) -> Result<KnnModel, ModelError> {
    if k > x.rows() {
        return Err(ModelError::KTooLarge { k, rows: x.rows() });
    }
    let means = column_means(x);
    let scales: Vec<f64> = (0..x.cols())
        .map(|j| {
            let s = stats::std_dev(&x.column(j));
            if s > 0.0 { s } else { 1.0 }
        })
        .collect();
    let mut train = centered(x, &means);
    for i in 0..train.rows() {
        for j in 0..train.cols() {
            train[(i, j)] /= scales[j];
        }
    }
    Ok(KnnModel { k, means, scales, train, targets: y.to_vec() })
}

fn knn_predict(m: &KnnModel, row: &[f64]) -> f64 {
    let z: Vec<f64> = row
        .iter()
        .zip(m.means.iter().zip(&m.scales))
        .map(|(x, (mu, s))| (x - mu) / s)
        .collect();
    let mut d: Vec<(f64, usize)> = (0..m.train.rows())
        .map(|i| {
            let dist: f64 = m.train.row(i).iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            (dist, i)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if m.k < d.len() {
        d.select_nth_unstable_by(m.k - 1, cmp);
        d.truncate(m.k);
    }
    d.iter().map(|&(_, i)| m.targets[i]).sum::<f64>() / m.k as f64
}

fn fit_tree(x: &Matrix, y: &[f64], max_depth: usize, min_leaf: usize) -> TreeModel {
    let mut nodes = Vec::new();
    let idx: Vec<usize> = (0..x.rows()).collect();
    grow(x, y, idx, 0, max_depth, min_leaf, &mut nodes);
    TreeModel { nodes }
}

fn grow(
    x: &Matrix,
    y: &[f64],
    idx: Vec<usize>,
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let here = nodes.len();
    let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
    nodes.push(TreeNode::Leaf { value: mean });
    if depth >= max_depth || idx.len() < 2 * min_leaf {
        return here;
    }
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = idx.iter().map(|&i| y[i] * y[i]).sum();
    let parent_sse = total_sq - total * total / n as f64;
    // (gain, feature, threshold)
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = idx.clone();
    for f in 0..x.cols() {
        order.sort_by(|&a, &b| x[(a, f)].total_cmp(&x[(b, f)]).then(a.cmp(&b)));
        let (mut ls, mut lsq) = (0.0, 0.0);
        for pos in 0..n - 1 {
            let yi = y[order[pos]];
            ls += yi;
            lsq += yi * yi;
            let nl = pos + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let (xa, xb) = (x[(order[pos], f)], x[(order[pos + 1], f)]);
            if xa == xb {
                continue;
            }
            let rs = total - ls;
            let rsq = total_sq - lsq;
            let sse = (lsq - ls * ls / nl as f64) + (rsq - rs * rs / nr as f64);
            let gain = parent_sse - sse;
            if best.is_none_or(|b| gain > b.0) {
                best = Some((gain, f, 0.5 * (xa + xb)));
            }
        }
    }
    let Some((gain, feature, threshold)) = best else {
        return here;
    };
    if !(gain > 1e-12 * parent_sse.max(1e-300)) {
        return here;
    }
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[(i, feature)] <= threshold);
    let left = grow(x, y, l, depth + 1, max_depth, min_leaf, nodes);
    let right = grow(x, y, r, depth + 1, max_depth, min_leaf, nodes);
    nodes[here] = TreeNode::Split { feature, threshold, left, right };
    here
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackSpec {
    pub bases: Vec<RegressorSpec>,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

fn default_folds() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub feature_cols: Vec<String>,
    pub bases: Vec<Fitted>,
    pub meta_intercept: f64,
    pub meta_weights: Vec<f64>,
}

impl StackedModel {
    /// Predictions of each refitted base learner for one row.
    pub fn base_predictions(&self, row: &[f64]) -> Vec<f64> {
        self.bases
            .iter()
            .map(|b| Model { feature_cols: Vec::new(), fitted: b.clone() }.predict_row(row))
            .collect()
    }
}

impl Regressor for StackedModel {
    fn feature_cols(&self) -> &[String] {
        &self.feature_cols
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.meta_intercept
            + self
                .bases
                .iter()
                .zip(&self.meta_weights)
                .map(|(b, w)| w * predict_fitted(b, row))
                .sum::<f64>()
    }
}

fn predict_fitted(f: &Fitted, row: &[f64]) -> f64 {
    // Borrow-only path for hot loops (avoids cloning into a Model).
    match f {
        Fitted::Ridge(m) => m.intercept + m.coef.iter().zip(row).map(|(b, x)| b * x).sum::<f64>(),
        Fitted::Knn(m) => knn_predict(m, row),
        Fitted::Tree(m) => {
            let mut i = 0;
            loop {
                match m.nodes[i] {
                    TreeNode::Leaf { value } => return value,
                    TreeNode::Split { feature, threshold, left, right } => {
                        i = if row[feature] <= threshold { left } else { right };
                    }
                }
            }
        }
    }
}

/// OLS with intercept, minimum-norm when the design is rank-deficient.
pub fn ols_min_norm(x: &Matrix, y: &[f64]) -> (f64, Vec<f64>) {
    let means = column_means(x);
    let ybar = stats::mean(y);
    let xc = centered(x, &means);
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let w = pinv_solve_symmetric(&xc.gram(), &xc.t_mul_vec(&yc), 1e-10).unwrap_or_else(|_| vec![0.0; x.cols()]);
    let intercept = ybar - w.iter().zip(&means).map(|(a, b)| a * b).sum::<f64>();
    (intercept, w)
}

/// Fold index per row: seeded shuffle, then position modulo `folds`.
pub fn fold_assignment(n: usize, folds: usize, rng: &Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    rng.split("stack/folds").shuffle(&mut perm);
    let mut fold = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        fold[row] = pos % folds;
    }
    fold
}

pub fn fit_stacked(spec: &StackSpec, x: &Table, y: &[f64], rng: &Rng) -> Result<StackedModel, ModelError> {
    let cols: Vec<String> = x.column_names().into_iter().map(ToOwned::to_owned).collect();
    fit_stacked_columns(spec, x, &cols, y, rng)
}

pub fn fit_stacked_columns(
    spec: &StackSpec,
    x: &Table,
    cols: &[String],
    y: &[f64],
    rng: &Rng,
) -> Result<StackedModel, ModelError> {
    if spec.bases.len() < 2 {
        return Err(ModelError::InvalidSpec("a stack needs at least two base learners".into()));
    }
    if spec.folds < 2 {
        return Err(ModelError::InvalidSpec("folds must be >= 2".into()));
    }
    let m = design(x, cols)?;
    check_xy(&m, y)?;
    if m.rows() < spec.folds {
        return Err(ModelError::TooFewRows { needed: spec.folds, found: m.rows() });
    }
    let fold = fold_assignment(m.rows(), spec.folds, rng);
    let mut oof = Matrix::zeros(m.rows(), spec.bases.len());
    for f in 0..spec.folds {
        let train: Vec<usize> = (0..m.rows()).filter(|&i| fold[i] != f).collect();
        let hold: Vec<usize> = (0..m.rows()).filter(|&i| fold[i] == f).collect();
        let xt = Matrix::from_rows(&train.iter().map(|&i| m.row(i).to_vec()).collect::<Vec<_>>());
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        for (b, base) in spec.bases.iter().enumerate() {
            let fitted = fit_matrix(base, &xt, &yt)?;
            for &i in &hold {
                oof[(i, b)] = predict_fitted(&fitted, m.row(i));
            }
        }
    }
    let (meta_intercept, meta_weights) = ols_min_norm(&oof, y);
    let bases = spec.bases.iter().map(|b| fit_matrix(b, &m, y)).collect::<Result<_, _>>()?;
    Ok(StackedModel { feature_cols: cols.to_vec(), bases, meta_intercept, meta_weights })
}

/// Either a single regressor or a stack; the serialized model artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnyModel {
    Single(Model),
    Stacked(StackedModel),
}

impl Regressor for AnyModel {
    fn feature_cols(&self) -> &[String] {
        match self {
            AnyModel::Single(m) => m.feature_cols(),
            AnyModel::Stacked(m) => m.feature_cols(),
        }
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            AnyModel::Single(m) => m.predict_row(row),
            AnyModel::Stacked(m) => m.predict_row(row),
        }
    }
}

impl<R: Regressor + ?Sized> Regressor for Box<R> {
    fn feature_cols(&self) -> &[String] {
        (**self).feature_cols()
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        (**self).predict_row(row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean absolute percentage error, in percent.
    pub mape: f64,
    pub rmse: f64,
    pub r2: f64,
}

/// Metrics for predictions against targets. `r2` is 1 for a perfect fit of a
/// constant target and 0 for any imperfect fit of one.
pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<EvalReport, ModelError> {
    if y.len() != yhat.len() {
        return Err(ModelError::LengthMismatch { features: yhat.len(), targets: y.len() });
    }
    if y.is_empty() {
        return Err(ModelError::TooFewRows { needed: 1, found: 0 });
    }
    if let Some(i) = y.iter().position(|v| *v == 0.0) {
        return Err(ModelError::ZeroTarget(i));
    }
    let n = y.len() as f64;
    let mape = y.iter().zip(yhat).map(|(a, b)| fabs(a - b) / fabs(*a)).sum::<f64>() / n * 100.0;
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    let ybar = stats::mean(y);
    let ss_tot: f64 = y.iter().map(|a| (a - ybar) * (a - ybar)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(EvalReport { mape, rmse: sqrt(ss_res / n), r2 })
}

pub fn evaluate<R: Regressor + ?Sized>(model: &R, x_test: &Table, y_test: &[f64]) -> Result<EvalReport, ModelError> {
    metrics(y_test, &model.predict(x_test)?)
}

/// Hold out entire seasons: `test` holds rows whose season is listed.
pub fn temporal_split(table: &Table, season_col: &str, test_seasons: &[&str]) -> Result<(Table, Table), ModelError> {
    let col = table.column(season_col)?;
    let labels: Vec<String> = (0..table.n_rows()).map(|i| col.value(i).to_string()).collect();
    let observed: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    if test_seasons.is_empty() {
        return Err(ModelError::EmptySide("test"));
    }
    for s in test_seasons {
        if !observed.contains(s) {
            return Err(ModelError::UnknownSeason((*s).to_owned()));
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, l) in labels.iter().enumerate() {
        if test_seasons.contains(&l.as_str()) {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    if train.is_empty() {
        return Err(ModelError::EmptySide("train"));
    }
    Ok((table.take_rows(&train), table.take_rows(&test)))
}

/// Feature columns of a table: everything numeric except the named exclusions.
pub fn numeric_features(table: &Table, exclude: &[&str]) -> Vec<String> {
    table
        .fields()
        .iter()
        .filter(|f| matches!(f.data, Column::Float(_) | Column::Int(_)))
        .filter(|f| !exclude.contains(&f.name.as_str()))
        .map(|f| f.name.clone())
        .collect()
}

pub fn describe(spec: &RegressorSpec) -> String {
    match spec {
        RegressorSpec::Ridge { lambda } => format!("ridge(lambda={lambda})"),
        RegressorSpec::Knn { k } => format!("knn(k={k})"),
        RegressorSpec::Tree { max_depth, min_leaf } => format!("tree(depth={max_depth}, leaf={min_leaf})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> (Table, Vec<f64>) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        let y = x.iter().map(|v| 2.0 * v + 1.0).collect();
        (Table::from_columns([("x", Column::Float(x))]).unwrap(), y)
    }

    #[test]
    fn ridge_interpolates_exact_line() {
        let (x, y) = line(20);
        let m = fit(&RegressorSpec::Ridge { lambda: 0.0 }, &x, &y).unwrap();
        let Fitted::Ridge(r) = &m.fitted else { panic!() };
        assert!((r.intercept - 1.0).abs() < 1e-9 && (r.coef[0] - 2.0).abs() < 1e-9);
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_singular_without_penalty() {
        let x = Table::from_columns([
            ("a", Column::Float(vec![1.0, 2.0, 3.0])),
            ("b", Column::Float(vec![2.0, 4.0, 6.0])),
        ])
        .unwrap();
        let y = [1.0, 2.0, 3.0];
        assert_eq!(fit(&RegressorSpec::Ridge { lambda: 0.0 }, &x, &y), Err(ModelError::SingularSystem));
        assert!(fit(&RegressorSpec::Ridge { lambda: 0.1 }, &x, &y).is_ok());
    }

    #[test]
    fn ridge_heavy_penalty_predicts_mean() {
        let (x, y) = line(20);
        let m = fit(&RegressorSpec::Ridge { lambda: 1e15 }, &x, &y).unwrap();
        let ybar = stats::mean(&y);
        let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for p in m.predict(&x).unwrap() {
            assert!((p - ybar).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn knn_global_average() {
        let (x, y) = line(9);
        let m = fit(&RegressorSpec::Knn { k: 9 }, &x, &y).unwrap();
        for p in m.predict(&x).unwrap() {
            assert!((p - stats::mean(&y)).abs() < 1e-12);
        }
        assert_eq!(fit(&RegressorSpec::Knn { k: 10 }, &x, &y), Err(ModelError::KTooLarge { k: 10, rows: 9 }));
    }

    #[test]
    fn knn_one_neighbour_memorizes() {
        let (x, y) = line(9);
        let m = fit(&RegressorSpec::Knn { k: 1 }, &x, &y).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn tree_recovers_step_function() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| if *v < 15.0 { 3.0 } else { 10.0 }).collect();
        let t = Table::from_columns([("x", Column::Float(x))]).unwrap();
        let m = fit(&RegressorSpec::Tree { max_depth: 3, min_leaf: 2 }, &t, &y).unwrap();
        assert_eq!(m.predict(&t).unwrap(), y);
        let Fitted::Tree(tree) = &m.fitted else { panic!() };
        assert!(matches!(tree.nodes[0], TreeNode::Split { feature: 0, threshold, .. } if threshold == 14.5));
    }

    #[test]
    fn tree_depth_one_min_leaf_blocks_splits() {
        let (x, y) = line(6);
        let m = fit(&RegressorSpec::Tree { max_depth: 4, min_leaf: 6 }, &x, &y).unwrap();
        for p in m.predict(&x).unwrap() {
            assert!((p - stats::mean(&y)).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_hand_values() {
        let r = metrics(&[100.0, 200.0], &[110.0, 180.0]).unwrap();
        // 10/100 and 20/200 are both 10 %.
        assert!((r.mape - 10.0).abs() < 1e-12);
        let r = metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.mape, r.rmse, r.r2), (0.0, 0.0, 1.0));
        let r = metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(r.r2, 0.0);
        assert_eq!(metrics(&[1.0, 0.0], &[1.0, 1.0]), Err(ModelError::ZeroTarget(1)));
    }

    fn seasons() -> Table {
        Table::from_columns([
            ("season", Column::Category(["A", "B", "C", "A", "C"].iter().map(|s| s.to_string()).collect())),
            ("v", Column::Float(vec![1.0, 2.0, 3.0, 4.0, 5.0])),
        ])
        .unwrap()
    }

    #[test]
    fn temporal_split_partitions() {
        let t = seasons();
        let (train, test) = temporal_split(&t, "season", &["C"]).unwrap();
        assert_eq!(train.category("season").unwrap(), &["A", "B", "A"]);
        assert_eq!(test.float("v").unwrap(), &[3.0, 5.0]);
        assert_eq!(train.n_rows() + test.n_rows(), t.n_rows());
        assert_eq!(temporal_split(&t, "season", &["A", "B", "C"]), Err(ModelError::EmptySide("train")));
        assert_eq!(temporal_split(&t, "season", &["D"]), Err(ModelError::UnknownSeason("D".into())));
    }

    #[test]
    fn identical_bases_reproduce_base() {
        let (x, y) = line(30);
        let spec = StackSpec { bases: vec![RegressorSpec::Ridge { lambda: 0.0 }; 3], folds: 5 };
        let stack = fit_stacked(&spec, &x, &y, &Rng::new(1)).unwrap();
        let base = fit(&RegressorSpec::Ridge { lambda: 0.0 }, &x, &y).unwrap();
        for (a, b) in stack.predict(&x).unwrap().iter().zip(base.predict(&x).unwrap()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn stack_preconditions() {
        let (x, y) = line(4);
        let spec = StackSpec { bases: vec![RegressorSpec::Ridge { lambda: 0.0 }; 2], folds: 5 };
        assert_eq!(fit_stacked(&spec, &x, &y, &Rng::new(0)), Err(ModelError::TooFewRows { needed: 5, found: 4 }));
        let spec = StackSpec { bases: vec![RegressorSpec::Ridge { lambda: 0.0 }], folds: 2 };
        assert!(matches!(fit_stacked(&spec, &x, &y, &Rng::new(0)), Err(ModelError::InvalidSpec(_))));
    }

    #[test]
    fn folds_are_balanced() {
        let f = fold_assignment(23, 5, &Rng::new(3));
        for k in 0..5 {
            let c = f.iter().filter(|v| **v == k).count();
            assert!(c == 4 || c == 5);
        }
    }
}
