//! Real-versus-synthetic similarity metrics and plausibility checks.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};
use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, cholesky_solve, jacobi_eigen, Matrix};
use crate::special::{chi_square_quantile, kolmogorov_survival};
use crate::stats;
use crate::table::{Column, Table, TableError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidateError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("sample is empty")]
    EmptySample,
    #[error("feature `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("covariance of the projected reference sample is singular")]
    SingularCovariance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, ValidateError> {
    if a.is_empty() || b.is_empty() {
        return Err(ValidateError::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max(fabs(i as f64 / n as f64 - j as f64 / m as f64));
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let p_value = if d == 0.0 { 1.0 } else { kolmogorov_survival(sqrt(ne) * d) };
    Ok(KsResult { statistic: d, p_value })
}

/// Σ min(pᵢ, qᵢ) over shared equal-width bins spanning both samples.
pub fn overlap_coefficient(a: &[f64], b: &[f64], bins: usize) -> Result<f64, ValidateError> {
    if a.is_empty() || b.is_empty() {
        return Err(ValidateError::EmptySample);
    }
    if bins == 0 {
        return Err(ValidateError::InvalidArgument("bins must be >= 1".into()));
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let p = histogram(a, lo, hi, bins);
    let q = histogram(b, lo, hi, bins);
    Ok(p.iter().zip(&q).map(|(x, y)| x.min(*y)).sum::<f64>().clamp(0.0, 1.0))
}

/// Normalized histogram on `bins` equal-width bins over `[lo, hi]`; the right
/// edge belongs to the last bin. A zero-width range puts everything in bin 0.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for &x in xs {
        let idx = if width > 0.0 {
            (((x - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        h[idx] += 1.0;
    }
    let n = xs.len() as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}

/// Principal components of z-scored features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub feature_cols: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Retained components, one loading vector per entry.
    pub components: Vec<Vec<f64>>,
    /// Every eigenvalue of the correlation matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalue / trace for every component; sums to 1.
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    pub fn fit(table: &Table, feature_cols: &[&str], n_components: usize) -> Result<Pca, ValidateError> {
        let p = feature_cols.len();
        if p == 0 || n_components == 0 || n_components > p {
            return Err(ValidateError::InvalidArgument(format!(
                "n_components must be in 1..={p}"
            )));
        }
        let n = table.n_rows();
        if n < 2 {
            return Err(ValidateError::TooFewRows { needed: 2, found: n });
        }
        let mut cols = Vec::with_capacity(p);
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        for c in feature_cols {
            let x = table.numeric(c)?;
            let sd = stats::std_dev(&x);
            if !(sd > 0.0) {
                return Err(ValidateError::ZeroVariance((*c).to_owned()));
            }
            let m = stats::mean(&x);
            cols.push(x.iter().map(|v| (v - m) / sd).collect::<Vec<_>>());
            means.push(m);
            scales.push(sd);
        }
        let z = Matrix::from_columns(&cols);
        let mut cov = z.gram();
        for i in 0..p {
            for j in 0..p {
                cov[(i, j)] /= (n - 1) as f64;
            }
        }
        let eig = jacobi_eigen(&cov).map_err(|_| ValidateError::SingularCovariance)?;
        let eigenvalues: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        let trace: f64 = eigenvalues.iter().sum();
        let explained_variance_ratio = eigenvalues.iter().map(|v| v / trace).collect();
        let components = (0..n_components)
            .map(|k| {
                let mut v = eig.vectors.column(k);
                let lead = v
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |best, (i, x)| if fabs(*x) > fabs(best.1) { (i, *x) } else { best })
                    .0;
                if v[lead] < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        Ok(Pca {
            feature_cols: feature_cols.iter().map(|s| (*s).to_owned()).collect(),
            means,
            scales,
            components,
            eigenvalues,
            explained_variance_ratio,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    fn standardized(&self, table: &Table) -> Result<Vec<Vec<f64>>, ValidateError> {
        let cols: Vec<Vec<f64>> = self
            .feature_cols
            .iter()
            .map(|c| table.numeric(c))
            .collect::<Result<_, _>>()?;
        Ok((0..table.n_rows())
            .map(|r| {
                cols.iter()
                    .enumerate()
                    .map(|(j, col)| (col[r] - self.means[j]) / self.scales[j])
                    .collect()
            })
            .collect())
    }

    /// Scores of each row on the retained components.
    pub fn transform(&self, table: &Table) -> Result<Vec<Vec<f64>>, ValidateError> {
        Ok(self
            .standardized(table)?
            .iter()
            .map(|z| {
                self.components
                    .iter()
                    .map(|c| c.iter().zip(z).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect())
    }

    /// Mean squared error (in z-score units) of reconstructing each row from
    /// its retained component scores.
    pub fn reconstruction_error(&self, table: &Table) -> Result<f64, ValidateError> {
        let z = self.standardized(table)?;
        let scores = self.transform(table)?;
        let p = self.feature_cols.len();
        let mut err = 0.0;
        for (row, s) in z.iter().zip(&scores) {
            for j in 0..p {
                let back: f64 = self.components.iter().zip(s).map(|(c, sc)| c[j] * sc).sum();
                err += (row[j] - back) * (row[j] - back);
            }
        }
        Ok(err / (z.len() * p).max(1) as f64)
    }
}

/// Fraction of synthetic rows whose squared Mahalanobis distance (in the
/// PCA space fitted on `real`) lies within the chi-square `coverage` quantile.
pub fn mahalanobis_overlap(
    real: &Table,
    synth: &Table,
    feature_cols: &[&str],
    n_pc: usize,
    coverage: f64,
) -> Result<f64, ValidateError> {
    if synth.n_rows() == 0 {
        return Err(ValidateError::EmptySample);
    }
    if real.n_rows() <= n_pc {
        return Err(ValidateError::TooFewRows { needed: n_pc + 1, found: real.n_rows() });
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(ValidateError::InvalidArgument("coverage must lie in (0, 1)".into()));
    }
    let pca = Pca::fit(real, feature_cols, n_pc)?;
    let real_scores = pca.transform(real)?;
    let synth_scores = pca.transform(synth)?;
    let n = real_scores.len() as f64;
    let mut center = vec![0.0; n_pc];
    for s in &real_scores {
        for (c, v) in center.iter_mut().zip(s) {
            *c += v / n;
        }
    }
    let mut cov = Matrix::zeros(n_pc, n_pc);
    for s in &real_scores {
        for i in 0..n_pc {
            for j in 0..n_pc {
                cov[(i, j)] += (s[i] - center[i]) * (s[j] - center[j]) / (n - 1.0);
            }
        }
    }
    let l = cholesky(&cov).map_err(|_| ValidateError::SingularCovariance)?;
    let threshold = chi_square_quantile(coverage, n_pc);
    let inside = synth_scores
        .iter()
        .filter(|s| {
            let d: Vec<f64> = s.iter().zip(&center).map(|(a, b)| a - b).collect();
            let w = cholesky_solve(&l, &d);
            let d2: f64 = d.iter().zip(&w).map(|(a, b)| a * b).sum();
            d2 <= threshold
        })
        .count();
    Ok(inside as f64 / synth_scores.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Closed interval; either side may be open-ended.
    Range {
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
    },
    /// Row-wise `column <= other`.
    AtMost { other: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityRule {
    pub column: String,
    pub bound: Bound,
}

impl PlausibilityRule {
    pub fn range(column: &str, min: Option<f64>, max: Option<f64>) -> Self {
        PlausibilityRule { column: column.to_owned(), bound: Bound::Range { min, max } }
    }

    pub fn at_most(column: &str, other: &str) -> Self {
        PlausibilityRule { column: column.to_owned(), bound: Bound::AtMost { other: other.to_owned() } }
    }

    pub fn describe(&self) -> String {
        match &self.bound {
            Bound::Range { min, max } => {
                let lo = min.map_or("-inf".into(), |v| format!("{v}"));
                let hi = max.map_or("inf".into(), |v| format!("{v}"));
                format!("{} in [{lo}, {hi}]", self.column)
            }
            Bound::AtMost { other } => format!("{} <= {other}", self.column),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: String,
    pub passed: usize,
    pub failed: usize,
    /// Up to five offending row indices.
    pub examples: Vec<usize>,
}

pub const MAX_EXAMPLES: usize = 5;

pub fn check_plausibility(table: &Table, rules: &[PlausibilityRule]) -> Result<Vec<RuleOutcome>, ValidateError> {
    rules
        .iter()
        .map(|rule| {
            let x = table.numeric(&rule.column)?;
            let ok: Vec<bool> = match &rule.bound {
                Bound::Range { min, max } => {
                    if let (Some(lo), Some(hi)) = (min, max) {
                        if lo > hi {
                            return Err(ValidateError::InvalidArgument(format!(
                                "rule `{}` has min > max",
                                rule.describe()
                            )));
                        }
                    }
                    x.iter()
                        .map(|v| min.is_none_or(|lo| *v >= lo) && max.is_none_or(|hi| *v <= hi))
                        .collect()
                }
                Bound::AtMost { other } => {
                    let y = table.numeric(other)?;
                    x.iter().zip(&y).map(|(a, b)| a <= b).collect()
                }
            };
            let failed_rows: Vec<usize> = ok
                .iter()
                .enumerate()
                .filter_map(|(i, pass)| (!pass).then_some(i))
                .collect();
            Ok(RuleOutcome {
                rule: rule.describe(),
                passed: ok.len() - failed_rows.len(),
                failed: failed_rows.len(),
                examples: failed_rows.into_iter().take(MAX_EXAMPLES).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnReport {
    pub column: String,
    pub ks: KsResult,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub columns: Vec<ColumnReport>,
    /// Explained-variance ratios of the PCA fitted on the real table.
    pub pca_explained_variance_ratio: Vec<f64>,
    pub mahalanobis_overlap: Option<f64>,
    pub plausibility: Vec<RuleOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationOptions {
    /// Columns to compare; `None` compares every float column present in both.
    pub columns: Option<Vec<String>>,
    pub bins: usize,
    pub n_pc: usize,
    pub coverage: f64,
    pub rules: Vec<PlausibilityRule>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { columns: None, bins: 20, n_pc: 2, coverage: 0.997, rules: Vec::new() }
    }
}

/// Full comparison of a synthetic table against a real one. PCA-based
/// metrics use the compared columns that vary in `real`; they are omitted
/// when fewer than `n_pc` such columns exist.
pub fn validate_tables(real: &Table, synth: &Table, opts: &ValidationOptions) -> Result<ValidationReport, ValidateError> {
    let names: Vec<String> = match &opts.columns {
        Some(c) => c.clone(),
        None => real
            .fields()
            .iter()
            .filter(|f| matches!(f.data, Column::Float(_)))
            .filter(|f| matches!(synth.column(&f.name), Ok(Column::Float(_))))
            .map(|f| f.name.clone())
            .collect(),
    };
    let mut columns = Vec::with_capacity(names.len());
    let mut varying = Vec::new();
    for name in &names {
        let a = real.numeric(name)?;
        let b = synth.numeric(name)?;
        columns.push(ColumnReport {
            column: name.clone(),
            ks: ks_two_sample(&a, &b)?,
            overlap: overlap_coefficient(&a, &b, opts.bins)?,
        });
        if stats::std_dev(&a) > 0.0 {
            varying.push(name.as_str());
        }
    }
    let (ratios, overlap) = if varying.len() >= opts.n_pc.max(1) && real.n_rows() > opts.n_pc {
        let pca = Pca::fit(real, &varying, opts.n_pc)?;
        let ov = match mahalanobis_overlap(real, synth, &varying, opts.n_pc, opts.coverage) {
            Ok(v) => Some(v),
            Err(ValidateError::SingularCovariance) | Err(ValidateError::EmptySample) => None,
            Err(e) => return Err(e),
        };
        (pca.explained_variance_ratio, ov)
    } else {
        (Vec::new(), None)
    };
    Ok(ValidationReport {
        columns,
        pca_explained_variance_ratio: ratios,
        mahalanobis_overlap: overlap,
        plausibility: check_plausibility(synth, &opts.rules)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [3.0, 1.0, 2.0, 2.0];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = ks_two_sample(&[1.0, 2.0], &[5.0, 6.0, 7.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(ks_two_sample(&[], &[1.0]), Err(ValidateError::EmptySample));
    }

    #[test]
    fn ks_hand_computed_half() {
        // ECDF_a(x) - ECDF_b(x) peaks at 0.5 on [2, 3).
        let r = ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        // λ = sqrt(2)·0.5
        assert!((r.p_value - kolmogorov_survival(sqrt(2.0) * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn overlap_trivial_cases() {
        let a = [1.0, 2.0, 3.0];
        assert!((overlap_coefficient(&a, &a, 10).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(overlap_coefficient(&[0.0, 1.0], &[5.0, 6.0], 4).unwrap(), 0.0);
        let zeros = [0.0; 4];
        let half = [0.0, 0.0, 1.0, 1.0];
        assert!((overlap_coefficient(&zeros, &half, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(overlap_coefficient(&[2.0], &[2.0], 3).unwrap(), 1.0);
    }

    #[test]
    fn pca_on_a_line_is_rank_one() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let t = Table::from_columns([("x", Column::Float(x)), ("y", Column::Float(y))]).unwrap();
        let pca = Pca::fit(&t, &["x", "y"], 2).unwrap();
        assert!((pca.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert!(pca.explained_variance_ratio[1].abs() < 1e-9);
        assert!(pca.components[0].iter().all(|v| *v > 0.0));
    }

    #[test]
    fn pca_zero_variance_rejected() {
        let t = Table::from_columns([
            ("x", Column::Float(vec![1.0, 2.0, 3.0])),
            ("c", Column::Float(vec![1.0; 3])),
        ])
        .unwrap();
        assert_eq!(Pca::fit(&t, &["x", "c"], 1), Err(ValidateError::ZeroVariance("c".into())));
        let one = t.take_rows(&[0]);
        assert!(matches!(Pca::fit(&one, &["x"], 1), Err(ValidateError::TooFewRows { .. })));
    }

    fn gaussian(n: usize, seed: u64) -> Table {
        let mut r = Rng::new(seed);
        let a: Vec<f64> = (0..n).map(|_| r.standard_normal()).collect();
        let b: Vec<f64> = a.iter().map(|v| 0.5 * v + r.standard_normal()).collect();
        let c: Vec<f64> = (0..n).map(|_| r.normal(3.0, 2.0)).collect();
        Table::from_columns([("a", Column::Float(a)), ("b", Column::Float(b)), ("c", Column::Float(c))]).unwrap()
    }

    #[test]
    fn mahalanobis_cases() {
        let real = gaussian(2000, 1);
        let cols = ["a", "b", "c"];
        let same = mahalanobis_overlap(&real, &real, &cols, 2, 0.997).unwrap();
        assert!(same >= 0.997 - 0.01, "{same}");

        let mut shifted = Table::new();
        for c in cols {
            let x: Vec<f64> = real.float(c).unwrap().iter().map(|v| v + 1000.0).collect();
            shifted.push_column(c, Column::Float(x)).unwrap();
        }
        assert_eq!(mahalanobis_overlap(&real, &shifted, &cols, 2, 0.997).unwrap(), 0.0);

        let mut center = Table::new();
        for c in cols {
            center.push_column(c, Column::Float(vec![stats::mean(real.float(c).unwrap())])).unwrap();
        }
        assert_eq!(mahalanobis_overlap(&real, &center, &cols, 2, 0.997).unwrap(), 1.0);
    }

    #[test]
    fn plausibility_counts() {
        let t = Table::from_columns([
            ("rain_mm", Column::Float(vec![0.0, 3.0, -1.0, 2.0])),
            ("tmin", Column::Float(vec![1.0, 2.0, 3.0, 9.0])),
            ("tmax", Column::Float(vec![2.0, 2.0, 4.0, 8.0])),
        ])
        .unwrap();
        let out = check_plausibility(
            &t,
            &[PlausibilityRule::range("rain_mm", Some(0.0), None), PlausibilityRule::at_most("tmin", "tmax")],
        )
        .unwrap();
        assert_eq!((out[0].passed, out[0].failed, out[0].examples.clone()), (3, 1, vec![2]));
        assert_eq!((out[1].failed, out[1].examples.clone()), (1, vec![3]));
        assert!(matches!(
            check_plausibility(&t, &[PlausibilityRule::range("ph", Some(0.0), Some(14.0))]),
            Err(ValidateError::Table(TableError::UnknownColumn(_)))
        ));
    }

    #[test]
    fn examples_capped_at_five() {
        let t = Table::from_columns([("v", Column::Float(vec![-1.0; 9]))]).unwrap();
        let out = check_plausibility(&t, &[PlausibilityRule::range("v", Some(0.0), None)]).unwrap();
        assert_eq!(out[0].failed, 9);
        assert_eq!(out[0].examples, vec![0, 1, 2, 3, 4]);
    }
}
