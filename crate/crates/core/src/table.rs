//! Rectangular, typed, immutable-by-convention column store.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    Float64,
    Int64,
    Category,
    Date,
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DType::Float64 => "float64",
            DType::Int64 => "int64",
            DType::Category => "category",
            DType::Date => "date",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Float(Vec<f64>),
    Int(Vec<i64>),
    Category(Vec<String>),
    Date(Vec<Date>),
}

impl Column {
    pub fn dtype(&self) -> DType {
        match self {
            Column::Float(_) => DType::Float64,
            Column::Int(_) => DType::Int64,
            Column::Category(_) => DType::Category,
            Column::Date(_) => DType::Date,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Float(v) => v.len(),
            Column::Int(v) => v.len(),
            Column::Category(v) => v.len(),
            Column::Date(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn empty(dtype: DType) -> Column {
        match dtype {
            DType::Float64 => Column::Float(Vec::new()),
            DType::Int64 => Column::Int(Vec::new()),
            DType::Category => Column::Category(Vec::new()),
            DType::Date => Column::Date(Vec::new()),
        }
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            Column::Float(v) => Value::Float(v[row]),
            Column::Int(v) => Value::Int(v[row]),
            Column::Category(v) => Value::Str(v[row].clone()),
            Column::Date(v) => Value::Date(v[row]),
        }
    }

    pub fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Float(v) => Column::Float(rows.iter().map(|&i| v[i]).collect()),
            Column::Int(v) => Column::Int(rows.iter().map(|&i| v[i]).collect()),
            Column::Category(v) => Column::Category(rows.iter().map(|&i| v[i].clone()).collect()),
            Column::Date(v) => Column::Date(rows.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Sorted distinct values of a category column; empty for other dtypes.
    pub fn vocabulary(&self) -> Vec<String> {
        match self {
            Column::Category(v) => v.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            _ => Vec::new(),
        }
    }

    fn extend_from(&mut self, other: &Column) -> bool {
        match (self, other) {
            (Column::Float(a), Column::Float(b)) => a.extend_from_slice(b),
            (Column::Int(a), Column::Int(b)) => a.extend_from_slice(b),
            (Column::Category(a), Column::Category(b)) => a.extend_from_slice(b),
            (Column::Date(a), Column::Date(b)) => a.extend_from_slice(b),
            _ => return false,
        }
        true
    }

    /// Bitwise equality (floats compared by bit pattern).
    pub fn bit_eq(&self, other: &Column) -> bool {
        match (self, other) {
            (Column::Float(a), Column::Float(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            _ => self == other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Date(Date),
    Str(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Date(v) => write!(f, "{v}"),
            Value::Str(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub units: Option<String>,
    pub data: Column,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` has type {found}, expected {expected}")]
    TypeMismatch {
        column: String,
        expected: &'static str,
        found: DType,
    },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column names must be non-empty")]
    EmptyColumnName,
    #[error("column `{column}` has {found} rows, table has {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("tables have different schemas")]
    SchemaMismatch,
}

/// Column description used for schemas and CSV sidecars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub dtype: DType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    fields: Vec<Field>,
    n_rows: usize,
}

impl Table {
    pub fn new() -> Self {
        Table::default()
    }

    /// Build from `(name, column)` pairs, checking rectangularity and names.
    pub fn from_columns<I, S>(columns: I) -> Result<Self, TableError>
    where
        I: IntoIterator<Item = (S, Column)>,
        S: Into<String>,
    {
        let mut t = Table::new();
        for (name, col) in columns {
            t.push_column(name, col)?;
        }
        Ok(t)
    }

    pub fn push_column(&mut self, name: impl Into<String>, data: Column) -> Result<(), TableError> {
        self.push_field(Field {
            name: name.into(),
            units: None,
            data,
        })
    }

    pub fn push_field(&mut self, field: Field) -> Result<(), TableError> {
        if field.name.is_empty() {
            return Err(TableError::EmptyColumnName);
        }
        if self.fields.iter().any(|f| f.name == field.name) {
            return Err(TableError::DuplicateColumn(field.name));
        }
        if self.fields.is_empty() {
            self.n_rows = field.data.len();
        } else if field.data.len() != self.n_rows {
            return Err(TableError::LengthMismatch {
                column: field.name,
                expected: self.n_rows,
                found: field.data.len(),
            });
        }
        self.fields.push(field);
        Ok(())
    }

    pub fn with_units(mut self, column: &str, units: impl Into<String>) -> Result<Self, TableError> {
        let idx = self.index_of(column)?;
        self.fields[idx].units = Some(units.into());
        Ok(self)
    }

    pub fn set_units(&mut self, column: &str, units: Option<String>) -> Result<(), TableError> {
        let idx = self.index_of(column)?;
        self.fields[idx].units = units;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.fields.iter().any(|f| f.name == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize, TableError> {
        self.fields
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| TableError::UnknownColumn(name.to_owned()))
    }

    pub fn field(&self, name: &str) -> Result<&Field, TableError> {
        Ok(&self.fields[self.index_of(name)?])
    }

    pub fn column(&self, name: &str) -> Result<&Column, TableError> {
        Ok(&self.field(name)?.data)
    }

    pub fn float(&self, name: &str) -> Result<&[f64], TableError> {
        match self.column(name)? {
            Column::Float(v) => Ok(v),
            other => Err(TableError::TypeMismatch {
                column: name.to_owned(),
                expected: "float64",
                found: other.dtype(),
            }),
        }
    }

    pub fn category(&self, name: &str) -> Result<&[String], TableError> {
        match self.column(name)? {
            Column::Category(v) => Ok(v),
            other => Err(TableError::TypeMismatch {
                column: name.to_owned(),
                expected: "category",
                found: other.dtype(),
            }),
        }
    }

    pub fn date(&self, name: &str) -> Result<&[Date], TableError> {
        match self.column(name)? {
            Column::Date(v) => Ok(v),
            other => Err(TableError::TypeMismatch {
                column: name.to_owned(),
                expected: "date",
                found: other.dtype(),
            }),
        }
    }

    /// Float or int column widened to `f64`.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>, TableError> {
        match self.column(name)? {
            Column::Float(v) => Ok(v.clone()),
            Column::Int(v) => Ok(v.iter().map(|&x| x as f64).collect()),
            other => Err(TableError::TypeMismatch {
                column: name.to_owned(),
                expected: "numeric",
                found: other.dtype(),
            }),
        }
    }

    pub fn schema(&self) -> Vec<ColumnSchema> {
        self.fields
            .iter()
            .map(|f| ColumnSchema {
                name: f.name.clone(),
                dtype: f.data.dtype(),
                units: f.units.clone(),
            })
            .collect()
    }

    pub fn value(&self, row: usize, column: &str) -> Result<Value, TableError> {
        Ok(self.column(column)?.value(row))
    }

    /// New table with the given rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Table {
        Table {
            fields: self
                .fields
                .iter()
                .map(|f| Field {
                    name: f.name.clone(),
                    units: f.units.clone(),
                    data: f.data.take(rows),
                })
                .collect(),
            n_rows: rows.len(),
        }
    }

    pub fn select(&self, names: &[&str]) -> Result<Table, TableError> {
        let mut t = Table::new();
        for name in names {
            t.push_field(self.field(name)?.clone())?;
        }
        if t.fields.is_empty() {
            t.n_rows = self.n_rows;
        }
        Ok(t)
    }

    pub fn drop_column(&self, name: &str) -> Result<Table, TableError> {
        let idx = self.index_of(name)?;
        let mut t = self.clone();
        t.fields.remove(idx);
        Ok(t)
    }

    /// Vertical concatenation; column names, order and dtypes must match.
    pub fn concat(&self, other: &Table) -> Result<Table, TableError> {
        if self.fields.len() != other.fields.len()
            || self
                .fields
                .iter()
                .zip(&other.fields)
                .any(|(a, b)| a.name != b.name || a.data.dtype() != b.data.dtype())
        {
            return Err(TableError::SchemaMismatch);
        }
        let mut out = self.clone();
        for (dst, src) in out.fields.iter_mut().zip(&other.fields) {
            dst.data.extend_from(&src.data);
        }
        out.n_rows += other.n_rows;
        Ok(out)
    }

    /// Row subset satisfying `predicate`, order preserved, schema unchanged.
    pub fn filter_rows(&self, predicate: &Predicate) -> Result<Table, TableError> {
        let mask = predicate.mask(self)?;
        let rows: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &keep)| keep.then_some(i))
            .collect();
        Ok(self.take_rows(&rows))
    }

    /// Equality that compares floats by bit pattern.
    pub fn bit_eq(&self, other: &Table) -> bool {
        self.n_rows == other.n_rows
            && self.fields.len() == other.fields.len()
            && self.fields.iter().zip(&other.fields).all(|(a, b)| {
                a.name == b.name && a.units == b.units && a.data.bit_eq(&b.data)
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
        }
    }
}

/// Right-hand side of a comparison: a literal, or a type-7 quantile of the
/// compared column computed over the whole table being filtered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Quantile { quantile: f64 },
    Value(Value),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    /// Matches every row.
    All,
    Compare {
        column: String,
        op: CmpOp,
        rhs: Operand,
    },
    In {
        column: String,
        values: Vec<Value>,
    },
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn compare(column: &str, op: CmpOp, value: Value) -> Predicate {
        Predicate::Compare {
            column: column.to_owned(),
            op,
            rhs: Operand::Value(value),
        }
    }

    pub fn quantile(column: &str, op: CmpOp, q: f64) -> Predicate {
        Predicate::Compare {
            column: column.to_owned(),
            op,
            rhs: Operand::Quantile { quantile: q },
        }
    }

    pub fn is_in(column: &str, values: impl IntoIterator<Item = Value>) -> Predicate {
        Predicate::In {
            column: column.to_owned(),
            values: values.into_iter().collect(),
        }
    }

    /// Names of every column the predicate touches.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Predicate::All => {}
            Predicate::Compare { column, .. } | Predicate::In { column, .. } => out.push(column),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.collect_columns(out)),
            Predicate::Not(p) => p.collect_columns(out),
        }
    }

    pub fn mask(&self, table: &Table) -> Result<Vec<bool>, TableError> {
        let n = table.n_rows();
        match self {
            Predicate::All => Ok(alloc::vec![true; n]),
            Predicate::Compare { column, op, rhs } => {
                let col = table.column(column)?;
                let rhs = match rhs {
                    Operand::Value(v) => v.clone(),
                    Operand::Quantile { quantile } => {
                        let xs = table.numeric(column)?;
                        Value::Float(stats::quantile(&xs, *quantile))
                    }
                };
                (0..n)
                    .map(|i| compare_cell(col, i, &rhs, column).map(|o| op.holds(o)))
                    .collect()
            }
            Predicate::In { column, values } => {
                let col = table.column(column)?;
                (0..n)
                    .map(|i| {
                        for v in values {
                            if compare_cell(col, i, v, column)? == Ordering::Equal {
                                return Ok(true);
                            }
                        }
                        Ok(false)
                    })
                    .collect()
            }
            Predicate::And(ps) => {
                let mut acc = alloc::vec![true; n];
                for p in ps {
                    for (a, b) in acc.iter_mut().zip(p.mask(table)?) {
                        *a &= b;
                    }
                }
                Ok(acc)
            }
            Predicate::Or(ps) => {
                let mut acc = alloc::vec![false; n];
                for p in ps {
                    for (a, b) in acc.iter_mut().zip(p.mask(table)?) {
                        *a |= b;
                    }
                }
                Ok(acc)
            }
            Predicate::Not(p) => Ok(p.mask(table)?.into_iter().map(|b| !b).collect()),
        }
    }
}

fn mismatch(column: &str, col: &Column) -> TableError {
    TableError::TypeMismatch {
        column: column.to_owned(),
        expected: "a value comparable with the column",
        found: col.dtype(),
    }
}

fn compare_cell(col: &Column, row: usize, rhs: &Value, name: &str) -> Result<Ordering, TableError> {
    match (col, rhs) {
        (Column::Float(v), Value::Float(x)) => Ok(v[row].total_cmp(x)),
        (Column::Float(v), Value::Int(x)) => Ok(v[row].total_cmp(&(*x as f64))),
        (Column::Int(v), Value::Int(x)) => Ok(v[row].cmp(x)),
        (Column::Int(v), Value::Float(x)) => Ok((v[row] as f64).total_cmp(x)),
        (Column::Category(v), Value::Str(s)) => Ok(v[row].as_str().cmp(s.as_str())),
        (Column::Category(v), Value::Date(d)) => Ok(v[row].as_str().cmp(d.to_string().as_str())),
        (Column::Category(v), Value::Int(x)) => Ok(v[row].as_str().cmp(x.to_string().as_str())),
        (Column::Date(v), Value::Date(d)) => Ok(v[row].cmp(d)),
        (Column::Date(v), Value::Str(s)) => {
            let d: Date = s.parse().map_err(|_| mismatch(name, col))?;
            Ok(v[row].cmp(&d))
        }
        _ => Err(mismatch(name, col)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn yields() -> Table {
        Table::from_columns([
            ("yield", Column::Float(vec![1.0, 2.0, 3.0, 4.0])),
            ("season", Column::Category(vec!["A".into(), "B".into(), "A".into(), "C".into()])),
        ])
        .unwrap()
    }

    #[test]
    fn quartile_filter() {
        let t = yields();
        let q1 = t.filter_rows(&Predicate::quantile("yield", CmpOp::Le, 0.25)).unwrap();
        assert_eq!(q1.float("yield").unwrap(), &[1.0]);
        // explicit Q1 = 1.75
        let lit = t
            .filter_rows(&Predicate::compare("yield", CmpOp::Le, Value::Float(1.75)))
            .unwrap();
        assert_eq!(lit, q1);
    }

    #[test]
    fn empty_match_and_unknown_column() {
        let t = yields();
        let none = t
            .filter_rows(&Predicate::compare("yield", CmpOp::Gt, Value::Float(10.0)))
            .unwrap();
        assert_eq!(none.n_rows(), 0);
        assert_eq!(none.n_cols(), 2);
        let err = t
            .filter_rows(&Predicate::compare("nope", CmpOp::Gt, Value::Float(1.0)))
            .unwrap_err();
        assert_eq!(err, TableError::UnknownColumn("nope".into()));
    }

    #[test]
    fn type_mismatch() {
        let t = yields();
        let err = t
            .filter_rows(&Predicate::compare("season", CmpOp::Lt, Value::Float(1.0)))
            .unwrap_err();
        assert!(matches!(err, TableError::TypeMismatch { .. }));
        assert!(t.filter_rows(&Predicate::quantile("season", CmpOp::Le, 0.5)).is_err());
    }

    #[test]
    fn in_and_not() {
        let t = yields();
        let early = t
            .filter_rows(&Predicate::is_in("season", [Value::Str("A".into()), Value::Str("B".into())]))
            .unwrap();
        assert_eq!(early.float("yield").unwrap(), &[1.0, 2.0, 3.0]);
        let late = t
            .filter_rows(&Predicate::Not(Box::new(Predicate::is_in(
                "season",
                [Value::Str("A".into()), Value::Str("B".into())],
            ))))
            .unwrap();
        assert_eq!(late.n_rows(), 1);
    }

    #[test]
    fn rectangular_and_unique_names() {
        let mut t = yields();
        assert_eq!(
            t.push_column("yield", Column::Int(vec![0; 4])),
            Err(TableError::DuplicateColumn("yield".into()))
        );
        assert!(matches!(
            t.push_column("x", Column::Int(vec![0; 3])),
            Err(TableError::LengthMismatch { .. })
        ));
        assert_eq!(t.push_column("", Column::Int(vec![0; 4])), Err(TableError::EmptyColumnName));
    }

    #[test]
    fn concat_requires_same_schema() {
        let t = yields();
        let both = t.concat(&t).unwrap();
        assert_eq!(both.n_rows(), 8);
        let other = t.select(&["yield"]).unwrap();
        assert_eq!(t.concat(&other), Err(TableError::SchemaMismatch));
    }

    #[test]
    fn vocabulary_sorted_unique() {
        let t = yields();
        assert_eq!(t.column("season").unwrap().vocabulary(), vec!["A", "B", "C"]);
    }
}
