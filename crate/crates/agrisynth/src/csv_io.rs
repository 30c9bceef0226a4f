//! RFC 4180 CSV reading and writing for [`Table`], plus the optional JSON
//! schema sidecar (`{column: {dtype, units}}`).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use agrisynth_core::{Column, DType, Date, Table, TableError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },
    #[error("column `{column}` row {row}: cannot read {value:?} as {dtype:?}")]
    TypeCoercion { column: String, row: usize, value: String, dtype: DType },
    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),
    #[error("invalid schema sidecar: {0}")]
    Schema(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnType {
    pub dtype: DType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

/// Column name to forced dtype and units.
pub type Schema = BTreeMap<String, ColumnType>;

pub fn schema_of(table: &Table) -> Schema {
    table
        .schema()
        .into_iter()
        .map(|c| (c.name, ColumnType { dtype: c.dtype, units: c.units }))
        .collect()
}

/// `data/x.csv` -> `data/x.schema.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("schema.json")
}

pub fn read_schema(path: &Path) -> Result<Schema, CsvError> {
    let text = std::fs::read_to_string(path).map_err(|source| CsvError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| CsvError::Schema(format!("{}: {e}", path.display())))
}

pub fn write_schema(table: &Table, path: &Path) -> Result<(), CsvError> {
    let mut text = serde_json::to_string_pretty(&schema_of(table)).expect("schema serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CsvError::Io { path: path.into(), source })
}

pub fn read_csv(path: &Path, schema: Option<&Schema>) -> Result<Table, CsvError> {
    let file = File::open(path).map_err(|source| CsvError::Io { path: path.into(), source })?;
    read_csv_from(file, schema)
}

/// Read `path`, forcing dtypes from its sidecar when one exists.
pub fn read_csv_auto(path: &Path) -> Result<Table, CsvError> {
    let sidecar = sidecar_path(path);
    let schema = if sidecar.is_file() { Some(read_schema(&sidecar)?) } else { None };
    read_csv(path, schema.as_ref())
}

fn malformed(e: csv::Error) -> CsvError {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    CsvError::MalformedCsv { line, message }
}

pub fn read_csv_from<R: Read>(reader: R, schema: Option<&Schema>) -> Result<Table, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(false).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(malformed)?,
        None => return Err(CsvError::MalformedCsv { line: 1, message: "missing header row".into() }),
    };
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(CsvError::DuplicateHeader(n.clone()));
        }
    }
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for rec in records {
        let rec = rec.map_err(malformed)?;
        for (col, v) in cells.iter_mut().zip(rec.iter()) {
            col.push(v.to_owned());
        }
    }

    let mut table = Table::new();
    for (name, raw) in names.into_iter().zip(cells) {
        let forced = schema.and_then(|s| s.get(&name));
        let dtype = match forced {
            Some(t) => t.dtype,
            None => infer(&name, &raw)?,
        };
        let column = parse_column(&name, &raw, dtype)?;
        table.push_column(name.clone(), column)?;
        if let Some(units) = forced.and_then(|t| t.units.clone()) {
            table.set_units(&name, Some(units))?;
        }
    }
    Ok(table)
}

fn infer(name: &str, raw: &[String]) -> Result<DType, CsvError> {
    let present: Vec<&str> = raw.iter().map(String::as_str).filter(|v| !v.is_empty()).collect();
    if present.is_empty() {
        return Ok(DType::Category);
    }
    let dtype = if present.iter().all(|v| v.parse::<i64>().is_ok()) {
        DType::Int64
    } else if present.iter().all(|v| v.parse::<f64>().is_ok()) {
        DType::Float64
    } else if present.iter().all(|v| v.parse::<Date>().is_ok()) {
        DType::Date
    } else {
        DType::Category
    };
    if dtype != DType::Category && present.len() < raw.len() {
        let row = raw.iter().position(String::is_empty).expect("some cell is empty");
        return Err(CsvError::TypeCoercion { column: name.into(), row, value: String::new(), dtype });
    }
    Ok(dtype)
}

fn parse_column(name: &str, raw: &[String], dtype: DType) -> Result<Column, CsvError> {
    fn each<T>(name: &str, raw: &[String], dtype: DType, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CsvError> {
        raw.iter()
            .enumerate()
            .map(|(row, v)| {
                f(v).ok_or_else(|| CsvError::TypeCoercion { column: name.into(), row, value: v.clone(), dtype })
            })
            .collect()
    }
    Ok(match dtype {
        DType::Float64 => Column::Float(each(name, raw, dtype, |v| v.parse().ok())?),
        DType::Int64 => Column::Int(each(name, raw, dtype, |v| v.parse().ok())?),
        DType::Date => Column::Date(each(name, raw, dtype, |v| v.parse().ok())?),
        DType::Category => Column::Category(raw.to_vec()),
    })
}

/// Shortest decimal that parses back to the same bits; always carries a
/// `.` or exponent so it re-infers as float.
fn format_float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv_to<W: Write>(table: &Table, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(writer);
    w.write_record(table.column_names())?;
    let fields = table.fields();
    let mut row = Vec::with_capacity(fields.len());
    for r in 0..table.n_rows() {
        row.clear();
        for f in fields {
            row.push(match &f.data {
                Column::Float(v) => format_float(v[r]),
                Column::Int(v) => v[r].to_string(),
                Column::Category(v) => v[r].clone(),
                Column::Date(v) => v[r].to_string(),
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), CsvError> {
    let io = |source| CsvError::Io { path: path.into(), source };
    let file = File::create(path).map_err(io)?;
    write_csv_to(table, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io(source),
        other => CsvError::MalformedCsv { line: 0, message: format!("{other:?}") },
    })
}

/// [`write_csv`] plus the schema sidecar next to it.
pub fn write_csv_with_schema(table: &Table, path: &Path) -> Result<(), CsvError> {
    write_csv(table, path)?;
    write_schema(table, &sidecar_path(path))
}

pub fn to_csv_string(table: &Table) -> String {
    let mut buf = Vec::new();
    write_csv_to(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}
