//! Local dataset registry backed by a `catalog.json` manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use agrisynth_core::Date;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse manifest {path}: {message}")]
    ManifestParse { path: PathBuf, message: String },
    #[error("duplicate dataset id `{0}`")]
    DuplicateId(String),
    #[error("dataset `{id}` points at missing file {path}")]
    DanglingPath { id: String, path: PathBuf },
    #[error("dataset `{0}` has start after end")]
    InvalidRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Weather,
    Soil,
    Trials,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: Date,
    pub end: Date,
}

impl TimeRange {
    pub fn overlaps(&self, other: &TimeRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub kind: Kind,
    pub region: String,
    pub time_range: TimeRange,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_path: Option<PathBuf>,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    entries: Vec<CatalogEntry>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub kind: Option<Kind>,
    pub region: Option<String>,
    pub overlaps: Option<TimeRange>,
}

impl Query {
    pub fn matches(&self, e: &CatalogEntry) -> bool {
        self.kind.is_none_or(|k| k == e.kind)
            && self.region.as_ref().is_none_or(|r| *r == e.region)
            && self.overlaps.is_none_or(|t| t.overlaps(&e.time_range))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    manifest: PathBuf,
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// An empty catalog that will be saved to `manifest`.
    pub fn create(manifest: impl Into<PathBuf>) -> Self {
        Catalog { manifest: manifest.into(), entries: Vec::new() }
    }

    pub fn load(manifest: impl Into<PathBuf>) -> Result<Self, CatalogError> {
        let manifest = manifest.into();
        let text = std::fs::read_to_string(&manifest)
            .map_err(|source| CatalogError::Io { path: manifest.clone(), source })?;
        let parsed: Manifest = serde_json::from_str(&text)
            .map_err(|e| CatalogError::ManifestParse { path: manifest.clone(), message: e.to_string() })?;
        let mut cat = Catalog { manifest, entries: Vec::with_capacity(parsed.entries.len()) };
        for e in parsed.entries {
            cat.check(&e)?;
            cat.entries.push(e);
        }
        Ok(cat)
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest
    }

    pub fn root(&self) -> &Path {
        self.manifest.parent().unwrap_or(Path::new(""))
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.root().join(path)
    }

    fn check(&self, e: &CatalogEntry) -> Result<(), CatalogError> {
        if self.get(&e.id).is_some() {
            return Err(CatalogError::DuplicateId(e.id.clone()));
        }
        if e.time_range.start > e.time_range.end {
            return Err(CatalogError::InvalidRange(e.id.clone()));
        }
        for p in std::iter::once(&e.path).chain(e.schema_path.as_ref()) {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(CatalogError::DanglingPath { id: e.id.clone(), path: full });
            }
        }
        Ok(())
    }

    /// Matching entries ordered by id.
    pub fn query(&self, q: &Query) -> Vec<&CatalogEntry> {
        let mut out: Vec<&CatalogEntry> = self.entries.iter().filter(|e| q.matches(e)).collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    /// Write the manifest via a temporary file and rename.
    pub fn save(&self) -> Result<(), CatalogError> {
        let dir = self.root();
        let dir = if dir.as_os_str().is_empty() { Path::new(".") } else { dir };
        let io = |source| CatalogError::Io { path: self.manifest.clone(), source };
        let mut text = serde_json::to_string_pretty(&Manifest { entries: self.entries.clone() })
            .expect("manifest serializes");
        text.push('\n');
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(text.as_bytes()).map_err(io)?;
        tmp.persist(&self.manifest).map_err(|e| io(e.error))?;
        Ok(())
    }

    /// Append `entry` and rewrite the manifest.
    pub fn register_output(&mut self, entry: CatalogEntry) -> Result<(), CatalogError> {
        self.check(&entry)?;
        self.entries.push(entry);
        if let Err(e) = self.save() {
            self.entries.pop();
            return Err(e);
        }
        Ok(())
    }
}
