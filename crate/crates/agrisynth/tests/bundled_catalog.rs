use std::path::{Path, PathBuf};

use agrisynth::catalog::{Catalog, CatalogEntry, CatalogError, Kind, Query, TimeRange};
use agrisynth::csv_io::{read_csv, read_schema, schema_of};
use agrisynth::demo;

fn manifest() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/catalog.json")
}

fn range(a: &str, b: &str) -> TimeRange {
    TimeRange { start: a.parse().unwrap(), end: b.parse().unwrap() }
}

#[test]
fn bundled_entries_load_with_their_schemas() {
    let cat = Catalog::load(manifest()).unwrap();
    assert_eq!(cat.len(), 3);
    for e in cat.entries() {
        let schema = read_schema(&cat.resolve(e.schema_path.as_ref().unwrap())).unwrap();
        let t = read_csv(&cat.resolve(&e.path), Some(&schema)).unwrap();
        assert!(t.n_rows() > 0, "{}", e.id);
        assert_eq!(schema_of(&t), schema, "{}", e.id);
    }
}

#[test]
fn bundled_trials_match_the_embedded_copy() {
    let cat = Catalog::load(manifest()).unwrap();
    let e = cat.get("trials-imbalanced").unwrap();
    let schema = read_schema(&cat.resolve(e.schema_path.as_ref().unwrap())).unwrap();
    let on_disk = read_csv(&cat.resolve(&e.path), Some(&schema)).unwrap();
    assert!(on_disk.bit_eq(&demo::bundled_trials()));
    assert_eq!(on_disk.n_rows(), 1200);
}

#[test]
fn queries_filter_by_kind_region_and_time() {
    let cat = Catalog::load(manifest()).unwrap();
    let ids = |q: Query| cat.query(&q).iter().map(|e| e.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(Query::default()), ["soil-om-grid", "trials-imbalanced", "weather-temperate-2023"]);
    assert_eq!(ids(Query { kind: Some(Kind::Weather), ..Query::default() }), ["weather-temperate-2023"]);
    assert_eq!(ids(Query { overlaps: Some(range("2021-03-01", "2021-04-01")), ..Query::default() }), ["trials-imbalanced"]);
    assert_eq!(ids(Query { overlaps: Some(range("2023-12-31", "2024-02-01")), ..Query::default() }).len(), 3);
    assert!(ids(Query { region: Some("tropical".into()), ..Query::default() }).is_empty());
    assert!(ids(Query { overlaps: Some(range("2024-01-01", "2024-12-31")), ..Query::default() }).is_empty());
}

#[test]
fn register_persists_and_rejects_bad_entries() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("catalog.json");
    std::fs::write(dir.path().join("run.csv"), "a\n1\n").unwrap();
    let entry = |id: &str, path: &str| CatalogEntry {
        id: id.into(),
        kind: Kind::Synthetic,
        region: "test".into(),
        time_range: range("2020-01-01", "2020-12-31"),
        path: path.into(),
        schema_path: None,
        provenance: "unit".into(),
    };
    let mut cat = Catalog::create(&manifest);
    cat.register_output(entry("run-1", "run.csv")).unwrap();
    assert!(matches!(cat.register_output(entry("run-1", "run.csv")), Err(CatalogError::DuplicateId(_))));
    assert!(matches!(cat.register_output(entry("run-2", "gone.csv")), Err(CatalogError::DanglingPath { .. })));
    let mut backwards = entry("run-3", "run.csv");
    backwards.time_range = range("2021-01-01", "2020-01-01");
    assert!(matches!(cat.register_output(backwards), Err(CatalogError::InvalidRange(_))));

    let reloaded = Catalog::load(&manifest).unwrap();
    assert_eq!(reloaded.entries(), cat.entries());
    assert_eq!(reloaded.len(), 1);
}

#[test]
fn malformed_manifest_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("catalog.json");
    std::fs::write(&manifest, "{\"entries\": [{\"id\": 3}]}").unwrap();
    assert!(matches!(Catalog::load(&manifest), Err(CatalogError::ManifestParse { .. })));
}
