use agrisynth::csv_io::{read_csv, read_csv_auto, read_csv_from, schema_of, to_csv_string, write_csv_with_schema};
use agrisynth_core::table::Field;
use agrisynth_core::{Column, Date, Table};
use proptest::prelude::*;

fn column(dtype: u8, rows: usize) -> BoxedStrategy<Column> {
    match dtype {
        0 => prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, rows).prop_map(Column::Float).boxed(),
        1 => prop::collection::vec(any::<i64>(), rows).prop_map(Column::Int).boxed(),
        2 => prop::collection::vec("[a-zA-Z0-9 ,\"'\n;-]{0,12}", rows).prop_map(Column::Category).boxed(),
        _ => prop::collection::vec(-30_000i32..60_000, rows)
            .prop_map(|d| Column::Date(d.into_iter().map(Date::from_days).collect()))
            .boxed(),
    }
}

fn table() -> impl Strategy<Value = Table> {
    (0usize..15, prop::collection::vec((0u8..4, prop::option::of("[a-z/%]{1,5}")), 1..6)).prop_flat_map(|(rows, specs)| {
        let cols: Vec<_> = specs.iter().map(|(d, _)| column(*d, rows)).collect();
        let units: Vec<_> = specs.into_iter().map(|(_, u)| u).collect();
        cols.prop_map(move |cols| {
            let mut t = Table::new();
            for (i, (data, units)) in cols.into_iter().zip(units.clone()).enumerate() {
                t.push_field(Field { name: format!("c{i}"), units, data }).unwrap();
            }
            t
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn schema_round_trip_is_bit_exact(t in table()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv_with_schema(&t, &path).unwrap();
        let back = read_csv_auto(&path).unwrap();
        prop_assert!(back.bit_eq(&t), "{:?}\n{:?}", t, back);
        let explicit = read_csv(&path, Some(&schema_of(&t))).unwrap();
        prop_assert!(explicit.bit_eq(&t));
    }

    #[test]
    fn writing_is_idempotent(t in table()) {
        let text = to_csv_string(&t);
        let back = read_csv_from(text.as_bytes(), Some(&schema_of(&t))).unwrap();
        prop_assert_eq!(to_csv_string(&back), text);
    }
}
