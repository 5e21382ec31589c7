//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use tql_core::catalog::{Column, ColumnType, Schema};
use tql_core::{load_catalog, Catalog, IngestConfig, Table, Value};

pub const COMBINED: &str = r#"(JOIN S T) : {COL*["obesity"] AND COL*["social media"]};"#;
pub const COMPOSITION: &str = r#"JOIN[S["nm"] = T["nm"]] (S : {SRC[cities_gdp]}) (T : {SRC[cities_population]});"#;
pub const GDP: &str = r#"Q : {COL*["gdp"]};"#;

pub fn corpus() -> Catalog {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/corpus"));
    load_catalog(&dir, &IngestConfig::default()).expect("fixture corpus loads")
}

/// `n` tables of `rows` rows. Tables alternate between two disjoint column
/// sets, so half of all pairs share their columns and join.
pub fn synthetic(n: usize, rows: usize) -> Catalog {
    let names = ["id", "state", "year", "value", "label", "count"];
    Catalog::from_tables((0..n).map(|i| {
        let cols: Vec<&str> = (0..3).map(|j| names[(i + j * 2) % names.len()]).collect();
        let schema = Schema::new(cols.iter().map(|c| Column::new(*c, ColumnType::Numeric)).collect()).unwrap();
        let data = (0..rows)
            .map(|r| cols.iter().enumerate().map(|(j, _)| Value::Integer(((r * (j + 1) + i) % 50) as i64)).collect())
            .collect();
        Table::base(format!("s{i}"), schema, data).unwrap()
    }))
}

/// A long query text built from `n` copies of the combined query.
pub fn long_query(n: usize) -> String {
    (0..n).map(|i| format!("X{i} = {COMBINED}\n")).collect()
}
