//! Dataset ingestion and discovery metadata.
//!
//! A [`Catalog`] is built once from a directory of CSV files and is read-only
//! afterwards. It owns the universe collection (every successfully ingested
//! base table) together with per-column distinct-value sets and key-candidate
//! flags used by the similarity and primary/foreign-key constraints.

mod discovery;
mod table;
mod value;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use discovery::{column_jaccard, find_pf_key, meta_pf_key, meta_similarity, table_similarity};
pub use table::{Column, ColumnType, ContentHash, Row, Schema, Table, TableId};
pub use value::Value;

use crate::algebra::Collection;
use crate::error::CatalogError;

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub delimiter: u8,
    /// Files with more data rows than this are skipped with a warning.
    pub max_rows: Option<usize>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { delimiter: b',', max_rows: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "skipped {}: {}", self.path.display(), self.message)
    }
}

#[derive(Debug, Clone)]
pub struct ColumnMeta {
    /// Non-null distinct values.
    pub distinct: HashSet<Value>,
    /// Every non-null value is distinct and there is at least one.
    pub is_key: bool,
}

#[derive(Debug, Clone)]
pub struct TableMeta {
    pub columns: Vec<ColumnMeta>,
}

impl TableMeta {
    pub fn compute(table: &Table) -> Self {
        let columns = (0..table.schema().len())
            .map(|i| {
                let mut distinct = HashSet::new();
                let mut non_null = 0usize;
                for v in table.column_values(i).filter(|v| !v.is_null()) {
                    non_null += 1;
                    distinct.insert(v.clone());
                }
                let is_key = non_null > 0 && distinct.len() == non_null;
                ColumnMeta { distinct, is_key }
            })
            .collect();
        TableMeta { columns }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    universe: Collection,
    meta: HashMap<TableId, Arc<TableMeta>>,
    by_name: BTreeMap<String, Arc<Table>>,
    warnings: Vec<IngestWarning>,
}

impl Catalog {
    /// Builds a catalog from already constructed base tables. Tables whose
    /// name is missing or already taken are skipped with a warning.
    pub fn from_tables(tables: impl IntoIterator<Item = Table>) -> Self {
        let mut catalog = Catalog::default();
        for t in tables {
            catalog.insert(t, PathBuf::new());
        }
        catalog
    }

    fn insert(&mut self, table: Table, origin: PathBuf) {
        let Some(name) = table.name().map(str::to_owned) else {
            self.warnings.push(IngestWarning { path: origin, message: "table has no name".into() });
            return;
        };
        if self.by_name.contains_key(&name) {
            self.warnings
                .push(IngestWarning { path: origin, message: format!("a table named `{name}` is already loaded") });
            return;
        }
        let table = Arc::new(table);
        self.meta.insert(table.id(), Arc::new(TableMeta::compute(&table)));
        self.by_name.insert(name, table.clone());
        self.universe.insert(table);
    }

    pub fn universe(&self) -> &Collection {
        &self.universe
    }

    pub fn table(&self, name: &str) -> Option<&Arc<Table>> {
        self.by_name.get(name)
    }

    /// Base tables ordered by name.
    pub fn tables(&self) -> impl Iterator<Item = &Arc<Table>> {
        self.by_name.values()
    }

    pub fn warnings(&self) -> &[IngestWarning] {
        &self.warnings
    }

    /// Cached metadata for base tables, computed on demand for derived ones.
    pub fn meta(&self, table: &Table) -> Arc<TableMeta> {
        match self.meta.get(&table.id()) {
            Some(m) => m.clone(),
            None => Arc::new(TableMeta::compute(table)),
        }
    }
}

pub fn load_catalog(root: &Path, config: &IngestConfig) -> Result<Catalog, CatalogError> {
    let unreadable = |source| CatalogError::Unreadable { path: root.to_path_buf(), source };
    let mut paths = Vec::new();
    for entry in fs::read_dir(root).map_err(unreadable)? {
        let path = entry.map_err(unreadable)?.path();
        let is_csv = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();

    let mut catalog = Catalog::default();
    for path in paths {
        match read_csv_table(&path, config) {
            Ok(table) => catalog.insert(table, path),
            Err(message) => catalog.warnings.push(IngestWarning { path, message }),
        }
    }
    Ok(catalog)
}

/// Reads one CSV file into a base table named after the file stem.
pub fn read_csv_table(path: &Path, config: &IngestConfig) -> Result<Table, String> {
    let name =
        path.file_stem().and_then(|s| s.to_str()).ok_or_else(|| "file name is not valid UTF-8".to_owned())?.to_owned();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(config.delimiter)
        .from_path(path)
        .map_err(|e| e.to_string())?;
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err("missing header row".into());
    }

    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        if let Some(limit) = config.max_rows {
            if cells.len() >= limit {
                return Err(format!("more than {limit} rows"));
            }
        }
        cells.push(record.iter().map(str::to_owned).collect());
    }
    table_from_cells(name, header, cells).map_err(|e| e.to_string())
}

/// Applies the ingest typing rule: a column is numeric iff every non-empty
/// cell parses as a number; empty cells become `Null`.
pub fn table_from_cells(
    name: String,
    header: Vec<String>,
    cells: Vec<Vec<String>>,
) -> Result<Table, crate::error::TableError> {
    let types: Vec<ColumnType> = (0..header.len())
        .map(|i| {
            let numeric = cells.iter().all(|row| {
                let cell = row.get(i).map(|c| c.trim()).unwrap_or("");
                cell.is_empty() || Value::parse_numeric(cell).is_some()
            });
            if numeric {
                ColumnType::Numeric
            } else {
                ColumnType::Text
            }
        })
        .collect();
    let schema = Schema::new(header.into_iter().zip(&types).map(|(n, t)| Column::new(n, *t)).collect())?;
    let rows = cells
        .into_iter()
        .map(|row| {
            row.into_iter()
                .zip(&types)
                .map(|(cell, ty)| {
                    if cell.trim().is_empty() {
                        Value::Null
                    } else if *ty == ColumnType::Numeric {
                        Value::parse_numeric(&cell).unwrap_or(Value::Null)
                    } else {
                        Value::Text(cell)
                    }
                })
                .collect()
        })
        .collect();
    Table::base(name, schema, rows)
}

/// Writes a table in the ingest dialect. `Null` is written as an empty cell.
pub fn write_csv_table(table: &Table, path: &Path) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(table.schema().names())?;
    for row in table.rows() {
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
