use std::path::PathBuf;

use thiserror::Error;

pub use crate::parser::ParseError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("row {row} has {found} values, schema has {expected} columns")]
    Arity { row: usize, expected: usize, found: usize },
    #[error("a table needs at least one provenance entry")]
    EmptyProvenance,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog directory {}: {source}", path.display())]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Evaluation failures. Per-row problems are warnings, not errors; the only
/// hard failure during evaluation is running into a configured budget.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("resource limit exceeded in {operation}: {requested} {unit} requested, limit is {limit}")]
    ResourceLimit { operation: String, unit: &'static str, requested: u128, limit: u128 },
}

/// Everything a complete query run can fail with.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
