//! TQL: a query language over collections of tables.
//!
//! A program names collections of tables and combines them with lifted
//! relational operators and signature restrictions:
//!
//! ```
//! use tql_core::{catalog::Catalog, engine, parser::parse_query};
//!
//! let catalog = Catalog::default();
//! let query = parse_query(r#"Q : {COL*["gdp"]};"#).unwrap();
//! let report = engine::run(&query, &catalog, &engine::EngineConfig::default()).unwrap();
//! assert!(report.results.is_empty());
//! ```

pub mod algebra;
pub mod ast;
pub mod catalog;
pub mod engine;
pub mod error;
pub mod eval;
pub mod infer;
pub mod parser;

pub use algebra::Collection;
pub use ast::{pretty_print, QueryAst};
pub use catalog::{load_catalog, Catalog, Column, ColumnType, IngestConfig, Schema, Table, Value};
pub use engine::{run, run_with_env, EngineConfig, QueryReport, Strategy};
pub use error::{CatalogError, EngineError, Error, ParseError};
pub use eval::Env;
pub use parser::parse_query;
