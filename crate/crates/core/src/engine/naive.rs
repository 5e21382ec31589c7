use std::sync::Arc;
use std::time::Instant;

use super::{EngineConfig, QueryReport, Strategy};
use crate::ast::QueryAst;
use crate::catalog::{Catalog, Table};
use crate::error::EngineError;
use crate::eval::{Env, Evaluator};
use crate::infer::derive_constraints;

pub fn run_naive(q: &QueryAst, catalog: &Catalog, config: &EngineConfig) -> Result<QueryReport, EngineError> {
    run_naive_with_env(q, catalog, config, &mut Env::new())
}

pub fn run_naive_with_env(
    q: &QueryAst,
    catalog: &Catalog,
    config: &EngineConfig,
    env: &mut Env,
) -> Result<QueryReport, EngineError> {
    let start = Instant::now();
    let annotations = derive_constraints(q);
    let ev = Evaluator::new(catalog, config, &annotations);
    let collection = ev.eval_query(q, env)?;
    let (counters, warnings) = ev.finish();

    let mut results: Vec<Arc<Table>> = collection.iter().cloned().collect();
    results.sort_by_cached_key(|t| (t.display_name(), t.id()));
    Ok(QueryReport {
        strategy: Strategy::Naive,
        results,
        collection,
        counters,
        attempts: 0,
        first_hit: None,
        exhausted: false,
        warnings,
        elapsed: start.elapsed(),
    })
}
