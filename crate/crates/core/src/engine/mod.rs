//! Execution strategies.
//!
//! The naive engine evaluates every operand pair and returns the complete
//! result. The sampler evaluates the query on randomly drawn tables and
//! returns up to `result_budget` distinct results, each of which the naive
//! engine would also return.

mod naive;
mod sampler;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use crate::algebra::Collection;
use crate::ast::QueryAst;
use crate::catalog::Catalog;
use crate::error::EngineError;
use crate::eval::{Env, NodeCounters};

pub use naive::{run_naive, run_naive_with_env};
pub use sampler::{run_sampler, run_sampler_with_env};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Naive,
    Sampler,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Naive => "naive",
            Strategy::Sampler => "sampler",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "sampler" => Ok(Strategy::Sampler),
            other => Err(format!("unknown engine `{other}` (expected naive or sampler)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EngineConfig {
    pub strategy: Strategy,
    /// Most operand pairs one binary function may enumerate.
    pub pair_budget: u64,
    /// Sampler: stop after this many distinct results.
    pub result_budget: usize,
    /// Sampler: stop after this many draws.
    pub attempt_budget: u64,
    pub rng_seed: u64,
    pub siml_threshold: f64,
    /// Most rows one operator output may have.
    pub max_rows_per_table: usize,
    /// Apply inferred constraints before enumerating.
    pub prune: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            strategy: Strategy::Naive,
            pair_budget: 1_000_000,
            result_budget: 10,
            attempt_budget: 10_000,
            rng_seed: 0,
            siml_threshold: 0.5,
            max_rows_per_table: 1_000_000,
            prune: true,
        }
    }
}

impl EngineConfig {
    pub const KEYS: &'static [&'static str] =
        &["engine", "pair_budget", "k", "attempt_budget", "seed", "siml_threshold", "max_rows", "prune"];

    /// Sets one option by name, as typed in the REPL.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn positive<T: FromStr + PartialOrd + Default>(key: &str, value: &str) -> Result<T, String> {
            match value.parse::<T>() {
                Ok(v) if v > T::default() => Ok(v),
                _ => Err(format!("`{key}` needs a positive integer, got `{value}`")),
            }
        }
        match key {
            "engine" | "strategy" => self.strategy = value.parse()?,
            "pair_budget" => self.pair_budget = positive(key, value)?,
            "k" | "result_budget" => self.result_budget = positive(key, value)?,
            "attempt_budget" => self.attempt_budget = positive(key, value)?,
            "max_rows" | "max_rows_per_table" => self.max_rows_per_table = positive(key, value)?,
            "seed" | "rng_seed" => {
                self.rng_seed = value.parse().map_err(|_| format!("`seed` needs an unsigned integer, got `{value}`"))?
            }
            "siml_threshold" => match value.parse::<f64>() {
                Ok(v) if (0.0..=1.0).contains(&v) => self.siml_threshold = v,
                _ => return Err(format!("`siml_threshold` needs a number in [0, 1], got `{value}`")),
            },
            "prune" => {
                self.prune = match value {
                    "true" | "on" | "1" => true,
                    "false" | "off" | "0" => false,
                    _ => return Err(format!("`prune` needs true or false, got `{value}`")),
                }
            }
            _ => return Err(format!("unknown setting `{key}` (known: {})", Self::KEYS.join(", "))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct QueryReport {
    pub strategy: Strategy,
    /// Result tables in presentation order.
    pub results: Vec<Arc<crate::catalog::Table>>,
    pub collection: Collection,
    pub counters: Vec<NodeCounters>,
    /// Sampler draws made; 0 for the naive engine.
    pub attempts: u64,
    /// Sampler: the draw that produced the first result.
    pub first_hit: Option<u64>,
    /// Sampler: the attempt budget ran out before `result_budget` results.
    pub exhausted: bool,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

/// Runs `q` with the configured strategy in a fresh environment.
pub fn run(q: &QueryAst, catalog: &Catalog, config: &EngineConfig) -> Result<QueryReport, EngineError> {
    run_with_env(q, catalog, config, &mut Env::new())
}

/// Runs `q` against existing bindings, which are updated by assignments.
pub fn run_with_env(
    q: &QueryAst,
    catalog: &Catalog,
    config: &EngineConfig,
    env: &mut Env,
) -> Result<QueryReport, EngineError> {
    match config.strategy {
        Strategy::Naive => run_naive_with_env(q, catalog, config, env),
        Strategy::Sampler => run_sampler_with_env(q, catalog, config, env),
    }
}
