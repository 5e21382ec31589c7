//! Command-line front end: batch queries, an interactive REPL, result
//! rendering and CSV export.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use tql_core::ast::QueryAst;
use tql_core::catalog::{load_catalog, write_csv_table, Catalog, IngestConfig, Table, Value};
use tql_core::engine::{run_with_env, EngineConfig, QueryReport, Strategy};
use tql_core::eval::{Env, NodeCounters};
use tql_core::infer::derive_constraints;
use tql_core::parser::parse_query;
use tql_core::EngineError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_CATALOG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Rows shown per result table.
pub const PREVIEW_ROWS: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "tql", version, about = "Query a directory of CSV tables with TQL")]
pub struct Args {
    /// Directory of CSV files; each file becomes a table named after it.
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long, default_value = "naive")]
    pub engine: Strategy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampler result budget.
    #[arg(long)]
    pub k: Option<usize>,
    /// Run this query and exit.
    #[arg(long, conflicts_with = "file")]
    pub query: Option<String>,
    /// Run the query in this file and exit.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Print the inferred constraints of every node instead of running.
    #[arg(long)]
    pub explain: bool,
    /// Write result table INDEX to PATH as CSV.
    #[arg(long, num_args = 2, value_names = ["INDEX", "PATH"])]
    pub export: Option<Vec<String>>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

impl Args {
    pub fn engine_config(&self) -> EngineConfig {
        let mut config = EngineConfig { strategy: self.engine, rng_seed: self.seed, ..EngineConfig::default() };
        if let Some(k) = self.k {
            config.result_budget = k.max(1);
        }
        config
    }
}

#[derive(Debug, Serialize)]
struct ColumnView<'a> {
    name: &'a str,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Debug, Serialize)]
struct ResultView<'a> {
    index: usize,
    name: String,
    provenance: Vec<&'a str>,
    schema: Vec<ColumnView<'a>>,
    row_count: usize,
    hash: String,
    preview: &'a [Vec<Value>],
}

#[derive(Debug, Serialize)]
struct CountersView<'a> {
    engine: Strategy,
    attempts: u64,
    first_hit: Option<u64>,
    exhausted: bool,
    nodes: &'a [NodeCounters],
}

#[derive(Debug, Serialize)]
struct ReportView<'a> {
    results: Vec<ResultView<'a>>,
    counters: CountersView<'a>,
    warnings: &'a [String],
    elapsed_ms: Option<f64>,
}

fn result_view(index: usize, t: &Table) -> ResultView<'_> {
    ResultView {
        index,
        name: t.display_name(),
        provenance: t.provenance().iter().map(String::as_str).collect(),
        schema: t.schema().columns().iter().map(|c| ColumnView { name: &c.name, ty: c.ty.to_string() }).collect(),
        row_count: t.row_count(),
        hash: t.content_hash().to_hex(),
        preview: &t.rows()[..t.row_count().min(PREVIEW_ROWS)],
    }
}

/// Renders a report. Output depends only on the report, except for the
/// elapsed time, which is included only when `timing` is set.
pub fn render_report(r: &QueryReport, json: bool, timing: bool) -> String {
    let elapsed_ms = timing.then_some(r.elapsed.as_secs_f64() * 1000.0);
    if json {
        let view = ReportView {
            results: r.results.iter().enumerate().map(|(i, t)| result_view(i, t)).collect(),
            counters: CountersView {
                engine: r.strategy,
                attempts: r.attempts,
                first_hit: r.first_hit,
                exhausted: r.exhausted,
                nodes: &r.counters,
            },
            warnings: &r.warnings,
            elapsed_ms,
        };
        let mut s = serde_json::to_string_pretty(&view).expect("report serializes");
        s.push('\n');
        return s;
    }

    let mut out = String::new();
    let n = r.results.len();
    out.push_str(&format!("{n} table{} found\n", if n == 1 { "" } else { "s" }));
    for (i, t) in r.results.iter().enumerate() {
        out.push('\n');
        out.push_str(&render_table(i, t));
    }
    if r.strategy == Strategy::Sampler {
        out.push_str(&format!(
            "\nsampler: {} attempts{}\n",
            r.attempts,
            if r.exhausted { ", attempt budget exhausted" } else { "" }
        ));
    }
    for w in &r.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    if let Some(ms) = elapsed_ms {
        out.push_str(&format!("elapsed: {ms:.3} ms\n"));
    }
    out
}

fn render_table(index: usize, t: &Table) -> String {
    let provenance: Vec<&str> = t.provenance().iter().map(String::as_str).collect();
    let mut out = format!(
        "[{index}] {}  ({} rows; from {}; hash {})\n",
        t.display_name(),
        t.row_count(),
        provenance.join(", "),
        &t.content_hash().to_hex()[..12]
    );
    let header: Vec<String> = t.schema().columns().iter().map(|c| format!("{}:{}", c.name, c.ty)).collect();
    let preview: Vec<Vec<String>> =
        t.rows().iter().take(PREVIEW_ROWS).map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|j| preview.iter().map(|r| r[j].chars().count()).chain([header[j].chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("    {}\n", padded.join(" | ").trim_end())
    };
    out.push_str(&line(&header));
    for r in &preview {
        out.push_str(&line(r));
    }
    if t.row_count() > PREVIEW_ROWS {
        out.push_str(&format!("    ... {} more rows\n", t.row_count() - PREVIEW_ROWS));
    }
    out
}

fn exit_code_for(e: &EngineError) -> i32 {
    match e {
        EngineError::ResourceLimit { .. } => EXIT_RESOURCE,
    }
}

/// Writes result table `index` of `report` to `path`.
pub fn export(report: &QueryReport, index: &str, path: &Path) -> Result<(), String> {
    let i: usize = index.parse().map_err(|_| format!("export index `{index}` is not a number"))?;
    let t = report
        .results
        .get(i)
        .ok_or_else(|| format!("export index {i} is out of range ({} results)", report.results.len()))?;
    write_csv_table(t, path).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Runs the CLI with explicit streams and returns the exit code.
pub fn run(args: Args, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let catalog = match load_catalog(&args.catalog, &IngestConfig::default()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CATALOG;
        }
    };
    for w in catalog.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }

    let source = match (&args.query, &args.file) {
        (Some(q), _) => Some(q.clone()),
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(s) => Some(s),
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
                return EXIT_IO;
            }
        },
        (None, None) => None,
    };

    match source {
        Some(src) => run_batch(&args, &catalog, &src, out, err),
        None => {
            let mut session = Session::new(catalog, args.engine_config());
            session.repl(input, out, err)
        }
    }
}

fn run_batch(args: &Args, catalog: &Catalog, src: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let query = match parse_query(src) {
        Ok(q) => q,
        Err(e) => {
            let _ = writeln!(err, "{}", e.render(src));
            return EXIT_PARSE;
        }
    };
    if args.explain {
        let _ = write!(out, "{}", derive_constraints(&query).render());
        return EXIT_OK;
    }
    let config = args.engine_config();
    let report = match run_with_env(&query, catalog, &config, &mut Env::new()) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code_for(&e);
        }
    };
    let _ = write!(out, "{}", render_report(&report, args.json, args.timing));
    if let Some(spec) = &args.export {
        if let Err(e) = export(&report, &spec[0], Path::new(&spec[1])) {
            let _ = writeln!(err, "error: {e}");
            return EXIT_IO;
        }
    }
    EXIT_OK
}

/// REPL state. Bindings persist between inputs until `:reset`.
pub struct Session {
    pub catalog: Catalog,
    pub env: Env,
    pub config: EngineConfig,
    pub warnings: Vec<String>,
    pub last: Option<QueryReport>,
}

const HELP: &str = "\
statements end with `;` and may span lines
  :tables              list tables
  :schema <name>       show a table's columns
  :set <key> <value>   change a setting (engine, k, seed, pair_budget, attempt_budget,
                       siml_threshold, max_rows, prune)
  :export <i> <path>   write result table i of the last query as CSV
  :reset               forget all bindings
  :quit                leave
";

impl Session {
    pub fn new(catalog: Catalog, config: EngineConfig) -> Self {
        Session { catalog, env: Env::new(), config, warnings: Vec::new(), last: None }
    }

    /// Runs each statement in turn against the session bindings and returns
    /// the report of the last one.
    pub fn execute(&mut self, query: &QueryAst) -> Result<QueryReport, EngineError> {
        let mut last = None;
        for st in &query.statements {
            let single = QueryAst { statements: vec![st.clone()] };
            let report = run_with_env(&single, &self.catalog, &self.config, &mut self.env)?;
            self.warnings.extend(report.warnings.iter().cloned());
            last = Some(report);
        }
        Ok(last.expect("a parsed query has at least one statement"))
    }

    /// Handles a `:command`. Returns false on `:quit`.
    pub fn command(&mut self, line: &str, out: &mut dyn Write) -> bool {
        let mut parts = line.split_whitespace();
        let name = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        let _ = match (name, rest.as_slice()) {
            (":quit" | ":q" | ":exit", _) => return false,
            (":help", _) => write!(out, "{HELP}"),
            (":tables", _) => {
                for t in self.catalog.tables() {
                    let _ =
                        writeln!(out, "{}  ({} columns, {} rows)", t.display_name(), t.schema().len(), t.row_count());
                }
                Ok(())
            }
            (":schema", [table]) => match self.catalog.table(table) {
                Some(t) => {
                    for c in t.schema().columns() {
                        let _ = writeln!(out, "{}: {}", c.name, c.ty);
                    }
                    Ok(())
                }
                None => writeln!(out, "no table named `{table}`"),
            },
            (":set", [key, value]) => match self.config.set(key, value) {
                Ok(()) => writeln!(out, "{key} = {value}"),
                Err(e) => writeln!(out, "error: {e}"),
            },
            (":export", [index, path]) => match &self.last {
                Some(r) => match export(r, index, Path::new(path)) {
                    Ok(()) => writeln!(out, "wrote {path}"),
                    Err(e) => writeln!(out, "error: {e}"),
                },
                None => writeln!(out, "no results to export yet"),
            },
            (":reset", _) => {
                self.env.clear();
                writeln!(out, "bindings cleared")
            }
            _ => writeln!(out, "unknown command `{line}`; try :help"),
        };
        true
    }

    pub fn repl(&mut self, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
        let mut buffer = String::new();
        let mut line = String::new();
        loop {
            let _ = write!(out, "{}", if buffer.is_empty() { "tql> " } else { "...> " });
            let _ = out.flush();
            line.clear();
            match input.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {}
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_IO;
                }
            }
            let trimmed = line.trim();
            if buffer.is_empty() && trimmed.starts_with(':') {
                if !self.command(trimmed, out) {
                    break;
                }
                continue;
            }
            buffer.push_str(&line);
            if !buffer.trim_end().ends_with(';') {
                continue;
            }
            let src = std::mem::take(&mut buffer);
            match parse_query(&src) {
                Ok(q) => match self.execute(&q) {
                    Ok(report) => {
                        let _ = write!(out, "{}", render_report(&report, false, false));
                        self.last = Some(report);
                    }
                    Err(e) => {
                        let _ = writeln!(out, "error: {e}");
                    }
                },
                Err(e) => {
                    let _ = writeln!(out, "{}", e.render(&src));
                }
            }
        }
        EXIT_OK
    }
}
