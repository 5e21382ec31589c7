//! Query semantics.
//!
//! An [`Evaluator`] computes the value of collection expressions against a
//! [`Catalog`] and a [`Scope`] of named collections. Table-level work is
//! delegated to [`crate::algebra`]; this module supplies the meaning of
//! signatures, row predicates and expressions, and applies the pruning
//! derived by [`crate::infer`] when enabled.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::algebra::{self, coll_diff, coll_intersect, coll_union, lift_binary, lift_unary, Collection};
use crate::ast::{ArithOp, CmpOp, CollectionExpr, Expr, FuncExpr, PropExpr, QueryAst, RowPred, Signature};
use crate::catalog::{meta_pf_key, meta_similarity, Catalog, Table, TableMeta, Value};
use crate::engine::EngineConfig;
use crate::error::EngineError;
use crate::infer::{node_label, pair_admissible, AnnotatedAst, ConstraintSet};

/// Resolves identifiers to collections.
pub trait Scope {
    fn lookup(&mut self, id: &str, ev: &Evaluator<'_>) -> Result<Collection, EngineError>;
    fn bind(&mut self, id: &str, value: Collection);
}

/// Named collections. An identifier that was never assigned denotes the
/// whole universe; the first lookup binds it so later mentions agree.
#[derive(Debug, Clone, Default)]
pub struct Env {
    bindings: BTreeMap<String, Collection>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Option<&Collection> {
        self.bindings.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Collection)> {
        self.bindings.iter()
    }

    pub fn clear(&mut self) {
        self.bindings.clear();
    }
}

impl Scope for Env {
    fn lookup(&mut self, id: &str, ev: &Evaluator<'_>) -> Result<Collection, EngineError> {
        Ok(self.bindings.entry(id.to_owned()).or_insert_with(|| ev.catalog().universe().clone()).clone())
    }

    fn bind(&mut self, id: &str, value: Collection) {
        self.bindings.insert(id.to_owned(), value);
    }
}

/// Work done at one collection node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeCounters {
    pub node: usize,
    pub label: String,
    pub evaluations: u64,
    pub tables_in: u64,
    pub tables_pruned: u64,
    pub pairs_enumerated: u64,
    pub pairs_pruned: u64,
    pub tables_out: u64,
}

/// Tables referenced by `SIML[id]` / `PFKEY[id]`, with their metadata.
pub type Refs = HashMap<String, Vec<(Arc<Table>, Arc<TableMeta>)>>;

/// Values bound to attribute identifiers while a row predicate runs.
///
/// With one table every identifier names it. With two, an identifier names
/// the operand whose syntactic identifier it equals; if it equals both or
/// neither it does not resolve.
#[derive(Debug, Clone, Copy)]
pub struct RowBinding<'r> {
    pub left: (&'r Table, &'r [Value]),
    pub right: Option<(&'r Table, &'r [Value])>,
    pub names: (Option<&'r str>, Option<&'r str>),
}

impl<'r> RowBinding<'r> {
    pub fn single(table: &'r Table, row: &'r [Value]) -> Self {
        RowBinding { left: (table, row), right: None, names: (None, None) }
    }

    pub fn pair(
        left: (&'r Table, &'r [Value]),
        right: (&'r Table, &'r [Value]),
        names: (Option<&'r str>, Option<&'r str>),
    ) -> Self {
        RowBinding { left, right: Some(right), names }
    }

    fn side(&self, id: &str) -> Option<(&'r Table, &'r [Value])> {
        match self.right {
            None => Some(self.left),
            Some(right) => match (self.names.0 == Some(id), self.names.1 == Some(id)) {
                (true, false) => Some(self.left),
                (false, true) => Some(right),
                _ => None,
            },
        }
    }

    /// The attribute's value; `None` when it does not resolve.
    pub fn resolve(&self, id: &str, col: &str) -> Option<&'r Value> {
        let (t, row) = self.side(id)?;
        t.schema().index_of(col).map(|i| &row[i])
    }
}

/// Arithmetic on values. Integers stay integral unless they overflow or
/// are divided; division by zero, non-finite results and mixed types give
/// `Null`, except that `+` concatenates two texts.
pub fn arith(op: ArithOp, a: &Value, b: &Value) -> Value {
    use Value::*;
    match (a, b) {
        (Integer(x), Integer(y)) => {
            let exact = match op {
                ArithOp::Add => x.checked_add(*y),
                ArithOp::Sub => x.checked_sub(*y),
                ArithOp::Mul => x.checked_mul(*y),
                ArithOp::Div => None,
            };
            match exact {
                Some(v) => Integer(v),
                None => float_arith(op, *x as f64, *y as f64),
            }
        }
        (Text(x), Text(y)) if op == ArithOp::Add => Text(format!("{x}{y}")),
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => float_arith(op, x, y),
            _ => Null,
        },
    }
}

fn float_arith(op: ArithOp, x: f64, y: f64) -> Value {
    let r = match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div if y == 0.0 => return Value::Null,
        ArithOp::Div => x / y,
    };
    Value::float(r)
}

pub fn compare(op: CmpOp, a: &Value, b: &Value) -> bool {
    let Some(ord) = a.compare(b) else {
        return false;
    };
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

/// An unresolvable attribute evaluates to `Null`.
pub fn eval_expr(e: &Expr, b: &RowBinding<'_>) -> Value {
    match e {
        Expr::Lit(v) => v.clone(),
        Expr::Attr(id, col) => b.resolve(id, col).cloned().unwrap_or(Value::Null),
        Expr::BinOp(l, op, r) => arith(*op, &eval_expr(l, b), &eval_expr(r, b)),
    }
}

pub fn eval_rowpred(p: &RowPred, b: &RowBinding<'_>) -> bool {
    match p {
        RowPred::Cmp(l, op, r) => compare(*op, &eval_expr(l, b), &eval_expr(r, b)),
        RowPred::Not(inner) => !eval_rowpred(inner, b),
        RowPred::And(l, r) => eval_rowpred(l, b) && eval_rowpred(r, b),
        RowPred::Or(l, r) => eval_rowpred(l, b) || eval_rowpred(r, b),
    }
}

fn has_columns(t: &Table, cols: &[&str]) -> bool {
    cols.iter().all(|c| t.schema().index_of(c).is_some())
}

/// Whether evaluating `expr` can bind identifiers.
pub fn contains_assign(expr: &CollectionExpr) -> bool {
    match expr {
        CollectionExpr::Ident(_) => false,
        CollectionExpr::Assign(..) => true,
        CollectionExpr::Restrict(c, _) => contains_assign(c),
        CollectionExpr::And(l, r) | CollectionExpr::Or(l, r) | CollectionExpr::Nand(l, r) => {
            contains_assign(l) || contains_assign(r)
        }
        CollectionExpr::Func(f) => match f.as_ref() {
            FuncExpr::Select(_, c) | FuncExpr::Filter(_, c) => contains_assign(c),
            FuncExpr::Union(a, b) | FuncExpr::Diff(a, b) | FuncExpr::Prod(a, b) | FuncExpr::Join(_, a, b) => {
                contains_assign(a) || contains_assign(b)
            }
        },
    }
}

/// Identifiers used by `SIML` and `PFKEY` in a signature, in source order.
pub fn signature_references(sig: &Signature) -> Vec<&str> {
    fn walk<'s>(s: &'s Signature, out: &mut Vec<&'s str>) {
        match s {
            Signature::Prop(PropExpr::Siml(id)) | Signature::Prop(PropExpr::PfKey(id)) => {
                if !out.contains(&id.as_str()) {
                    out.push(id);
                }
            }
            Signature::Prop(_) => {}
            Signature::Not(inner) => walk(inner, out),
            Signature::And(l, r) | Signature::Or(l, r) => {
                walk(l, out);
                walk(r, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(sig, &mut out);
    out
}

pub struct Evaluator<'a> {
    catalog: &'a Catalog,
    config: &'a EngineConfig,
    annotations: &'a AnnotatedAst<'a>,
    counters: Mutex<Vec<NodeCounters>>,
    warnings: Mutex<BTreeSet<String>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(catalog: &'a Catalog, config: &'a EngineConfig, annotations: &'a AnnotatedAst<'a>) -> Self {
        let counters = annotations
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| NodeCounters { node: i, label: node_label(n.expr), ..Default::default() })
            .collect();
        Evaluator {
            catalog,
            config,
            annotations,
            counters: Mutex::new(counters),
            warnings: Mutex::new(BTreeSet::new()),
        }
    }

    pub fn catalog(&self) -> &'a Catalog {
        self.catalog
    }

    pub fn config(&self) -> &'a EngineConfig {
        self.config
    }

    pub fn annotations(&self) -> &'a AnnotatedAst<'a> {
        self.annotations
    }

    /// Counters in node order and the distinct warnings, sorted.
    pub fn finish(self) -> (Vec<NodeCounters>, Vec<String>) {
        let counters = self.counters.into_inner().unwrap_or_else(|e| e.into_inner());
        let warnings = self.warnings.into_inner().unwrap_or_else(|e| e.into_inner());
        (counters, warnings.into_iter().collect())
    }

    pub fn warn(&self, message: String) {
        self.warnings.lock().unwrap_or_else(|e| e.into_inner()).insert(message);
    }

    /// Constraints to enforce at `expr`, or `None` when pruning is off.
    pub fn constraints(&self, expr: &CollectionExpr) -> Option<&'a ConstraintSet> {
        if self.config.prune {
            self.annotations.constraints(expr)
        } else {
            None
        }
    }

    pub fn count(&self, expr: &CollectionExpr, update: impl FnOnce(&mut NodeCounters)) {
        if let Some(i) = self.annotations.index_of(expr) {
            let mut counters = self.counters.lock().unwrap_or_else(|e| e.into_inner());
            update(&mut counters[i]);
        }
    }

    /// Evaluates the statements in order; the last one is the result.
    pub fn eval_query(&self, q: &QueryAst, scope: &mut dyn Scope) -> Result<Collection, EngineError> {
        let mut last = Collection::new();
        for st in &q.statements {
            last = self.eval_collection(st, scope)?;
        }
        Ok(last)
    }

    pub fn eval_collection(&self, expr: &CollectionExpr, scope: &mut dyn Scope) -> Result<Collection, EngineError> {
        if let Some(cs) = self.constraints(expr) {
            if cs.provably_empty && !contains_assign(expr) {
                self.count(expr, |c| c.evaluations += 1);
                return Ok(Collection::new());
            }
        }
        let value = match expr {
            CollectionExpr::Ident(id) => {
                let v = scope.lookup(id, self)?;
                self.count(expr, |c| c.tables_in += v.len() as u64);
                v
            }
            CollectionExpr::Assign(id, inner) => {
                let v = self.eval_collection(inner, scope)?;
                self.count(expr, |c| c.tables_in += v.len() as u64);
                scope.bind(id, v.clone());
                v
            }
            CollectionExpr::Restrict(inner, sig) => {
                let v = self.eval_collection(inner, scope)?;
                let refs = self.resolve_refs(sig, scope)?;
                self.count(expr, |c| c.tables_in += v.len() as u64);
                self.apply_restrict(expr, &v, sig, &refs)
            }
            CollectionExpr::And(l, r) => {
                let (a, b) = (self.eval_collection(l, scope)?, self.eval_collection(r, scope)?);
                self.count(expr, |c| c.tables_in += (a.len() + b.len()) as u64);
                coll_intersect(&a, &b)
            }
            CollectionExpr::Or(l, r) => {
                let (a, b) = (self.eval_collection(l, scope)?, self.eval_collection(r, scope)?);
                self.count(expr, |c| c.tables_in += (a.len() + b.len()) as u64);
                coll_union(&a, &b)
            }
            CollectionExpr::Nand(l, r) => {
                let (a, b) = (self.eval_collection(l, scope)?, self.eval_collection(r, scope)?);
                self.count(expr, |c| c.tables_in += (a.len() + b.len()) as u64);
                coll_diff(&a, &b)
            }
            CollectionExpr::Func(f) => match f.as_ref() {
                FuncExpr::Select(_, c) | FuncExpr::Filter(_, c) => {
                    let v = self.eval_collection(c, scope)?;
                    self.apply_unary(expr, f, &v)
                }
                FuncExpr::Union(a, b) | FuncExpr::Diff(a, b) | FuncExpr::Prod(a, b) | FuncExpr::Join(_, a, b) => {
                    let va = self.eval_collection(a, scope)?;
                    let vb = self.eval_collection(b, scope)?;
                    self.apply_binary(expr, f, &va, &vb)?
                }
            },
        };
        Ok(self.finish_node(expr, value))
    }

    /// Prunes a node's value by its constraints and records the output size.
    pub fn finish_node(&self, expr: &CollectionExpr, value: Collection) -> Collection {
        let (value, pruned) = match self.constraints(expr) {
            Some(cs) if !cs.required_columns.is_empty() || !cs.required_sources.is_empty() || cs.provably_empty => {
                let before = value.len();
                let kept = algebra::restrict(&value, |t| cs.admits(t));
                let pruned = (before - kept.len()) as u64;
                (kept, pruned)
            }
            _ => (value, 0),
        };
        self.count(expr, |c| {
            c.evaluations += 1;
            c.tables_pruned += pruned;
            c.tables_out += value.len() as u64;
        });
        value
    }

    pub fn resolve_refs(&self, sig: &Signature, scope: &mut dyn Scope) -> Result<Refs, EngineError> {
        let mut refs = Refs::new();
        for id in signature_references(sig) {
            let c = scope.lookup(id, self)?;
            let tables = c.iter().map(|t| (t.clone(), self.catalog.meta(t))).collect();
            refs.insert(id.to_owned(), tables);
        }
        Ok(refs)
    }

    pub fn apply_restrict(
        &self,
        expr: &CollectionExpr,
        value: &Collection,
        sig: &Signature,
        refs: &Refs,
    ) -> Collection {
        // tables failing the pushed-down constraints need no signature check
        match self.constraints(expr) {
            Some(cs) => algebra::restrict(value, |t| cs.admits(t) && self.eval_signature(sig, t, refs)),
            None => algebra::restrict(value, |t| self.eval_signature(sig, t, refs)),
        }
    }

    pub fn eval_signature(&self, sig: &Signature, t: &Table, refs: &Refs) -> bool {
        match sig {
            Signature::Prop(p) => self.eval_prop(p, t, refs),
            Signature::Not(s) => !self.eval_signature(s, t, refs),
            Signature::And(l, r) => self.eval_signature(l, t, refs) && self.eval_signature(r, t, refs),
            Signature::Or(l, r) => self.eval_signature(l, t, refs) || self.eval_signature(r, t, refs),
        }
    }

    pub fn eval_prop(&self, p: &PropExpr, t: &Table, refs: &Refs) -> bool {
        match p {
            PropExpr::Src(s) => t.provenance().contains(s),
            PropExpr::Col(s) => t.schema().index_of(s).is_some(),
            PropExpr::ColStar(s) => {
                let needle = s.to_lowercase();
                t.schema().names().any(|n| n.to_lowercase().contains(&needle))
            }
            PropExpr::Forall(pd) => {
                self.check_row_attributes(pd, t);
                t.rows().iter().all(|r| eval_rowpred(pd, &RowBinding::single(t, r)))
            }
            PropExpr::Exists(pd) => {
                self.check_row_attributes(pd, t);
                t.rows().iter().any(|r| eval_rowpred(pd, &RowBinding::single(t, r)))
            }
            PropExpr::Siml(id) => {
                let Some(others) = refs.get(id) else { return false };
                let mt = self.catalog.meta(t);
                others.iter().any(|(_, mu)| meta_similarity(&mt, mu) >= self.config.siml_threshold)
            }
            PropExpr::PfKey(id) => {
                let Some(others) = refs.get(id) else { return false };
                let mt = self.catalog.meta(t);
                others.iter().any(|(u, mu)| meta_pf_key(t, &mt, u, mu).is_some())
            }
        }
    }

    fn check_row_attributes(&self, pd: &RowPred, t: &Table) {
        for (id, col) in pd.attributes() {
            if t.schema().index_of(col).is_none() {
                self.warn(format!(
                    "attribute {id}[{}] is missing from some tables and reads as NULL there",
                    crate::ast::quote(col)
                ));
            }
        }
    }

    pub fn apply_unary(&self, expr: &CollectionExpr, f: &FuncExpr, value: &Collection) -> Collection {
        self.count(expr, |c| c.tables_in += value.len() as u64);
        match f {
            FuncExpr::Select(cols, _) => lift_unary(|t| algebra::project(t, cols), value),
            FuncExpr::Filter(pd, _) => {
                let cols: Vec<&str> = pd.attributes().into_iter().map(|(_, c)| c).collect();
                lift_unary(
                    |t| {
                        has_columns(t, &cols)
                            .then(|| algebra::row_filter(t, |r| eval_rowpred(pd, &RowBinding::single(t, r))))
                    },
                    value,
                )
            }
            _ => unreachable!("binary function passed to apply_unary"),
        }
    }

    pub fn apply_binary(
        &self,
        expr: &CollectionExpr,
        f: &FuncExpr,
        a: &Collection,
        b: &Collection,
    ) -> Result<Collection, EngineError> {
        let max_rows = self.config.max_rows_per_table;
        let cs = self.constraints(expr).filter(|cs| !cs.pair_constraints.is_empty() || cs.provably_empty);
        let node = self.annotations.index_of(expr).map_or(String::new(), |i| format!(" (node #{i})"));
        let pruned = AtomicU64::new(0);
        let admissible = |t0: &Table, t1: &Table| match cs {
            Some(cs) if !pair_admissible(f, t0, t1, cs) => {
                pruned.fetch_add(1, AtomicOrdering::Relaxed);
                false
            }
            _ => true,
        };

        let result = match f {
            FuncExpr::Union(..) => lift_binary(
                |t0, t1| Ok(if admissible(t0, t1) { algebra::t_union(t0, t1) } else { None }),
                a,
                b,
                self.config.pair_budget,
                &format!("UNION{node}"),
            ),
            FuncExpr::Diff(..) => lift_binary(
                |t0, t1| Ok(if admissible(t0, t1) { algebra::t_diff(t0, t1) } else { None }),
                a,
                b,
                self.config.pair_budget,
                &format!("DIFF{node}"),
            ),
            FuncExpr::Prod(..) => lift_binary(
                |t0, t1| if admissible(t0, t1) { algebra::t_product(t0, t1, max_rows).map(Some) } else { Ok(None) },
                a,
                b,
                self.config.pair_budget,
                &format!("PROD{node}"),
            ),
            FuncExpr::Join(None, ..) => lift_binary(
                |t0, t1| if admissible(t0, t1) { algebra::t_natural_join(t0, t1, max_rows) } else { Ok(None) },
                a,
                b,
                self.config.pair_budget,
                &format!("JOIN{node}"),
            ),
            FuncExpr::Join(Some(pd), l, r) => {
                let names = (l.root_identifier(), r.root_identifier());
                let (mut left_cols, mut right_cols) = (Vec::new(), Vec::new());
                for (id, col) in pd.attributes() {
                    match (names.0 == Some(id), names.1 == Some(id)) {
                        (true, false) => left_cols.push(col),
                        (false, true) => right_cols.push(col),
                        _ => self.warn(format!(
                            "attribute {id}[{}] names neither JOIN operand and reads as NULL",
                            crate::ast::quote(col)
                        )),
                    }
                }
                lift_binary(
                    |t0, t1| {
                        if !admissible(t0, t1) || !has_columns(t0, &left_cols) || !has_columns(t1, &right_cols) {
                            return Ok(None);
                        }
                        let pred =
                            |x: &[Value], y: &[Value]| eval_rowpred(pd, &RowBinding::pair((t0, x), (t1, y), names));
                        algebra::t_theta_join(t0, t1, pred, max_rows).map(Some)
                    },
                    a,
                    b,
                    self.config.pair_budget,
                    &format!("JOIN{node}"),
                )
            }
            FuncExpr::Select(..) | FuncExpr::Filter(..) => unreachable!("unary function passed to apply_binary"),
        }?;
        let pairs = a.len() as u64 * b.len() as u64;
        let pruned = pruned.into_inner();
        self.count(expr, |c| {
            c.tables_in += (a.len() + b.len()) as u64;
            c.pairs_enumerated += pairs;
            c.pairs_pruned += pruned;
        });
        Ok(result)
    }
}
