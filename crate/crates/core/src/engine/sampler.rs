//! Budgeted sampling.
//!
//! Each attempt evaluates the last statement with every fresh identifier
//! occurrence replaced by one table drawn from its (pruned) pool. An
//! identifier assigned earlier is re-sampled by evaluating its definition
//! the same way. Operands whose full value matters for correctness, namely
//! the right side of `NAND` and the references of `SIML` and `PFKEY`, are
//! evaluated completely. Every construct is then monotone in the drawn
//! tables, so anything an attempt produces is also in the naive result.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EngineConfig, QueryReport, Strategy};
use crate::algebra::{coll_diff, coll_intersect, coll_union, Collection};
use crate::ast::{CollectionExpr, FuncExpr, QueryAst};
use crate::catalog::{Catalog, Table, TableId};
use crate::error::EngineError;
use crate::eval::{contains_assign, signature_references, Env, Evaluator, Refs, Scope};
use crate::infer::{derive_constraints, pair_admissible, ConstraintSet};

type Pool = Rc<Vec<Arc<Table>>>;

/// An assignment: the defining expression and the definitions visible to it.
struct Def<'q> {
    expr: &'q CollectionExpr,
    snapshot: Defs<'q>,
}

type Defs<'q> = Rc<HashMap<&'q str, Rc<Def<'q>>>>;

fn define<'q>(defs: &mut Defs<'q>, id: &'q str, expr: &'q CollectionExpr, snapshot: Defs<'q>) {
    Rc::make_mut(defs).insert(id, Rc::new(Def { expr, snapshot }));
}

/// Records the assignments `expr` performs, in evaluation order.
fn register_assigns<'q>(expr: &'q CollectionExpr, defs: &mut Defs<'q>) {
    match expr {
        CollectionExpr::Ident(_) => {}
        CollectionExpr::Assign(id, inner) => {
            let snapshot = defs.clone();
            register_assigns(inner, defs);
            define(defs, id, inner, snapshot);
        }
        CollectionExpr::Restrict(inner, _) => register_assigns(inner, defs),
        CollectionExpr::And(l, r) | CollectionExpr::Or(l, r) | CollectionExpr::Nand(l, r) => {
            register_assigns(l, defs);
            register_assigns(r, defs);
        }
        CollectionExpr::Func(f) => match f.as_ref() {
            FuncExpr::Select(_, c) | FuncExpr::Filter(_, c) => register_assigns(c, defs),
            FuncExpr::Union(a, b) | FuncExpr::Diff(a, b) | FuncExpr::Prod(a, b) | FuncExpr::Join(_, a, b) => {
                register_assigns(a, defs);
                register_assigns(b, defs);
            }
        },
    }
}

fn key(expr: &CollectionExpr) -> usize {
    expr as *const CollectionExpr as usize
}

/// Complete values, memoized per expression node. A node is always reached
/// with the same definitions, so its value never changes within a run.
struct FullValues<'s> {
    session: &'s Env,
    memo: RefCell<HashMap<usize, Collection>>,
}

impl FullValues<'_> {
    fn value<'q>(
        &self,
        ev: &Evaluator<'_>,
        expr: &'q CollectionExpr,
        defs: Defs<'q>,
    ) -> Result<Collection, EngineError> {
        if let Some(v) = self.memo.borrow().get(&key(expr)) {
            return Ok(v.clone());
        }
        let mut scope = FullScope { defs, local: HashMap::new(), values: self };
        let v = ev.eval_collection(expr, &mut scope)?;
        self.memo.borrow_mut().insert(key(expr), v.clone());
        Ok(v)
    }
}

struct FullScope<'s, 'q> {
    defs: Defs<'q>,
    local: HashMap<String, Collection>,
    values: &'s FullValues<'s>,
}

impl Scope for FullScope<'_, '_> {
    fn lookup(&mut self, id: &str, ev: &Evaluator<'_>) -> Result<Collection, EngineError> {
        if let Some(v) = self.local.get(id) {
            return Ok(v.clone());
        }
        let v = match self.defs.get(id) {
            Some(def) => self.values.value(ev, def.expr, def.snapshot.clone())?,
            None => match self.values.session.get(id) {
                Some(c) => c.clone(),
                None => ev.catalog().universe().clone(),
            },
        };
        self.local.insert(id.to_owned(), v.clone());
        Ok(v)
    }

    fn bind(&mut self, id: &str, value: Collection) {
        self.local.insert(id.to_owned(), value);
    }
}

struct Sampler<'e, 'q> {
    ev: &'e Evaluator<'q>,
    full: FullValues<'e>,
    rng: ChaCha8Rng,
    pools: HashMap<usize, Option<Pool>>,
    pair_pools: HashMap<usize, Option<(Pool, Pool)>>,
    refs: HashMap<usize, Rc<Refs>>,
    /// Results of operators on drawn singletons, keyed by node and operand ids.
    applied: HashMap<(usize, Option<TableId>, Option<TableId>), Collection>,
}

impl<'e, 'q> Sampler<'e, 'q> {
    fn draw(&mut self, pool: &[Arc<Table>]) -> Collection {
        if pool.is_empty() {
            return Collection::new();
        }
        Collection::singleton(pool[self.rng.random_range(0..pool.len())].clone())
    }

    fn sample(&mut self, expr: &'q CollectionExpr, defs: &mut Defs<'q>) -> Result<Collection, EngineError> {
        let ev = self.ev;
        if let Some(cs) = ev.constraints(expr) {
            if cs.provably_empty && !contains_assign(expr) {
                return Ok(Collection::new());
            }
        }
        let value = match expr {
            CollectionExpr::Ident(id) => match defs.get(id.as_str()).cloned() {
                Some(def) => {
                    let mut inner = def.snapshot.clone();
                    self.sample(def.expr, &mut inner)?
                }
                None => {
                    let pool = self.pool(expr, defs).expect("a fresh identifier always has a pool");
                    self.draw(&pool)
                }
            },
            CollectionExpr::Assign(id, inner) => {
                let snapshot = defs.clone();
                let v = self.sample(inner, defs)?;
                define(defs, id, inner, snapshot);
                v
            }
            CollectionExpr::Restrict(inner, sig) => {
                let v = self.sample(inner, defs)?;
                let refs = self.refs(expr, defs)?;
                self.memoized(expr, &v, None, |ev, v, _| Ok(ev.apply_restrict(expr, v, sig, &refs)))?
            }
            CollectionExpr::And(l, r) => {
                let a = self.sample(l, defs)?;
                coll_intersect(&a, &self.sample(r, defs)?)
            }
            CollectionExpr::Or(l, r) => {
                let a = self.sample(l, defs)?;
                coll_union(&a, &self.sample(r, defs)?)
            }
            CollectionExpr::Nand(l, r) => {
                let a = self.sample(l, defs)?;
                let b = self.full.value(ev, r, defs.clone())?;
                register_assigns(r, defs);
                coll_diff(&a, &b)
            }
            CollectionExpr::Func(f) => match f.as_ref() {
                FuncExpr::Select(_, c) | FuncExpr::Filter(_, c) => {
                    let v = self.sample(c, defs)?;
                    self.memoized(expr, &v, None, |ev, v, _| Ok(ev.apply_unary(expr, f, v)))?
                }
                FuncExpr::Union(a, b) | FuncExpr::Diff(a, b) | FuncExpr::Prod(a, b) | FuncExpr::Join(_, a, b) => {
                    let (va, vb) = match self.pair_pools(expr, f, a, b, defs) {
                        Some((p0, p1)) => (self.draw(&p0), self.draw(&p1)),
                        None => {
                            let va = self.sample(a, defs)?;
                            (va, self.sample(b, defs)?)
                        }
                    };
                    self.memoized(expr, &va, Some(&vb), |ev, va, vb| ev.apply_binary(expr, f, va, vb.unwrap()))?
                }
            },
        };
        Ok(ev.finish_node(expr, value))
    }

    /// Applies `op` at `expr`, reusing earlier results on the same drawn tables.
    fn memoized(
        &mut self,
        expr: &'q CollectionExpr,
        va: &Collection,
        vb: Option<&Collection>,
        op: impl FnOnce(&Evaluator<'_>, &Collection, Option<&Collection>) -> Result<Collection, EngineError>,
    ) -> Result<Collection, EngineError> {
        if va.len() > 1 || vb.is_some_and(|v| v.len() > 1) {
            return op(self.ev, va, vb);
        }
        let k = (key(expr), va.ids().next().copied(), vb.and_then(|v| v.ids().next().copied()));
        if let Some(v) = self.applied.get(&k) {
            return Ok(v.clone());
        }
        let v = op(self.ev, va, vb)?;
        self.applied.insert(k, v.clone());
        Ok(v)
    }

    fn refs(&mut self, expr: &'q CollectionExpr, defs: &Defs<'q>) -> Result<Rc<Refs>, EngineError> {
        if let Some(r) = self.refs.get(&key(expr)) {
            return Ok(r.clone());
        }
        let CollectionExpr::Restrict(_, sig) = expr else { unreachable!("refs of a non-restriction") };
        let mut scope = FullScope { defs: defs.clone(), local: HashMap::new(), values: &self.full };
        let refs = Rc::new(self.ev.resolve_refs(sig, &mut scope)?);
        self.refs.insert(key(expr), refs.clone());
        Ok(refs)
    }

    /// The tables one draw at `expr` can yield, when `expr` is a fresh
    /// identifier or a restriction of one without relationship constraints.
    fn pool(&mut self, expr: &'q CollectionExpr, defs: &Defs<'q>) -> Option<Pool> {
        if let Some(p) = self.pools.get(&key(expr)) {
            return p.clone();
        }
        let ev = self.ev;
        let pool = match expr {
            CollectionExpr::Ident(id) if !defs.contains_key(id.as_str()) => {
                let base = self.full.session.get(id).unwrap_or(ev.catalog().universe());
                let tables: Vec<Arc<Table>> = match ev.constraints(expr) {
                    Some(cs) => base.iter().filter(|t| cs.admits(t)).cloned().collect(),
                    None => base.iter().cloned().collect(),
                };
                let pruned = (base.len() - tables.len()) as u64;
                ev.count(expr, |c| {
                    c.tables_in += base.len() as u64;
                    c.tables_pruned += pruned;
                });
                Some(Rc::new(tables))
            }
            CollectionExpr::Restrict(inner, sig) if signature_references(sig).is_empty() => {
                let inner_pool = self.pool(inner, defs)?;
                let refs = Refs::new();
                let cs = ev.constraints(expr);
                let tables = inner_pool
                    .iter()
                    .filter(|t| cs.is_none_or(|cs| cs.admits(t)) && ev.eval_signature(sig, t, &refs))
                    .cloned()
                    .collect();
                Some(Rc::new(tables))
            }
            _ => None,
        };
        self.pools.insert(key(expr), pool.clone());
        pool
    }

    /// Operand pools of a binary function, each reduced to the tables that
    /// have an admissible partner on the other side. Only with pruning on.
    fn pair_pools(
        &mut self,
        expr: &'q CollectionExpr,
        f: &'q FuncExpr,
        a: &'q CollectionExpr,
        b: &'q CollectionExpr,
        defs: &Defs<'q>,
    ) -> Option<(Pool, Pool)> {
        let ev = self.ev;
        if !ev.config().prune {
            return None;
        }
        if let Some(p) = self.pair_pools.get(&key(expr)) {
            return p.clone();
        }
        let reduced = self.pool(a, defs).zip(self.pool(b, defs)).and_then(|(p0, p1)| {
            if p0.len() as u128 * p1.len() as u128 > ev.config().pair_budget as u128 {
                return None;
            }
            let empty = ConstraintSet::default();
            let cs = ev.constraints(expr).unwrap_or(&empty);
            let attr_cols = join_attribute_columns(f, a, b);
            let ok = |t0: &Table, t1: &Table| {
                pair_admissible(f, t0, t1, cs)
                    && attr_cols.0.iter().all(|c| t0.schema().index_of(c).is_some())
                    && attr_cols.1.iter().all(|c| t1.schema().index_of(c).is_some())
            };
            let mut keep0 = vec![false; p0.len()];
            let mut keep1 = vec![false; p1.len()];
            for (i, t0) in p0.iter().enumerate() {
                for (j, t1) in p1.iter().enumerate() {
                    if ok(t0, t1) {
                        keep0[i] = true;
                        keep1[j] = true;
                    }
                }
            }
            let filter = |p: &Pool, keep: &[bool]| -> Pool {
                Rc::new(p.iter().zip(keep).filter(|(_, k)| **k).map(|(t, _)| t.clone()).collect())
            };
            Some((filter(&p0, &keep0), filter(&p1, &keep1)))
        });
        self.pair_pools.insert(key(expr), reduced.clone());
        reduced
    }
}

/// Columns a `JOIN[pd]` predicate reads from each operand.
fn join_attribute_columns<'q>(f: &'q FuncExpr, a: &CollectionExpr, b: &CollectionExpr) -> (Vec<&'q str>, Vec<&'q str>) {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    if let FuncExpr::Join(Some(pd), ..) = f {
        let names = (a.root_identifier(), b.root_identifier());
        for (id, col) in pd.attributes() {
            match (names.0 == Some(id), names.1 == Some(id)) {
                (true, false) => left.push(col),
                (false, true) => right.push(col),
                _ => {}
            }
        }
    }
    (left, right)
}

pub fn run_sampler(q: &QueryAst, catalog: &Catalog, config: &EngineConfig) -> Result<QueryReport, EngineError> {
    run_sampler_with_env(q, catalog, config, &mut Env::new())
}

/// Samples the last statement of `q`. Existing bindings in `env` act as the
/// pools of their identifiers; if the last statement is an assignment, its
/// identifier is bound to the sampled results.
pub fn run_sampler_with_env(
    q: &QueryAst,
    catalog: &Catalog,
    config: &EngineConfig,
    env: &mut Env,
) -> Result<QueryReport, EngineError> {
    let start = Instant::now();
    let annotations = derive_constraints(q);
    let ev = Evaluator::new(catalog, config, &annotations);
    let mut collection = Collection::new();
    let mut results = Vec::new();
    let mut attempts = 0u64;
    let mut first_hit = None;

    if let Some((last, prefix)) = q.statements.split_last() {
        let mut prefix_defs: Defs<'_> = Rc::default();
        for st in prefix {
            register_assigns(st, &mut prefix_defs);
        }
        let mut sampler = Sampler {
            ev: &ev,
            full: FullValues { session: env, memo: RefCell::new(HashMap::new()) },
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            pools: HashMap::new(),
            pair_pools: HashMap::new(),
            refs: HashMap::new(),
            applied: HashMap::new(),
        };
        while attempts < config.attempt_budget && results.len() < config.result_budget {
            attempts += 1;
            let mut defs = prefix_defs.clone();
            let drawn = sampler.sample(last, &mut defs)?;
            for t in drawn.iter() {
                if results.len() < config.result_budget && collection.insert(t.clone()) {
                    results.push(t.clone());
                    first_hit.get_or_insert(attempts);
                }
            }
        }
        if let CollectionExpr::Assign(id, _) = last {
            crate::eval::Scope::bind(env, id, collection.clone());
        }
    }

    let (counters, warnings) = ev.finish();
    Ok(QueryReport {
        strategy: Strategy::Sampler,
        exhausted: results.len() < config.result_budget,
        results,
        collection,
        counters,
        attempts,
        first_hit,
        warnings,
        elapsed: start.elapsed(),
    })
}
