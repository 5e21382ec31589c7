//! Type-collected relational algebra.
//!
//! Values are [`Collection`]s: finite sets of tables. Table-level operators
//! from [`ops`] are lifted pointwise, and collections are restricted by table
//! predicates.

pub mod ops;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::catalog::{Table, TableId};
use crate::error::EngineError;

pub use ops::{
    natural_join_column_names, product_column_names, project, row_filter, t_diff, t_join, t_natural_join, t_product,
    t_theta_join, t_union,
};

/// A set of tables keyed by [`TableId`] (content hash plus provenance).
/// Iteration order is by id, so it is stable across runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Collection {
    tables: BTreeMap<TableId, Arc<Table>>,
}

impl Collection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(t: impl Into<Arc<Table>>) -> Self {
        let mut c = Self::new();
        c.insert(t);
        c
    }

    /// Inserts a table; an already present table with the same id is kept.
    pub fn insert(&mut self, t: impl Into<Arc<Table>>) -> bool {
        let t = t.into();
        match self.tables.entry(t.id()) {
            std::collections::btree_map::Entry::Occupied(_) => false,
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(t);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn contains(&self, t: &Table) -> bool {
        self.tables.contains_key(&t.id())
    }

    pub fn contains_id(&self, id: &TableId) -> bool {
        self.tables.contains_key(id)
    }

    pub fn get(&self, id: &TableId) -> Option<&Arc<Table>> {
        self.tables.get(id)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Arc<Table>> {
        self.tables.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &TableId> {
        self.tables.keys()
    }

    pub fn is_subset(&self, other: &Collection) -> bool {
        self.tables.keys().all(|k| other.tables.contains_key(k))
    }
}

impl FromIterator<Arc<Table>> for Collection {
    fn from_iter<I: IntoIterator<Item = Arc<Table>>>(iter: I) -> Self {
        let mut c = Collection::new();
        for t in iter {
            c.insert(t);
        }
        c
    }
}

impl FromIterator<Table> for Collection {
    fn from_iter<I: IntoIterator<Item = Table>>(iter: I) -> Self {
        iter.into_iter().map(Arc::new).collect()
    }
}

impl<'a> IntoIterator for &'a Collection {
    type Item = &'a Arc<Table>;
    type IntoIter = std::collections::btree_map::Values<'a, TableId, Arc<Table>>;

    fn into_iter(self) -> Self::IntoIter {
        self.tables.values()
    }
}

/// `{ t ∈ c : p(t) }`
pub fn restrict(c: &Collection, p: impl Fn(&Table) -> bool) -> Collection {
    c.iter().filter(|t| p(t)).cloned().collect()
}

/// `{ f(t) : t ∈ c }`, dropping inputs where `f` is undefined.
pub fn lift_unary(f: impl Fn(&Table) -> Option<Table>, c: &Collection) -> Collection {
    c.iter().filter_map(|t| f(t)).collect()
}

/// `{ g(t0, t1) : t0 ∈ c0, t1 ∈ c1 }`, dropping undefined pairs.
///
/// Refuses to start when `|c0|·|c1|` exceeds `pair_budget`. Pairs are
/// evaluated in parallel; the result does not depend on evaluation order.
pub fn lift_binary<G>(
    g: G,
    c0: &Collection,
    c1: &Collection,
    pair_budget: u64,
    operation: &str,
) -> Result<Collection, EngineError>
where
    G: Fn(&Table, &Table) -> Result<Option<Table>, EngineError> + Sync,
{
    let pairs = (c0.len() as u128) * (c1.len() as u128);
    if pairs > pair_budget as u128 {
        return Err(EngineError::ResourceLimit {
            operation: operation.to_owned(),
            unit: "table pairs",
            requested: pairs,
            limit: pair_budget as u128,
        });
    }
    let left: Vec<&Arc<Table>> = c0.iter().collect();
    let right: Vec<&Arc<Table>> = c1.iter().collect();
    let outputs: Vec<Option<Table>> = left
        .par_iter()
        .flat_map_iter(|a| right.iter().map(move |b| (*a, *b)))
        .map(|(a, b)| g(a, b))
        .collect::<Result<_, _>>()?;
    Ok(outputs.into_iter().flatten().collect())
}

pub fn coll_union(c0: &Collection, c1: &Collection) -> Collection {
    c0.iter().chain(c1.iter()).cloned().collect()
}

pub fn coll_intersect(c0: &Collection, c1: &Collection) -> Collection {
    restrict(c0, |t| c1.contains(t))
}

pub fn coll_diff(c0: &Collection, c1: &Collection) -> Collection {
    restrict(c0, |t| !c1.contains(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Column, ColumnType, Schema, Value};

    fn t(name: &str, col: &str, vals: &[i64]) -> Table {
        Table::base(
            name,
            Schema::new(vec![Column::new(col, ColumnType::Numeric)]).unwrap(),
            vals.iter().map(|&v| vec![Value::Integer(v)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn restrict_basics() {
        let c: Collection = [t("a", "gdp", &[1]), t("b", "pop", &[2])].into_iter().collect();
        assert!(restrict(&Collection::new(), |_| true).is_empty());
        assert_eq!(restrict(&c, |_| true), c);
        let r = restrict(&c, |t| t.schema().index_of("gdp").is_some());
        assert_eq!(r.len(), 1);
        assert_eq!(r.iter().next().unwrap().name(), Some("a"));
    }

    #[test]
    fn set_operations() {
        let (a, b, c) = (t("a", "x", &[1]), t("b", "x", &[2]), t("c", "x", &[3]));
        let ab: Collection = [a.clone(), b.clone()].into_iter().collect();
        let bc: Collection = [b.clone(), c].into_iter().collect();
        assert_eq!(coll_intersect(&ab, &bc), Collection::singleton(b));
        assert!(coll_diff(&ab, &ab).is_empty());
        assert_eq!(coll_union(&ab, &Collection::new()), ab);
        assert_eq!(coll_union(&ab, &bc).len(), 3);
    }

    #[test]
    fn lifted_ops_shapes() {
        let c: Collection = [t("a", "x", &[1, 2]), t("b", "y", &[2])].into_iter().collect();
        let projected = lift_unary(|t| project(t, &["x".to_owned()]), &c);
        assert_eq!(projected.len(), 1);
        assert_eq!(lift_unary(|t| Some(t.clone()), &c), c);
        assert!(lift_unary(|t| Some(t.clone()), &Collection::new()).is_empty());

        let prod = lift_binary(|a, b| t_product(a, b, 100).map(Some), &c, &c, 100, "PROD").unwrap();
        // a×b and b×a hold the same content with the same provenance.
        assert_eq!(prod.len(), 3);
        let empty = lift_binary(|a, b| t_product(a, b, 100).map(Some), &Collection::new(), &c, 100, "PROD");
        assert!(empty.unwrap().is_empty());
    }

    #[test]
    fn pair_budget_is_enforced() {
        let c: Collection = [t("a", "x", &[1]), t("b", "x", &[2])].into_iter().collect();
        let err = lift_binary(|a, b| t_product(a, b, 100).map(Some), &c, &c, 3, "PROD").unwrap_err();
        assert!(matches!(err, EngineError::ResourceLimit { requested: 4, limit: 3, .. }));
    }
}
