//! Table-level relational operators.
//!
//! Each operator is a partial function: `None` means the operator is not
//! defined for the given inputs (for instance projecting onto a missing
//! column). Outputs are derived tables with no name; their provenance is
//! inherited from the inputs.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::catalog::{Column, Row, Schema, Table, Value};
use crate::error::EngineError;

fn derived(provenance: BTreeSet<String>, columns: Vec<Column>, rows: Vec<Row>) -> Table {
    let schema = Schema::new(columns).expect("operator output has unique column names");
    Table::new(None, provenance, schema, rows).expect("operator output is well formed")
}

fn merged_provenance(t0: &Table, t1: &Table) -> BTreeSet<String> {
    t0.provenance().union(t1.provenance()).cloned().collect()
}

fn check_rows(operation: &str, requested: usize, max_rows: usize) -> Result<(), EngineError> {
    if requested > max_rows {
        return Err(EngineError::ResourceLimit {
            operation: operation.to_owned(),
            unit: "rows",
            requested: requested as u128,
            limit: max_rows as u128,
        });
    }
    Ok(())
}

/// Projection onto `cols`, in the listed order. Undefined if a column is
/// missing or listed twice.
pub fn project(t: &Table, cols: &[String]) -> Option<Table> {
    let mut seen = HashSet::new();
    let mut idx = Vec::with_capacity(cols.len());
    for c in cols {
        if !seen.insert(c.as_str()) {
            return None;
        }
        idx.push(t.schema().index_of(c)?);
    }
    let columns = idx.iter().map(|&i| t.schema().columns()[i].clone()).collect();
    let rows = t.rows().iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect();
    Some(derived(t.provenance().clone(), columns, rows))
}

/// Selection. Always defined.
pub fn row_filter(t: &Table, pred: impl Fn(&[Value]) -> bool) -> Table {
    let rows = t.rows().iter().filter(|r| pred(r)).cloned().collect();
    derived(t.provenance().clone(), t.schema().columns().to_vec(), rows)
}

/// For each column of `t0`, the index of the same-named column of `t1`, if
/// both tables have the same column names and types (in any order).
pub fn union_alignment(t0: &Table, t1: &Table) -> Option<Vec<usize>> {
    let (s0, s1) = (t0.schema(), t1.schema());
    if s0.len() != s1.len() {
        return None;
    }
    s0.columns()
        .iter()
        .map(|c| {
            let j = s1.index_of(&c.name)?;
            (s1.columns()[j].ty == c.ty).then_some(j)
        })
        .collect()
}

fn aligned_rows<'a>(t1: &'a Table, align: &'a [usize]) -> impl Iterator<Item = Row> + 'a {
    t1.rows().iter().map(move |r| align.iter().map(|&j| r[j].clone()).collect())
}

pub fn t_union(t0: &Table, t1: &Table) -> Option<Table> {
    let align = union_alignment(t0, t1)?;
    let rows = t0.rows().iter().cloned().chain(aligned_rows(t1, &align)).collect();
    Some(derived(merged_provenance(t0, t1), t0.schema().columns().to_vec(), rows))
}

/// Rows of `t0` not in `t1`. Provenance is that of `t0`.
pub fn t_diff(t0: &Table, t1: &Table) -> Option<Table> {
    let align = union_alignment(t0, t1)?;
    let remove: HashSet<Row> = aligned_rows(t1, &align).collect();
    let rows = t0.rows().iter().filter(|r| !remove.contains(*r)).cloned().collect();
    Some(derived(t0.provenance().clone(), t0.schema().columns().to_vec(), rows))
}

/// The prefix used when a column name collides in a product.
pub fn qualifier(t: &Table) -> String {
    t.display_name()
}

/// Output column names of `t0 × t1`. Names present on both sides become
/// `<qualifier>.<name>` on both sides; anything still clashing afterwards
/// (a self-product, say) gets a numeric suffix.
pub fn product_column_names(t0: &Table, t1: &Table) -> Vec<String> {
    let n0: HashSet<&str> = t0.schema().names().collect();
    let n1: HashSet<&str> = t1.schema().names().collect();
    let (q0, q1) = (qualifier(t0), qualifier(t1));
    let proposed: Vec<String> = t0
        .schema()
        .names()
        .map(|n| if n1.contains(n) { format!("{q0}.{n}") } else { n.to_owned() })
        .chain(t1.schema().names().map(|n| if n0.contains(n) { format!("{q1}.{n}") } else { n.to_owned() }))
        .collect();
    uniquify(proposed)
}

fn uniquify(names: Vec<String>) -> Vec<String> {
    let originals: HashSet<String> = names.iter().cloned().collect();
    let mut taken: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(names.len());
    for name in &names {
        let mut candidate = name.clone();
        let mut k = 2;
        // later duplicates are renamed; a suffix never steals an original name
        while taken.contains(&candidate) || (candidate != *name && originals.contains(&candidate)) {
            candidate = format!("{name}_{k}");
            k += 1;
        }
        taken.insert(candidate.clone());
        out.push(candidate);
    }
    out
}

fn product_columns(t0: &Table, t1: &Table) -> Vec<Column> {
    let types = t0.schema().columns().iter().chain(t1.schema().columns()).map(|c| c.ty);
    product_column_names(t0, t1).into_iter().zip(types).map(|(n, ty)| Column::new(n, ty)).collect()
}

fn concat(a: &[Value], b: &[Value]) -> Row {
    let mut r = Vec::with_capacity(a.len() + b.len());
    r.extend_from_slice(a);
    r.extend_from_slice(b);
    r
}

/// Cartesian product. Always defined; fails only when the output would
/// exceed `max_rows`.
pub fn t_product(t0: &Table, t1: &Table, max_rows: usize) -> Result<Table, EngineError> {
    check_rows("PROD", t0.row_count().saturating_mul(t1.row_count()), max_rows)?;
    let rows = t0.rows().iter().flat_map(|a| t1.rows().iter().map(move |b| concat(a, b))).collect();
    Ok(derived(merged_provenance(t0, t1), product_columns(t0, t1), rows))
}

/// Theta join: the product restricted to row pairs satisfying `pred`.
pub fn t_theta_join(
    t0: &Table,
    t1: &Table,
    pred: impl Fn(&[Value], &[Value]) -> bool,
    max_rows: usize,
) -> Result<Table, EngineError> {
    let mut rows = Vec::new();
    for a in t0.rows() {
        for b in t1.rows() {
            if pred(a, b) {
                rows.push(concat(a, b));
            }
        }
        check_rows("JOIN", rows.len(), max_rows)?;
    }
    Ok(derived(merged_provenance(t0, t1), product_columns(t0, t1), rows))
}

/// Column names shared by both tables, in `t0` order.
pub fn shared_columns(t0: &Table, t1: &Table) -> Vec<String> {
    t0.schema().names().filter(|n| t1.schema().index_of(n).is_some()).map(str::to_owned).collect()
}

/// Output column names of the natural join, or `None` when the tables share
/// no column.
pub fn natural_join_column_names(t0: &Table, t1: &Table) -> Option<Vec<String>> {
    let shared = shared_columns(t0, t1);
    if shared.is_empty() {
        return None;
    }
    Some(
        t0.schema()
            .names()
            .chain(t1.schema().names().filter(|n| !shared.iter().any(|s| s == n)))
            .map(str::to_owned)
            .collect(),
    )
}

/// Natural join on every shared column name; the join columns appear once,
/// unqualified. Undefined when nothing is shared. `Null` never joins.
pub fn t_natural_join(t0: &Table, t1: &Table, max_rows: usize) -> Result<Option<Table>, EngineError> {
    let shared = shared_columns(t0, t1);
    if shared.is_empty() {
        return Ok(None);
    }
    let (s0, s1) = (t0.schema(), t1.schema());
    let k0: Vec<usize> = shared.iter().map(|n| s0.index_of(n).unwrap()).collect();
    let k1: Vec<usize> = shared.iter().map(|n| s1.index_of(n).unwrap()).collect();
    let rest1: Vec<usize> = (0..s1.len()).filter(|j| !k1.contains(j)).collect();

    let mut index: HashMap<Vec<&Value>, Vec<&Row>> = HashMap::new();
    for r in t1.rows() {
        let key: Vec<&Value> = k1.iter().map(|&j| &r[j]).collect();
        if key.iter().any(|v| v.is_null()) {
            continue;
        }
        index.entry(key).or_default().push(r);
    }

    let mut rows = Vec::new();
    for a in t0.rows() {
        let key: Vec<&Value> = k0.iter().map(|&i| &a[i]).collect();
        if key.iter().any(|v| v.is_null()) {
            continue;
        }
        // identity equality on non-null values coincides with `=` except
        // across numeric/text, which identity already keeps apart
        if let Some(matches) = index.get(&key) {
            for b in matches {
                let mut row = a.clone();
                row.extend(rest1.iter().map(|&j| b[j].clone()));
                rows.push(row);
            }
            check_rows("JOIN", rows.len(), max_rows)?;
        }
    }
    let columns = s0.columns().iter().cloned().chain(rest1.iter().map(|&j| s1.columns()[j].clone())).collect();
    Ok(Some(derived(merged_provenance(t0, t1), columns, rows)))
}

/// A row-pair predicate for theta joins.
pub type PairPredicate<'p> = &'p dyn Fn(&[Value], &[Value]) -> bool;

/// `JOIN[pred]` when a predicate is given, the natural join otherwise.
pub fn t_join(
    t0: &Table,
    t1: &Table,
    pred: Option<PairPredicate<'_>>,
    max_rows: usize,
) -> Result<Option<Table>, EngineError> {
    match pred {
        Some(p) => t_theta_join(t0, t1, p, max_rows).map(Some),
        None => t_natural_join(t0, t1, max_rows),
    }
}
