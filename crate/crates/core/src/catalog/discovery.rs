use std::collections::HashSet;

use super::{Catalog, Table, TableMeta, Value};

/// `|a ∩ b| / |a ∪ b|`; two empty sets score 0.
pub fn column_jaccard(a: &HashSet<Value>, b: &HashSet<Value>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|v| large.contains(*v)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Symmetric content similarity in `[0, 1]`.
///
/// For each direction, every column of one table with at least one non-null
/// value is matched to its best-Jaccard column of the other; the direction
/// score is the mean of those best scores. The result is the mean of the two
/// directions, or 0 when either table has no non-null column.
pub fn table_similarity(a: &Table, b: &Table, catalog: &Catalog) -> f64 {
    meta_similarity(&catalog.meta(a), &catalog.meta(b))
}

/// [`table_similarity`] on precomputed metadata.
pub fn meta_similarity(ma: &TableMeta, mb: &TableMeta) -> f64 {
    let sets_a: Vec<_> = ma.columns.iter().map(|c| &c.distinct).filter(|s| !s.is_empty()).collect();
    let sets_b: Vec<_> = mb.columns.iter().map(|c| &c.distinct).filter(|s| !s.is_empty()).collect();
    if sets_a.is_empty() || sets_b.is_empty() {
        return 0.0;
    }
    let direction = |from: &[&HashSet<Value>], to: &[&HashSet<Value>]| {
        let total: f64 = from.iter().map(|x| to.iter().map(|y| column_jaccard(x, y)).fold(0.0, f64::max)).sum();
        total / from.len() as f64
    };
    (direction(&sets_a, &sets_b) + direction(&sets_b, &sets_a)) / 2.0
}

/// Finds a (foreign column of `t`, key column of `candidate`) pair where the
/// key column is a key candidate and the foreign column's non-null values
/// are a nonempty subset of the key's values. Candidate columns are scanned
/// first, in schema order.
pub fn find_pf_key(t: &Table, candidate: &Table, catalog: &Catalog) -> Option<(String, String)> {
    meta_pf_key(t, &catalog.meta(t), candidate, &catalog.meta(candidate))
}

/// [`find_pf_key`] on precomputed metadata.
pub fn meta_pf_key(t: &Table, mt: &TableMeta, candidate: &Table, mc: &TableMeta) -> Option<(String, String)> {
    for (ki, key) in mc.columns.iter().enumerate() {
        if !key.is_key {
            continue;
        }
        for (fi, fk) in mt.columns.iter().enumerate() {
            if !fk.distinct.is_empty()
                && fk.distinct.len() <= key.distinct.len()
                && fk.distinct.iter().all(|v| key.distinct.contains(v))
            {
                return Some((t.schema().columns()[fi].name.clone(), candidate.schema().columns()[ki].name.clone()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Column, ColumnType, Schema};

    fn one_col(name: &str, col: &str, vals: &[Value]) -> Table {
        let ty =
            if vals.iter().all(|v| v.is_numeric() || v.is_null()) { ColumnType::Numeric } else { ColumnType::Text };
        Table::base(
            name,
            Schema::new(vec![Column::new(col, ty)]).unwrap(),
            vals.iter().map(|v| vec![v.clone()]).collect(),
        )
        .unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::Integer(x)).collect()
    }

    #[test]
    fn overlap_of_two_sets() {
        let a = one_col("a", "x", &ints(&[1, 2, 3]));
        let b = one_col("b", "y", &ints(&[2, 3, 4]));
        let cat = Catalog::from_tables([a.clone(), b.clone()]);
        // {2,3} / {1,2,3,4}
        assert_eq!(table_similarity(&a, &b, &cat), 0.5);
    }

    #[test]
    fn identity_and_disjoint() {
        let a = one_col("a", "x", &ints(&[1, 2, 3]));
        let b = one_col("b", "x", &ints(&[7, 8]));
        let cat = Catalog::from_tables([]);
        assert_eq!(table_similarity(&a, &a, &cat), 1.0);
        assert_eq!(table_similarity(&a, &b, &cat), 0.0);
    }

    #[test]
    fn all_null_column_is_ignored() {
        let t = Table::base(
            "t",
            Schema::new(vec![Column::new("x", ColumnType::Numeric), Column::new("y", ColumnType::Numeric)]).unwrap(),
            vec![vec![1.into(), Value::Null], vec![2.into(), Value::Null]],
        )
        .unwrap();
        let cat = Catalog::default();
        assert_eq!(table_similarity(&t, &t, &cat), 1.0);
        let empty = one_col("e", "z", &[Value::Null]);
        assert_eq!(table_similarity(&t, &empty, &cat), 0.0);
    }

    #[test]
    fn pf_key_found() {
        let t = one_col("orders", "fk", &ints(&[1, 2]));
        let c = one_col("customers", "id", &ints(&[1, 2, 3]));
        let cat = Catalog::default();
        assert_eq!(find_pf_key(&t, &c, &cat), Some(("fk".into(), "id".into())));
        assert_eq!(find_pf_key(&c, &t, &cat), None);
    }

    #[test]
    fn no_key_candidate() {
        let t = one_col("t", "fk", &ints(&[1]));
        let c = Table::base(
            "c",
            Schema::new(vec![Column::new("a", ColumnType::Numeric), Column::new("b", ColumnType::Numeric)]).unwrap(),
            vec![vec![1.into(), 5.into()], vec![1.into(), 6.into()], vec![2.into(), 6.into()]],
        )
        .unwrap();
        assert_eq!(find_pf_key(&t, &c, &Catalog::default()), None);
    }

    #[test]
    fn all_null_foreign_column_never_matches() {
        let t = one_col("t", "fk", &[Value::Null]);
        let c = one_col("c", "id", &ints(&[1, 2]));
        assert_eq!(find_pf_key(&t, &c, &Catalog::default()), None);
    }
}
