//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tql_core::ast::{ArithOp, CmpOp, CollectionExpr, Expr, FuncExpr, PropExpr, QueryAst, RowPred, Signature};
use tql_core::catalog::{Column, ColumnType, Schema, Table, Value};

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/corpus"))
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

const COLUMN_NAMES: &[&str] = &["a", "b", "c", "d", "e"];
const WORDS: &[&str] = &["x", "y", "z", "NYC", ""];

pub fn gen_value(r: &mut Rng8, ty: ColumnType) -> Value {
    if r.random_bool(0.1) {
        return Value::Null;
    }
    match ty {
        ColumnType::Numeric => {
            if r.random_bool(0.7) {
                Value::Integer(r.random_range(-2..4))
            } else {
                Value::Float([0.5, -1.5, 2.0, 3.25][r.random_range(0..4)])
            }
        }
        ColumnType::Text => Value::text(*WORDS.choose(r).unwrap()),
    }
}

/// A table with up to `max_cols` columns drawn from a small name pool and up
/// to `max_rows` rows over small value domains, so joins and unions overlap.
pub fn gen_table(r: &mut Rng8, name: &str, max_cols: usize, max_rows: usize) -> Table {
    let ncols = r.random_range(1..=max_cols);
    let mut names: Vec<&str> = COLUMN_NAMES.to_vec();
    names.sort_by_key(|_| r.random::<u32>());
    let columns: Vec<Column> = names[..ncols]
        .iter()
        .map(|n| {
            // fix the type per name most of the time, so unions line up
            let numeric = if r.random_bool(0.85) { n.as_bytes()[0] % 2 == 1 } else { r.random_bool(0.5) };
            Column::new(*n, if numeric { ColumnType::Numeric } else { ColumnType::Text })
        })
        .collect();
    let nrows = r.random_range(0..=max_rows);
    let rows = (0..nrows).map(|_| columns.iter().map(|c| gen_value(r, c.ty)).collect()).collect();
    Table::base(name, Schema::new(columns).unwrap(), rows).unwrap()
}

/// Two tables; half the time the second reuses the first's schema.
pub fn gen_table_pair(r: &mut Rng8) -> (Table, Table) {
    let t0 = gen_table(r, "t0", 5, 8);
    let t1 = if r.random_bool(0.5) {
        let mut cols = t0.schema().columns().to_vec();
        cols.sort_by_key(|_| r.random::<u32>());
        let nrows = r.random_range(0..=8);
        let rows = (0..nrows).map(|_| cols.iter().map(|c| gen_value(r, c.ty)).collect()).collect();
        Table::base("t1", Schema::new(cols).unwrap(), rows).unwrap()
    } else {
        gen_table(r, "t1", 5, 8)
    };
    (t0, t1)
}

pub fn gen_ident(r: &mut Rng8) -> String {
    ["A", "B", "S", "T", "Q", "cities_gdp", "x1", "_t", "ORx", "Nothing"].choose(r).unwrap().to_string()
}

pub fn gen_string(r: &mut Rng8) -> String {
    ["gdp", "social media", "obesity rate", "a\"b", "back\\slash", "", "ünï", "nm", "x"].choose(r).unwrap().to_string()
}

pub fn gen_literal(r: &mut Rng8) -> Value {
    match r.random_range(0..5) {
        0 => Value::Integer(r.random_range(-1000..1000)),
        1 => Value::Integer([i64::MAX, i64::MIN + 1, 0][r.random_range(0..3)]),
        2 => Value::Float([0.5, -2.25, 1e300, 3.0, -0.0, 1e-7][r.random_range(0..6)]),
        3 => Value::text(gen_string(r)),
        _ => Value::Null,
    }
}

pub fn gen_expr(r: &mut Rng8, depth: u32, ids: &[String], cols: &[String]) -> Expr {
    if depth == 0 || r.random_bool(0.5) {
        if r.random_bool(0.5) && !cols.is_empty() {
            let id = ids.choose(r).cloned().unwrap_or_else(|| "t".into());
            Expr::Attr(id, cols.choose(r).unwrap().clone())
        } else {
            Expr::Lit(gen_literal(r))
        }
    } else {
        let op = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div][r.random_range(0..4)];
        Expr::BinOp(Box::new(gen_expr(r, depth - 1, ids, cols)), op, Box::new(gen_expr(r, depth - 1, ids, cols)))
    }
}

pub fn gen_cmp_op(r: &mut Rng8) -> CmpOp {
    [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][r.random_range(0..6)]
}

pub fn gen_rowpred(r: &mut Rng8, depth: u32, ids: &[String], cols: &[String]) -> RowPred {
    if depth == 0 || r.random_bool(0.4) {
        return RowPred::Cmp(gen_expr(r, 2, ids, cols), gen_cmp_op(r), gen_expr(r, 2, ids, cols));
    }
    match r.random_range(0..3) {
        0 => RowPred::Not(Box::new(gen_rowpred(r, depth - 1, ids, cols))),
        1 => {
            RowPred::And(Box::new(gen_rowpred(r, depth - 1, ids, cols)), Box::new(gen_rowpred(r, depth - 1, ids, cols)))
        }
        _ => {
            RowPred::Or(Box::new(gen_rowpred(r, depth - 1, ids, cols)), Box::new(gen_rowpred(r, depth - 1, ids, cols)))
        }
    }
}

/// Row predicates over the columns of one table, mostly comparisons of a
/// column with a literal or another column.
pub fn gen_table_rowpred(r: &mut Rng8, depth: u32, t: &Table) -> RowPred {
    let cols: Vec<String> = t.schema().names().map(str::to_owned).collect();
    let atom = |r: &mut Rng8| -> Expr {
        if r.random_bool(0.7) {
            Expr::Attr("t".into(), cols.choose(r).unwrap().clone())
        } else {
            let ty = if r.random_bool(0.6) { ColumnType::Numeric } else { ColumnType::Text };
            Expr::Lit(gen_value(r, ty))
        }
    };
    if depth == 0 || r.random_bool(0.4) {
        let (l, op, rhs) = (atom(r), gen_cmp_op(r), atom(r));
        return RowPred::Cmp(l, op, rhs);
    }
    match r.random_range(0..3) {
        0 => RowPred::Not(Box::new(gen_table_rowpred(r, depth - 1, t))),
        1 => RowPred::And(Box::new(gen_table_rowpred(r, depth - 1, t)), Box::new(gen_table_rowpred(r, depth - 1, t))),
        _ => RowPred::Or(Box::new(gen_table_rowpred(r, depth - 1, t)), Box::new(gen_table_rowpred(r, depth - 1, t))),
    }
}

pub fn gen_prop(r: &mut Rng8, depth: u32) -> PropExpr {
    let ids = vec![gen_ident(r)];
    let cols = vec![gen_string(r), gen_string(r)];
    match r.random_range(0..7) {
        0 => PropExpr::Src(gen_string(r)),
        1 => PropExpr::Col(gen_string(r)),
        2 => PropExpr::ColStar(gen_string(r)),
        3 => PropExpr::Siml(gen_ident(r)),
        4 => PropExpr::PfKey(gen_string(r)),
        5 => PropExpr::Forall(gen_rowpred(r, depth, &ids, &cols)),
        _ => PropExpr::Exists(gen_rowpred(r, depth, &ids, &cols)),
    }
}

pub fn gen_signature(r: &mut Rng8, depth: u32) -> Signature {
    if depth == 0 || r.random_bool(0.4) {
        return Signature::Prop(gen_prop(r, 1));
    }
    match r.random_range(0..3) {
        0 => Signature::Not(Box::new(gen_signature(r, depth - 1))),
        1 => Signature::And(Box::new(gen_signature(r, depth - 1)), Box::new(gen_signature(r, depth - 1))),
        _ => Signature::Or(Box::new(gen_signature(r, depth - 1)), Box::new(gen_signature(r, depth - 1))),
    }
}

/// Signature atoms that can be evaluated on a table without references.
pub fn gen_table_signature(r: &mut Rng8, depth: u32, t: &Table) -> Signature {
    if depth == 0 || r.random_bool(0.35) {
        let col = || COLUMN_NAMES.to_vec();
        let prop = match r.random_range(0..6) {
            0 => PropExpr::Src(["t0", "t1", "other"].choose(r).unwrap().to_string()),
            1 => PropExpr::Col(col().choose(r).unwrap().to_string()),
            2 => PropExpr::ColStar(["A", "b", "", "zz"].choose(r).unwrap().to_string()),
            3 => PropExpr::Forall(gen_table_rowpred(r, 2, t)),
            _ => PropExpr::Exists(gen_table_rowpred(r, 2, t)),
        };
        return Signature::Prop(prop);
    }
    match r.random_range(0..3) {
        0 => Signature::Not(Box::new(gen_table_signature(r, depth - 1, t))),
        1 => Signature::And(
            Box::new(gen_table_signature(r, depth - 1, t)),
            Box::new(gen_table_signature(r, depth - 1, t)),
        ),
        _ => Signature::Or(
            Box::new(gen_table_signature(r, depth - 1, t)),
            Box::new(gen_table_signature(r, depth - 1, t)),
        ),
    }
}

pub fn gen_collection(r: &mut Rng8, depth: u32) -> CollectionExpr {
    if depth == 0 || r.random_bool(0.25) {
        return CollectionExpr::Ident(gen_ident(r));
    }
    let d = depth - 1;
    match r.random_range(0..7) {
        0 => CollectionExpr::Assign(gen_ident(r), Box::new(gen_collection(r, d))),
        1 => CollectionExpr::Restrict(Box::new(gen_collection(r, d)), gen_signature(r, 2)),
        2 => CollectionExpr::And(Box::new(gen_collection(r, d)), Box::new(gen_collection(r, d))),
        3 => CollectionExpr::Or(Box::new(gen_collection(r, d)), Box::new(gen_collection(r, d))),
        4 => CollectionExpr::Nand(Box::new(gen_collection(r, d)), Box::new(gen_collection(r, d))),
        _ => {
            let f = match r.random_range(0..6) {
                0 => {
                    let n = r.random_range(1..4);
                    FuncExpr::Select((0..n).map(|_| gen_string(r)).collect(), gen_collection(r, d))
                }
                1 => {
                    let ids = vec![gen_ident(r)];
                    let cols = vec![gen_string(r)];
                    FuncExpr::Filter(gen_rowpred(r, 2, &ids, &cols), gen_collection(r, d))
                }
                2 => FuncExpr::Union(gen_collection(r, d), gen_collection(r, d)),
                3 => FuncExpr::Diff(gen_collection(r, d), gen_collection(r, d)),
                4 => FuncExpr::Prod(gen_collection(r, d), gen_collection(r, d)),
                _ => {
                    let pd = if r.random_bool(0.5) {
                        let ids = vec![gen_ident(r), gen_ident(r)];
                        let cols = vec![gen_string(r)];
                        Some(gen_rowpred(r, 2, &ids, &cols))
                    } else {
                        None
                    };
                    FuncExpr::Join(pd, gen_collection(r, d), gen_collection(r, d))
                }
            };
            CollectionExpr::Func(Box::new(f))
        }
    }
}

pub fn gen_query(r: &mut Rng8) -> QueryAst {
    let n = r.random_range(1..4);
    QueryAst { statements: (0..n).map(|_| gen_collection(r, 4)).collect() }
}

/// Queries run against the fixture corpus by the engine and acceptance tests.
pub const CORPUS_QUERIES: &[&str] = &[
    r#"Q : {COL*["gdp"]};"#,
    r#"A = X : {SRC[cities_population]}; Q : {SIML[A]};"#,
    r#"JOIN[S["nm"] = T["nm"]] (S : {SRC[cities_gdp]}) (T : {SRC[cities_population]});"#,
    r#"(JOIN S T) : {COL*["obesity"] AND COL*["social media"]};"#,
    r#"K = X : {SRC[customers]}; Q : {PFKEY[K]};"#,
    r#"Q : {COL["state"] AND NOT COL*["gdp"]} NAND R : {SRC[schools]};"#,
    r#"FILTER[t["year"] >= 2020] (Y : {COL["year"]});"#,
    r#"SELECT["state"] (S : {COL["state"] AND EXISTS[s["state"] = "NY"]});"#,
    r#"UNION (A : {SRC[cities_population]}) (B : {SRC[cities_population_2010]});"#,
    r#"DIFF (A : {SRC[cities_population]}) (B : {SRC[cities_population_2010]});"#,
    r#"PROD (A : {SRC[products]}) (B : {COL["quantity"]});"#,
    r#"(JOIN A B) : {SRC[orders] AND COL["customer_id"] AND FORALL[t["amount"] > 0]};"#,
    r#"M = Q : {COL["state"]}; (JOIN M N) : {COL["population"]} OR M : {COL*["obesity"]};"#,
];

pub fn corpus() -> tql_core::Catalog {
    tql_core::load_catalog(&corpus_dir(), &tql_core::IngestConfig::default()).unwrap()
}

/// A small catalog of generated tables named `t0`, `t1`, ...
pub fn gen_catalog(r: &mut Rng8, n: usize) -> tql_core::Catalog {
    tql_core::Catalog::from_tables((0..n).map(|i| gen_table(r, &format!("t{i}"), 4, 5)))
}

fn template_table() -> Table {
    let columns = COLUMN_NAMES
        .iter()
        .map(|n| Column::new(*n, if n.as_bytes()[0] % 2 == 1 { ColumnType::Numeric } else { ColumnType::Text }))
        .collect();
    Table::base("template", Schema::new(columns).unwrap(), vec![]).unwrap()
}

/// Assignment-free collection expressions over the identifiers `A` and `B`,
/// with signatures and predicates that mention the generated column names.
pub fn gen_catalog_collection(r: &mut Rng8, depth: u32) -> CollectionExpr {
    let template = template_table();
    gen_catalog_collection_in(r, depth, &template)
}

fn gen_catalog_collection_in(r: &mut Rng8, depth: u32, t: &Table) -> CollectionExpr {
    let ident = |r: &mut Rng8| CollectionExpr::ident(["A", "B"].choose(r).unwrap());
    if depth == 0 || r.random_bool(0.2) {
        return ident(r);
    }
    let d = depth - 1;
    match r.random_range(0..8) {
        0 | 1 => CollectionExpr::Restrict(Box::new(ident(r)), gen_table_signature(r, 2, t)),
        2 => CollectionExpr::And(
            Box::new(gen_catalog_collection_in(r, d, t)),
            Box::new(gen_catalog_collection_in(r, d, t)),
        ),
        3 => CollectionExpr::Or(
            Box::new(gen_catalog_collection_in(r, d, t)),
            Box::new(gen_catalog_collection_in(r, d, t)),
        ),
        4 => CollectionExpr::Nand(
            Box::new(gen_catalog_collection_in(r, d, t)),
            Box::new(gen_catalog_collection_in(r, d, t)),
        ),
        _ => {
            let f = match r.random_range(0..5) {
                0 => {
                    let mut cols = COLUMN_NAMES.to_vec();
                    cols.sort_by_key(|_| r.random::<u32>());
                    let n = r.random_range(1..3);
                    FuncExpr::Select(
                        cols[..n].iter().map(|s| s.to_string()).collect(),
                        gen_catalog_collection_in(r, d, t),
                    )
                }
                1 => FuncExpr::Filter(gen_table_rowpred(r, 1, t), gen_catalog_collection_in(r, d, t)),
                2 => FuncExpr::Union(gen_catalog_collection_in(r, d, t), gen_catalog_collection_in(r, d, t)),
                3 => FuncExpr::Diff(gen_catalog_collection_in(r, d, t), gen_catalog_collection_in(r, d, t)),
                _ => FuncExpr::Join(None, gen_catalog_collection_in(r, d, t), gen_catalog_collection_in(r, d, t)),
            };
            CollectionExpr::Func(Box::new(f))
        }
    }
}
