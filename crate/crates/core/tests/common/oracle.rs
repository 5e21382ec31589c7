//! Textbook relational algebra over row sets, written without the engine's
//! operators. Used as ground truth.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use tql_core::ast::{CmpOp, Expr, RowPred};
use tql_core::catalog::{ColumnType, Table, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Rel {
    pub names: Vec<String>,
    pub types: Vec<ColumnType>,
    pub rows: BTreeSet<Vec<Value>>,
    pub provenance: BTreeSet<String>,
}

impl Rel {
    pub fn of(t: &Table) -> Rel {
        Rel {
            names: t.schema().names().map(str::to_owned).collect(),
            types: t.schema().columns().iter().map(|c| c.ty).collect(),
            rows: t.rows().iter().cloned().collect(),
            provenance: t.provenance().clone(),
        }
    }

    /// Columns sorted by name, so relations equal up to column order compare equal.
    pub fn normalized(&self) -> Rel {
        let mut order: Vec<usize> = (0..self.names.len()).collect();
        order.sort_by(|&i, &j| self.names[i].cmp(&self.names[j]));
        Rel {
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            types: order.iter().map(|&i| self.types[i]).collect(),
            rows: self.rows.iter().map(|r| order.iter().map(|&i| r[i].clone()).collect()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn label(&self) -> String {
        self.provenance.iter().cloned().collect::<Vec<_>>().join("+")
    }
}

/// Same columns in the same order, same row set, same provenance.
pub fn matches(t: &Table, r: &Rel) -> bool {
    Rel::of(t) == *r
}

pub fn product(a: &Rel, a_label: &str, b: &Rel, b_label: &str) -> Rel {
    let mut names = Vec::new();
    for n in &a.names {
        names.push(if b.names.contains(n) { format!("{a_label}.{n}") } else { n.clone() });
    }
    for n in &b.names {
        names.push(if a.names.contains(n) { format!("{b_label}.{n}") } else { n.clone() });
    }
    let unique: BTreeSet<&String> = names.iter().collect();
    assert_eq!(unique.len(), names.len(), "oracle product expects distinct labels");
    let mut rows = BTreeSet::new();
    for x in &a.rows {
        for y in &b.rows {
            let mut row = x.clone();
            row.extend(y.iter().cloned());
            rows.insert(row);
        }
    }
    Rel {
        names,
        types: a.types.iter().chain(&b.types).copied().collect(),
        rows,
        provenance: a.provenance.union(&b.provenance).cloned().collect(),
    }
}

/// Positions of `a`'s columns in `b`, if both have the same typed columns.
fn alignment(a: &Rel, b: &Rel) -> Option<Vec<usize>> {
    if a.names.len() != b.names.len() {
        return None;
    }
    let mut out = Vec::new();
    for (i, n) in a.names.iter().enumerate() {
        let j = b.col(n)?;
        if a.types[i] != b.types[j] {
            return None;
        }
        out.push(j);
    }
    Some(out)
}

fn realign(b: &Rel, align: &[usize]) -> BTreeSet<Vec<Value>> {
    b.rows.iter().map(|r| align.iter().map(|&j| r[j].clone()).collect()).collect()
}

pub fn union(a: &Rel, b: &Rel) -> Option<Rel> {
    let align = alignment(a, b)?;
    let mut out = a.clone();
    out.rows.extend(realign(b, &align));
    out.provenance.extend(b.provenance.iter().cloned());
    Some(out)
}

pub fn diff(a: &Rel, b: &Rel) -> Option<Rel> {
    let align = alignment(a, b)?;
    let other = realign(b, &align);
    let mut out = a.clone();
    out.rows.retain(|r| !other.contains(r));
    Some(out)
}

pub fn select(a: &Rel, pred: impl Fn(&[String], &[Value]) -> bool) -> Rel {
    let mut out = a.clone();
    out.rows.retain(|r| pred(&a.names, r));
    out
}

pub fn project(a: &Rel, cols: &[String]) -> Option<Rel> {
    let set: BTreeSet<&String> = cols.iter().collect();
    if set.len() != cols.len() {
        return None;
    }
    let idx: Option<Vec<usize>> = cols.iter().map(|c| a.col(c)).collect();
    let idx = idx?;
    Some(Rel {
        names: cols.to_vec(),
        types: idx.iter().map(|&i| a.types[i]).collect(),
        rows: a.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect(),
        provenance: a.provenance.clone(),
    })
}

/// Nested-loop natural join; `None` when no column name is shared.
pub fn natural_join(a: &Rel, b: &Rel) -> Option<Rel> {
    let shared: Vec<&String> = a.names.iter().filter(|n| b.names.contains(n)).collect();
    if shared.is_empty() {
        return None;
    }
    let b_rest: Vec<usize> = (0..b.names.len()).filter(|j| !shared.contains(&&b.names[*j])).collect();
    let mut rows = BTreeSet::new();
    for x in &a.rows {
        for y in &b.rows {
            let agree = shared.iter().all(|n| {
                let (vx, vy) = (&x[a.col(n).unwrap()], &y[b.col(n).unwrap()]);
                compare_values(CmpOp::Eq, vx, vy)
            });
            if agree {
                let mut row = x.clone();
                row.extend(b_rest.iter().map(|&j| y[j].clone()));
                rows.insert(row);
            }
        }
    }
    Some(Rel {
        names: a.names.iter().cloned().chain(b_rest.iter().map(|&j| b.names[j].clone())).collect(),
        types: a.types.iter().copied().chain(b_rest.iter().map(|&j| b.types[j])).collect(),
        rows,
        provenance: a.provenance.union(&b.provenance).cloned().collect(),
    })
}

/// Comparison with SQL-like rules: anything involving NULL is false, numbers
/// compare numerically, texts lexicographically, mixed kinds never match.
pub fn compare_values(op: CmpOp, a: &Value, b: &Value) -> bool {
    let ord = match (a, b) {
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Integer(x), Value::Integer(y)) => x.cmp(y),
        (Value::Integer(_) | Value::Float(_), Value::Integer(_) | Value::Float(_)) => {
            let f = |v: &Value| match v {
                Value::Integer(i) => *i as f64,
                Value::Float(x) => *x,
                _ => unreachable!(),
            };
            match f(a).partial_cmp(&f(b)) {
                Some(o) => o,
                None => return false,
            }
        }
        _ => return false,
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

/// Evaluates a comparison-only predicate on one row, any identifier naming
/// the row's table. Missing columns read as NULL.
pub fn eval_pred(pd: &RowPred, names: &[String], row: &[Value]) -> bool {
    let value = |e: &Expr| -> Value {
        match e {
            Expr::Lit(v) => v.clone(),
            Expr::Attr(_, col) => names.iter().position(|n| n == col).map_or(Value::Null, |i| row[i].clone()),
            Expr::BinOp(..) => panic!("oracle predicates are comparison-only"),
        }
    };
    match pd {
        RowPred::Cmp(l, op, r) => compare_values(*op, &value(l), &value(r)),
        RowPred::Not(p) => !eval_pred(p, names, row),
        RowPred::And(l, r) => eval_pred(l, names, row) && eval_pred(r, names, row),
        RowPred::Or(l, r) => eval_pred(l, names, row) || eval_pred(r, names, row),
    }
}

/// The label the engine gives a table when qualifying its columns.
pub fn label(t: &Table) -> String {
    t.name().map(str::to_owned).unwrap_or_else(|| Rel::of(t).label())
}

/// Reference-free signatures: SRC against provenance, COL by exact name,
/// COL* by case-insensitive substring, quantifiers over the row set.
pub fn holds(sig: &tql_core::ast::Signature, t: &Table) -> bool {
    use tql_core::ast::{PropExpr, Signature};
    let rel = Rel::of(t);
    match sig {
        Signature::Not(s) => !holds(s, t),
        Signature::And(a, b) => holds(a, t) && holds(b, t),
        Signature::Or(a, b) => holds(a, t) || holds(b, t),
        Signature::Prop(p) => match p {
            PropExpr::Src(s) => rel.provenance.contains(s),
            PropExpr::Col(c) => rel.names.contains(c),
            PropExpr::ColStar(k) => rel.names.iter().any(|n| n.to_lowercase().contains(&k.to_lowercase())),
            PropExpr::Forall(pd) => rel.rows.iter().all(|r| eval_pred(pd, &rel.names, r)),
            PropExpr::Exists(pd) => rel.rows.iter().any(|r| eval_pred(pd, &rel.names, r)),
            PropExpr::Siml(_) | PropExpr::PfKey(_) => panic!("oracle signatures are reference-free"),
        },
    }
}
