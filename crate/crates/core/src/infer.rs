//! Forward constraint inference.
//!
//! Every collection node of a query gets a [`ConstraintSet`]: conditions a
//! table of that node's value must meet for it to have any effect on the
//! program's result. The rules only ever derive necessary conditions, so
//! dropping tables that fail them leaves the result unchanged.
//!
//! Demand flows from consumers to operands:
//!
//! * `C : {sig}` passes its own demand plus the top-level `COL`, `COL*` and
//!   `SRC` conjuncts of `sig` to `C`.
//! * `SELECT[lst] C` requires every listed column on `C`; `SRC` demand
//!   passes through, column demand is checked against `lst` directly.
//! * `FILTER[pd] C` passes its demand through and requires the columns `pd`
//!   mentions. `JOIN[pd] A B` requires each mentioned column on the operand
//!   the attribute binds to.
//! * Demand on the output of a binary table function cannot be pinned to one
//!   operand. It is kept as pair constraints and checked against the output
//!   header of each operand pair before the pair is computed.
//! * `AND` and `OR` pass demand to both sides, `NAND` to its left side only.
//! * `id = C` does not pass demand to `C`: the binding must stay complete for
//!   later statements.
//!
//! A second, bottom-up pass tracks which columns a node's tables are sure to
//! have, and sometimes the exact column set, to mark nodes that can never
//! produce a table.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::algebra::ops::{natural_join_column_names, product_column_names, union_alignment};
use crate::algebra::{restrict, Collection};
use crate::ast::{CollectionExpr, FuncExpr, PropExpr, QueryAst, Signature};
use crate::catalog::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchKind {
    /// Column name equals the string.
    Exact,
    /// Column name contains the string, ignoring case.
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnReq {
    pub name: String,
    pub kind: MatchKind,
}

impl ColumnReq {
    pub fn exact(name: impl Into<String>) -> Self {
        ColumnReq { name: name.into(), kind: MatchKind::Exact }
    }

    pub fn contains(name: impl Into<String>) -> Self {
        ColumnReq { name: name.into(), kind: MatchKind::Contains }
    }

    pub fn matches(&self, column: &str) -> bool {
        match self.kind {
            MatchKind::Exact => column == self.name,
            MatchKind::Contains => column.to_lowercase().contains(&self.name.to_lowercase()),
        }
    }

    pub fn matches_any<'a>(&self, mut columns: impl Iterator<Item = &'a str>) -> bool {
        columns.any(|c| self.matches(c))
    }
}

impl fmt::Display for ColumnReq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MatchKind::Exact => write!(f, "COL[{}]", crate::ast::quote(&self.name)),
            MatchKind::Contains => write!(f, "COL*[{}]", crate::ast::quote(&self.name)),
        }
    }
}

/// A condition on a single output table of a binary function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableConstraint {
    Column(ColumnReq),
    Source(String),
}

impl fmt::Display for TableConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableConstraint::Column(c) => c.fmt(f),
            TableConstraint::Source(s) => write!(f, "SRC[{}]", crate::ast::quote(s)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub required_columns: BTreeSet<ColumnReq>,
    pub required_sources: BTreeSet<String>,
    /// Checked on the output of each operand pair (binary functions only).
    pub pair_constraints: Vec<TableConstraint>,
    /// No table of this node can reach the result.
    pub provably_empty: bool,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.required_columns.is_empty()
            && self.required_sources.is_empty()
            && self.pair_constraints.is_empty()
            && !self.provably_empty
    }

    /// Single-table constraints only; pair constraints are not consulted.
    pub fn admits(&self, t: &Table) -> bool {
        !self.provably_empty
            && self.required_columns.iter().all(|r| r.matches_any(t.schema().names()))
            && self.required_sources.iter().all(|s| t.provenance().contains(s))
    }

    fn merge_demand(&mut self, other: &Demand) {
        self.required_columns.extend(other.columns.iter().cloned());
        self.required_sources.extend(other.sources.iter().cloned());
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        parts.extend(self.required_columns.iter().map(|c| c.to_string()));
        parts.extend(self.required_sources.iter().map(|s| format!("SRC[{}]", crate::ast::quote(s))));
        let mut out = if parts.is_empty() { "-".to_owned() } else { parts.join(" AND ") };
        if !self.pair_constraints.is_empty() {
            let pair: Vec<String> = self.pair_constraints.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("  pair: {}", pair.join(" AND ")));
        }
        if self.provably_empty {
            out.push_str("  (provably empty)");
        }
        f.write_str(&out)
    }
}

/// Drops tables violating a single-table constraint of `cs`.
pub fn prune(universe: &Collection, cs: &ConstraintSet) -> Collection {
    restrict(universe, |t| cs.admits(t))
}

/// Whether the pair `(t0, t1)` can yield an output of `func` that meets the
/// node's pair constraints. Only headers and provenance are inspected.
pub fn pair_admissible(func: &FuncExpr, t0: &Table, t1: &Table, cs: &ConstraintSet) -> bool {
    if cs.provably_empty {
        return false;
    }
    let names: Vec<String> = match func {
        FuncExpr::Union(..) | FuncExpr::Diff(..) => {
            if union_alignment(t0, t1).is_none() {
                return false;
            }
            t0.schema().names().map(str::to_owned).collect()
        }
        FuncExpr::Prod(..) | FuncExpr::Join(Some(_), ..) => product_column_names(t0, t1),
        FuncExpr::Join(None, ..) => match natural_join_column_names(t0, t1) {
            Some(n) => n,
            None => return false,
        },
        FuncExpr::Select(..) | FuncExpr::Filter(..) => return true,
    };
    let left_only = matches!(func, FuncExpr::Diff(..));
    cs.pair_constraints.iter().all(|c| match c {
        TableConstraint::Column(req) => req.matches_any(names.iter().map(String::as_str)),
        TableConstraint::Source(s) => t0.provenance().contains(s) || (!left_only && t1.provenance().contains(s)),
    })
}

#[derive(Debug, Clone)]
pub struct AnnotatedNode<'q> {
    pub expr: &'q CollectionExpr,
    pub statement: usize,
    pub depth: usize,
    pub constraints: ConstraintSet,
}

/// A query with a [`ConstraintSet`] for every collection node. Nodes are
/// numbered in pre-order across all statements.
#[derive(Debug, Clone)]
pub struct AnnotatedAst<'q> {
    pub query: &'q QueryAst,
    nodes: Vec<AnnotatedNode<'q>>,
    index: HashMap<usize, usize>,
}

impl<'q> AnnotatedAst<'q> {
    pub fn nodes(&self) -> &[AnnotatedNode<'q>] {
        &self.nodes
    }

    pub fn index_of(&self, expr: &CollectionExpr) -> Option<usize> {
        self.index.get(&(expr as *const CollectionExpr as usize)).copied()
    }

    pub fn constraints(&self, expr: &CollectionExpr) -> Option<&ConstraintSet> {
        self.index_of(expr).map(|i| &self.nodes[i].constraints)
    }

    /// One line per node, indented by depth.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(&format!(
                "{}#{i} {}\n{}    {}\n",
                "  ".repeat(n.depth),
                node_label(n.expr),
                "  ".repeat(n.depth),
                n.constraints
            ));
        }
        out
    }
}

/// A short description of a node: its source text, shortened.
pub fn node_label(expr: &CollectionExpr) -> String {
    let text = expr.to_string();
    if text.chars().count() > 72 {
        let cut: String = text.chars().take(69).collect();
        format!("{cut}...")
    } else {
        text
    }
}

#[derive(Debug, Clone, Default)]
struct Demand {
    columns: BTreeSet<ColumnReq>,
    sources: BTreeSet<String>,
}

impl Demand {
    fn with_signature(&self, sig: &Signature) -> Demand {
        let mut d = self.clone();
        for c in sig.conjuncts() {
            match c {
                Signature::Prop(PropExpr::Col(s)) => {
                    d.columns.insert(ColumnReq::exact(s));
                }
                Signature::Prop(PropExpr::ColStar(s)) => {
                    d.columns.insert(ColumnReq::contains(s));
                }
                Signature::Prop(PropExpr::Src(s)) => {
                    d.sources.insert(s.clone());
                }
                _ => {}
            }
        }
        d
    }

    fn with_columns<'a>(&self, cols: impl IntoIterator<Item = &'a str>) -> Demand {
        let mut d = self.clone();
        d.columns.extend(cols.into_iter().map(ColumnReq::exact));
        d
    }
}

/// What is known statically about every table a node can produce.
#[derive(Debug, Clone, Default)]
struct Shape {
    /// The complete column set, when known.
    exact: Option<BTreeSet<String>>,
    /// Columns every table is sure to have.
    guaranteed: BTreeSet<String>,
    /// The node's value is always empty.
    empty: bool,
}

impl Shape {
    fn may_have(&self, req: &ColumnReq) -> bool {
        match &self.exact {
            Some(cols) => req.matches_any(cols.iter().map(String::as_str)),
            None => true,
        }
    }

    fn surely_has(&self, req: &ColumnReq) -> bool {
        req.matches_any(self.guaranteed.iter().map(String::as_str))
    }

    fn with_empty(mut self, empty: bool) -> Shape {
        self.empty |= empty;
        self
    }
}

pub fn derive_constraints(q: &QueryAst) -> AnnotatedAst<'_> {
    let mut b = Builder { nodes: Vec::new(), index: HashMap::new() };
    for (i, st) in q.statements.iter().enumerate() {
        b.visit(st, i, 0, Demand::default());
    }
    AnnotatedAst { query: q, nodes: b.nodes, index: b.index }
}

struct Builder<'q> {
    nodes: Vec<AnnotatedNode<'q>>,
    index: HashMap<usize, usize>,
}

impl<'q> Builder<'q> {
    fn visit(&mut self, expr: &'q CollectionExpr, statement: usize, depth: usize, demand: Demand) -> Shape {
        let id = self.nodes.len();
        self.index.insert(expr as *const CollectionExpr as usize, id);
        self.nodes.push(AnnotatedNode { expr, statement, depth, constraints: ConstraintSet::default() });
        let mut cs = ConstraintSet::default();
        let d = depth + 1;

        let shape = match expr {
            CollectionExpr::Ident(_) => Shape::default(),
            CollectionExpr::Assign(_, inner) => self.visit(inner, statement, d, Demand::default()),
            CollectionExpr::Restrict(inner, sig) => {
                let child = self.visit(inner, statement, d, demand.with_signature(sig));
                restrict_shape(child, sig)
            }
            CollectionExpr::And(l, r) => {
                let (a, b) = (self.visit(l, statement, d, demand.clone()), self.visit(r, statement, d, demand.clone()));
                let conflict = matches!((&a.exact, &b.exact), (Some(x), Some(y)) if x != y);
                Shape {
                    exact: a.exact.clone().or(b.exact.clone()),
                    guaranteed: a.guaranteed.union(&b.guaranteed).cloned().collect(),
                    empty: a.empty || b.empty || conflict,
                }
            }
            CollectionExpr::Or(l, r) => {
                let (a, b) = (self.visit(l, statement, d, demand.clone()), self.visit(r, statement, d, demand.clone()));
                let exact = match (&a.exact, &b.exact) {
                    (Some(x), Some(y)) if x == y => Some(x.clone()),
                    _ => None,
                };
                let guaranteed = a.guaranteed.intersection(&b.guaranteed).cloned().collect();
                Shape { exact, guaranteed, empty: a.empty && b.empty }
            }
            CollectionExpr::Nand(l, r) => {
                let a = self.visit(l, statement, d, demand.clone());
                self.visit(r, statement, d, Demand::default());
                a
            }
            CollectionExpr::Func(f) => self.visit_func(f, statement, d, &demand, &mut cs),
        };

        match expr {
            CollectionExpr::Func(f) if f.is_binary() => {
                cs.pair_constraints = demand
                    .columns
                    .iter()
                    .cloned()
                    .map(TableConstraint::Column)
                    .chain(demand.sources.iter().cloned().map(TableConstraint::Source))
                    .collect();
            }
            _ => cs.merge_demand(&demand),
        }
        let refuted = demand.columns.iter().any(|c| !shape.may_have(c));
        cs.provably_empty |= shape.empty || refuted;
        self.nodes[id].constraints = cs;
        shape
    }

    fn visit_func(
        &mut self,
        f: &'q FuncExpr,
        statement: usize,
        depth: usize,
        demand: &Demand,
        cs: &mut ConstraintSet,
    ) -> Shape {
        match f {
            FuncExpr::Select(lst, c) => {
                let child_demand = Demand { columns: Default::default(), sources: demand.sources.clone() }
                    .with_columns(lst.iter().map(String::as_str));
                let child = self.visit(c, statement, depth, child_demand);
                let listed: BTreeSet<String> = lst.iter().cloned().collect();
                let duplicate = listed.len() != lst.len();
                let missing = lst.iter().any(|l| !child.may_have(&ColumnReq::exact(l)));
                // column demand is settled here against the list itself
                cs.provably_empty |= demand.columns.iter().any(|r| !r.matches_any(lst.iter().map(String::as_str)));
                Shape { exact: Some(listed.clone()), guaranteed: listed, empty: child.empty || duplicate || missing }
            }
            FuncExpr::Filter(pd, c) => {
                let cols: Vec<&str> = pd.attributes().into_iter().map(|(_, col)| col).collect();
                let child = self.visit(c, statement, depth, demand.with_columns(cols.iter().copied()));
                let missing = cols.iter().any(|col| !child.may_have(&ColumnReq::exact(*col)));
                child.with_empty(missing)
            }
            FuncExpr::Union(a, b) | FuncExpr::Diff(a, b) => {
                let (sa, sb) = (
                    self.visit(a, statement, depth, Demand::default()),
                    self.visit(b, statement, depth, Demand::default()),
                );
                let incompatible = matches!((&sa.exact, &sb.exact), (Some(x), Some(y)) if x != y);
                let empty = sa.empty || sb.empty || incompatible;
                Shape { exact: sa.exact, guaranteed: sa.guaranteed, empty }
            }
            FuncExpr::Prod(a, b) => {
                let (sa, sb) = (
                    self.visit(a, statement, depth, Demand::default()),
                    self.visit(b, statement, depth, Demand::default()),
                );
                product_shape(sa, sb)
            }
            FuncExpr::Join(None, a, b) => {
                let (sa, sb) = (
                    self.visit(a, statement, depth, Demand::default()),
                    self.visit(b, statement, depth, Demand::default()),
                );
                let exact = match (&sa.exact, &sb.exact) {
                    (Some(x), Some(y)) => Some(x.union(y).cloned().collect::<BTreeSet<_>>()),
                    _ => None,
                };
                let disjoint = matches!((&sa.exact, &sb.exact), (Some(x), Some(y)) if x.is_disjoint(y));
                Shape {
                    guaranteed: sa.guaranteed.union(&sb.guaranteed).cloned().collect(),
                    exact,
                    empty: sa.empty || sb.empty || disjoint,
                }
            }
            FuncExpr::Join(Some(pd), a, b) => {
                let (ia, ib) = (a.root_identifier(), b.root_identifier());
                let (mut left, mut right) = (Vec::new(), Vec::new());
                for (id, col) in pd.attributes() {
                    match (Some(id) == ia, Some(id) == ib) {
                        (true, false) => left.push(col),
                        (false, true) => right.push(col),
                        _ => {}
                    }
                }
                let sa = self.visit(a, statement, depth, Demand::default().with_columns(left.iter().copied()));
                let sb = self.visit(b, statement, depth, Demand::default().with_columns(right.iter().copied()));
                let missing = left.iter().any(|c| !sa.may_have(&ColumnReq::exact(*c)))
                    || right.iter().any(|c| !sb.may_have(&ColumnReq::exact(*c)));
                product_shape(sa, sb).with_empty(missing)
            }
        }
    }
}

fn restrict_shape(child: Shape, sig: &Signature) -> Shape {
    let mut shape = child;
    let mut refuted = false;
    for c in sig.conjuncts() {
        match c {
            Signature::Prop(PropExpr::Col(s)) => {
                refuted |= !shape.may_have(&ColumnReq::exact(s));
                shape.guaranteed.insert(s.clone());
            }
            Signature::Prop(PropExpr::ColStar(s)) => refuted |= !shape.may_have(&ColumnReq::contains(s)),
            Signature::Not(inner) => match inner.as_ref() {
                Signature::Prop(PropExpr::Col(s)) => refuted |= shape.surely_has(&ColumnReq::exact(s)),
                Signature::Prop(PropExpr::ColStar(s)) => refuted |= shape.surely_has(&ColumnReq::contains(s)),
                _ => {}
            },
            _ => {}
        }
    }
    // `NOT COL` checked against columns the same signature guarantees
    for c in sig.conjuncts() {
        if let Signature::Not(inner) = c {
            if let Signature::Prop(PropExpr::Col(s)) = inner.as_ref() {
                refuted |= shape.guaranteed.contains(s);
            }
        }
    }
    shape.with_empty(refuted)
}

/// Product-style outputs rename colliding columns, so a column is only
/// guaranteed when the other side is known not to have it.
fn product_shape(a: Shape, b: Shape) -> Shape {
    let keep = |own: &BTreeSet<String>, other: &Option<BTreeSet<String>>| -> BTreeSet<String> {
        match other {
            Some(o) => own.iter().filter(|c| !o.contains(*c)).cloned().collect(),
            None => BTreeSet::new(),
        }
    };
    let mut guaranteed = keep(&a.guaranteed, &b.exact);
    guaranteed.extend(keep(&b.guaranteed, &a.exact));
    Shape { exact: None, guaranteed, empty: a.empty || b.empty }
}

impl FuncExpr {
    /// Union, difference, product and join take two collections.
    pub fn is_binary(&self) -> bool {
        !matches!(self, FuncExpr::Select(..) | FuncExpr::Filter(..))
    }
}
