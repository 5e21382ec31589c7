//! Abstract syntax of TQL.
//!
//! `Display` on every node prints concrete syntax that parses back to an
//! equal tree, inserting parentheses only where precedence requires them.

use std::fmt;

use crate::catalog::Value;

/// A program: one or more `;`-terminated statements. The value of the last
/// statement is the program's result.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryAst {
    pub statements: Vec<CollectionExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CollectionExpr {
    Ident(String),
    Assign(String, Box<CollectionExpr>),
    Restrict(Box<CollectionExpr>, Signature),
    Func(Box<FuncExpr>),
    And(Box<CollectionExpr>, Box<CollectionExpr>),
    Or(Box<CollectionExpr>, Box<CollectionExpr>),
    /// `C0 NAND C1` (also written `C0 AND NOT C1`): set difference.
    Nand(Box<CollectionExpr>, Box<CollectionExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuncExpr {
    Select(Vec<String>, CollectionExpr),
    Filter(RowPred, CollectionExpr),
    Union(CollectionExpr, CollectionExpr),
    Diff(CollectionExpr, CollectionExpr),
    Prod(CollectionExpr, CollectionExpr),
    Join(Option<RowPred>, CollectionExpr, CollectionExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Signature {
    Prop(PropExpr),
    Not(Box<Signature>),
    And(Box<Signature>, Box<Signature>),
    Or(Box<Signature>, Box<Signature>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropExpr {
    Src(String),
    Col(String),
    ColStar(String),
    Siml(String),
    PfKey(String),
    Forall(RowPred),
    Exists(RowPred),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowPred {
    Cmp(Expr, CmpOp, Expr),
    Not(Box<RowPred>),
    And(Box<RowPred>, Box<RowPred>),
    Or(Box<RowPred>, Box<RowPred>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    /// `id["column"]`
    Attr(String, String),
    BinOp(Box<Expr>, ArithOp, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

/// Words the lexer reserves; they cannot be used as identifiers.
pub const KEYWORDS: &[&str] = &[
    "SELECT", "FILTER", "UNION", "DIFF", "PROD", "JOIN", "AND", "OR", "NAND", "NOT", "SRC", "COL", "SIML", "PFKEY",
    "FORALL", "EXISTS", "NULL",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

impl CollectionExpr {
    pub fn ident(id: &str) -> Self {
        CollectionExpr::Ident(id.to_owned())
    }

    pub fn restrict(self, sig: Signature) -> Self {
        CollectionExpr::Restrict(Box::new(self), sig)
    }

    pub fn func(f: FuncExpr) -> Self {
        CollectionExpr::Func(Box::new(f))
    }

    /// The identifier an operand is named by: `id`, `id = C`, or a
    /// restriction of either.
    pub fn root_identifier(&self) -> Option<&str> {
        match self {
            CollectionExpr::Ident(id) | CollectionExpr::Assign(id, _) => Some(id),
            CollectionExpr::Restrict(inner, _) => inner.root_identifier(),
            _ => None,
        }
    }
}

impl Signature {
    pub fn prop(p: PropExpr) -> Self {
        Signature::Prop(p)
    }

    pub fn and(l: Signature, r: Signature) -> Self {
        Signature::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Signature, r: Signature) -> Self {
        Signature::Or(Box::new(l), Box::new(r))
    }

    pub fn negate(s: Signature) -> Self {
        Signature::Not(Box::new(s))
    }

    /// Top-level conjuncts: `a AND (b AND c)` yields `[a, b, c]`.
    pub fn conjuncts(&self) -> Vec<&Signature> {
        match self {
            Signature::And(l, r) => {
                let mut v = l.conjuncts();
                v.extend(r.conjuncts());
                v
            }
            other => vec![other],
        }
    }
}

impl RowPred {
    pub fn cmp(l: Expr, op: CmpOp, r: Expr) -> Self {
        RowPred::Cmp(l, op, r)
    }

    /// Every `id["col"]` reference, in source order.
    pub fn attributes(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            RowPred::Cmp(l, _, r) => {
                l.collect_attrs(out);
                r.collect_attrs(out);
            }
            RowPred::Not(p) => p.collect_attrs(out),
            RowPred::And(l, r) | RowPred::Or(l, r) => {
                l.collect_attrs(out);
                r.collect_attrs(out);
            }
        }
    }
}

impl Expr {
    pub fn attr(id: &str, col: &str) -> Self {
        Expr::Attr(id.to_owned(), col.to_owned())
    }

    fn collect_attrs<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Attr(id, col) => out.push((id, col)),
            Expr::BinOp(l, _, r) => {
                l.collect_attrs(out);
                r.collect_attrs(out);
            }
        }
    }
}

/// Escapes a string literal body.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn name_or_quoted(s: &str) -> String {
    if is_identifier(s) {
        s.to_owned()
    } else {
        quote(s)
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, stmt) in self.statements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{stmt};")?;
        }
        Ok(())
    }
}

// Collection precedence: 0 assignment, 1 OR, 2 AND/NAND, 3 postfix and
// primaries.
fn coll_level(c: &CollectionExpr) -> u8 {
    match c {
        CollectionExpr::Assign(..) => 0,
        CollectionExpr::Or(..) => 1,
        CollectionExpr::And(..) | CollectionExpr::Nand(..) => 2,
        _ => 3,
    }
}

fn write_coll(f: &mut fmt::Formatter<'_>, c: &CollectionExpr, min: u8) -> fmt::Result {
    if coll_level(c) < min {
        f.write_str("(")?;
        write_coll(f, c, 0)?;
        return f.write_str(")");
    }
    match c {
        CollectionExpr::Ident(id) => f.write_str(id),
        CollectionExpr::Assign(id, rhs) => {
            write!(f, "{id} = ")?;
            write_coll(f, rhs, 0)
        }
        CollectionExpr::Or(l, r) => {
            write_coll(f, l, 1)?;
            f.write_str(" OR ")?;
            write_coll(f, r, 2)
        }
        CollectionExpr::And(l, r) => {
            write_coll(f, l, 2)?;
            f.write_str(" AND ")?;
            write_coll(f, r, 3)
        }
        CollectionExpr::Nand(l, r) => {
            write_coll(f, l, 2)?;
            f.write_str(" NAND ")?;
            write_coll(f, r, 3)
        }
        CollectionExpr::Restrict(base, sig) => {
            write_operand(f, base)?;
            write!(f, " : {{{sig}}}")
        }
        CollectionExpr::Func(func) => write!(f, "{func}"),
    }
}

// Operands of functions and bases of restrictions: postfix level, with
// function applications always parenthesized.
fn write_operand(f: &mut fmt::Formatter<'_>, c: &CollectionExpr) -> fmt::Result {
    if let CollectionExpr::Func(func) = c {
        write!(f, "({func})")
    } else {
        write_coll(f, c, 3)
    }
}

impl fmt::Display for CollectionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_coll(f, self, 0)
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, kw: &str, a: &CollectionExpr, b: &CollectionExpr| {
            write!(f, "{kw} ")?;
            write_operand(f, a)?;
            f.write_str(" ")?;
            write_operand(f, b)
        };
        match self {
            FuncExpr::Select(cols, c) => {
                let list: Vec<String> = cols.iter().map(|s| quote(s)).collect();
                write!(f, "SELECT[{}] ", list.join(", "))?;
                write_operand(f, c)
            }
            FuncExpr::Filter(pd, c) => {
                write!(f, "FILTER[{pd}] ")?;
                write_operand(f, c)
            }
            FuncExpr::Union(a, b) => binary(f, "UNION", a, b),
            FuncExpr::Diff(a, b) => binary(f, "DIFF", a, b),
            FuncExpr::Prod(a, b) => binary(f, "PROD", a, b),
            FuncExpr::Join(None, a, b) => binary(f, "JOIN", a, b),
            FuncExpr::Join(Some(pd), a, b) => binary(f, &format!("JOIN[{pd}]"), a, b),
        }
    }
}

fn sig_level(s: &Signature) -> u8 {
    match s {
        Signature::Or(..) => 1,
        Signature::And(..) => 2,
        Signature::Not(..) => 3,
        Signature::Prop(_) => 4,
    }
}

fn write_sig(f: &mut fmt::Formatter<'_>, s: &Signature, min: u8) -> fmt::Result {
    if sig_level(s) < min {
        return write!(f, "({s})");
    }
    match s {
        Signature::Prop(p) => write!(f, "{p}"),
        Signature::Not(inner) => {
            f.write_str("NOT ")?;
            write_sig(f, inner, 3)
        }
        Signature::And(l, r) => {
            write_sig(f, l, 2)?;
            f.write_str(" AND ")?;
            write_sig(f, r, 3)
        }
        Signature::Or(l, r) => {
            write_sig(f, l, 1)?;
            f.write_str(" OR ")?;
            write_sig(f, r, 2)
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sig(f, self, 0)
    }
}

impl fmt::Display for PropExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropExpr::Src(s) => write!(f, "SRC[{}]", name_or_quoted(s)),
            PropExpr::Col(s) => write!(f, "COL[{}]", quote(s)),
            PropExpr::ColStar(s) => write!(f, "COL*[{}]", quote(s)),
            PropExpr::Siml(id) => write!(f, "SIML[{}]", name_or_quoted(id)),
            PropExpr::PfKey(id) => write!(f, "PFKEY[{}]", name_or_quoted(id)),
            PropExpr::Forall(pd) => write!(f, "FORALL[{pd}]"),
            PropExpr::Exists(pd) => write!(f, "EXISTS[{pd}]"),
        }
    }
}

fn pred_level(p: &RowPred) -> u8 {
    match p {
        RowPred::Or(..) => 1,
        RowPred::And(..) => 2,
        RowPred::Not(..) => 3,
        RowPred::Cmp(..) => 4,
    }
}

fn write_pred(f: &mut fmt::Formatter<'_>, p: &RowPred, min: u8) -> fmt::Result {
    if pred_level(p) < min {
        return write!(f, "({p})");
    }
    match p {
        RowPred::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
        RowPred::Not(inner) => {
            f.write_str("NOT ")?;
            write_pred(f, inner, 3)
        }
        RowPred::And(l, r) => {
            write_pred(f, l, 2)?;
            f.write_str(" AND ")?;
            write_pred(f, r, 3)
        }
        RowPred::Or(l, r) => {
            write_pred(f, l, 1)?;
            f.write_str(" OR ")?;
            write_pred(f, r, 2)
        }
    }
}

impl fmt::Display for RowPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pred(f, self, 0)
    }
}

fn expr_level(e: &Expr) -> u8 {
    match e {
        Expr::BinOp(_, op, _) => op.precedence(),
        _ => 3,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if expr_level(e) < min {
        return write!(f, "({e})");
    }
    match e {
        Expr::Lit(v) => write_literal(f, v),
        Expr::Attr(id, col) => write!(f, "{id}[{}]", quote(col)),
        Expr::BinOp(l, op, r) => {
            let p = op.precedence();
            write_expr(f, l, p)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, r, p + 1)
        }
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Integer(i) => write!(f, "{i}"),
        // Debug keeps a decimal point or exponent, so the literal lexes as a float
        Value::Float(x) => write!(f, "{x:?}"),
        Value::Text(s) => f.write_str(&quote(s)),
        Value::Null => f.write_str("NULL"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

/// Concrete syntax for a whole program.
pub fn pretty_print(ast: &QueryAst) -> String {
    ast.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_search_prints_verbatim() {
        let q = QueryAst {
            statements: vec![CollectionExpr::ident("Q").restrict(Signature::prop(PropExpr::ColStar("gdp".into())))],
        };
        assert_eq!(pretty_print(&q), r#"Q : {COL*["gdp"]};"#);
    }

    #[test]
    fn identity_query() {
        let q = QueryAst { statements: vec![CollectionExpr::ident("A")] };
        assert_eq!(pretty_print(&q), "A;");
    }

    #[test]
    fn restricted_join_is_parenthesized() {
        let join = CollectionExpr::func(FuncExpr::Join(None, CollectionExpr::ident("S"), CollectionExpr::ident("T")));
        let q = join.restrict(Signature::and(
            Signature::prop(PropExpr::ColStar("obesity".into())),
            Signature::prop(PropExpr::ColStar("social media".into())),
        ));
        assert_eq!(q.to_string(), r#"(JOIN S T) : {COL*["obesity"] AND COL*["social media"]}"#);
    }

    #[test]
    fn arithmetic_parentheses() {
        let e = Expr::BinOp(
            Box::new(Expr::Lit(Value::Integer(1))),
            ArithOp::Sub,
            Box::new(Expr::BinOp(
                Box::new(Expr::Lit(Value::Integer(2))),
                ArithOp::Sub,
                Box::new(Expr::Lit(Value::Integer(3))),
            )),
        );
        assert_eq!(e.to_string(), "1 - (2 - 3)");
    }

    #[test]
    fn quoting() {
        assert_eq!(quote(r#"a"b\c"#), r#""a\"b\\c""#);
        assert_eq!(PropExpr::Src("cities_gdp".into()).to_string(), "SRC[cities_gdp]");
        assert_eq!(PropExpr::Src("my file".into()).to_string(), r#"SRC["my file"]"#);
        assert_eq!(PropExpr::Src("AND".into()).to_string(), r#"SRC["AND"]"#);
    }

    #[test]
    fn root_identifiers() {
        let s = CollectionExpr::ident("S").restrict(Signature::prop(PropExpr::Src("a".into())));
        assert_eq!(s.root_identifier(), Some("S"));
        let j = CollectionExpr::func(FuncExpr::Prod(CollectionExpr::ident("A"), CollectionExpr::ident("B")));
        assert_eq!(j.root_identifier(), None);
    }
}
