//! Recursive-descent parser for TQL.
//!
//! Precedence, loosest first:
//!
//! | level | collections          | signatures / row predicates |
//! |-------|----------------------|-----------------------------|
//! | 0     | `id = C` (right)     |                             |
//! | 1     | `OR`                 | `OR`                        |
//! | 2     | `AND`, `NAND`, `AND NOT` | `AND`                   |
//! | 3     | `C : {sig}` postfix  | `NOT` prefix                |
//!
//! Binary operators are left-associative. Function operands (`JOIN A B`)
//! are postfix-level expressions, so `JOIN A B : {s}` restricts `B`; write
//! `(JOIN A B) : {s}` to restrict the join. Inside row predicates,
//! comparisons bind looser than arithmetic, and `*`/`/` bind tighter than
//! `+`/`-`.

mod lexer;

use std::fmt;
use std::ops::Range;

pub use lexer::{lex, Keyword, Token, TokenKind};

use crate::ast::{ArithOp, CmpOp, CollectionExpr, Expr, FuncExpr, PropExpr, QueryAst, RowPred, Signature};
use crate::catalog::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    /// Byte range into the source text.
    pub span: Range<usize>,
    /// What the parser would have accepted instead, when that is known.
    pub expected: Option<String>,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: Range<usize>, expected: Option<&str>) -> Self {
        ParseError { message: message.into(), span, expected: expected.map(str::to_owned) }
    }

    /// The error with the offending source line and a caret marker.
    pub fn render(&self, source: &str) -> String {
        let start = self.span.start.min(source.len());
        let line_start = source[..start].rfind('\n').map_or(0, |i| i + 1);
        let line_end = source[start..].find('\n').map_or(source.len(), |i| start + i);
        let line_no = source[..start].matches('\n').count() + 1;
        let col = source[line_start..start].chars().count();
        let width = source[start..self.span.end.clamp(start, line_end)].chars().count().max(1);
        let mut out = format!("error: {self}\n --> line {line_no}, column {}\n", col + 1);
        out.push_str(&format!("  | {}\n", &source[line_start..line_end]));
        out.push_str(&format!("  | {}{}", " ".repeat(col), "^".repeat(width)));
        out
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}..{}", self.message, self.span.start, self.span.end)?;
        if let Some(exp) = &self.expected {
            write!(f, " (expected {exp})")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Lexes and parses a complete program.
pub fn parse_query(input: &str) -> Result<QueryAst, ParseError> {
    let tokens = lex(input)?;
    parse(&tokens, input.len())
}

/// Parses a token stream. `source_len` positions end-of-input errors.
pub fn parse(tokens: &[Token], source_len: usize) -> Result<QueryAst, ParseError> {
    let mut p = Parser { tokens, pos: 0, eof: source_len };
    let mut statements = Vec::new();
    loop {
        statements.push(p.collection()?);
        p.expect(&TokenKind::Semi, "`;`")?;
        if p.at_end() {
            break;
        }
    }
    Ok(QueryAst { statements })
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    eof: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        self.eat(&TokenKind::Keyword(kw))
    }

    fn error_here(&self, message: &str, expected: &str) -> ParseError {
        match self.tokens.get(self.pos) {
            Some(tok) => {
                ParseError::new(format!("{message}, found {}", tok.kind.describe()), tok.span.clone(), Some(expected))
            }
            None => ParseError::new(format!("{message}, found end of input"), self.eof..self.eof, Some(expected)),
        }
    }

    fn expect(&mut self, kind: &TokenKind, expected: &str) -> Result<(), ParseError> {
        if self.eat(kind) {
            Ok(())
        } else {
            Err(self.error_here("unexpected token", expected))
        }
    }

    fn collection(&mut self) -> Result<CollectionExpr, ParseError> {
        if let (Some(TokenKind::Ident(id)), Some(TokenKind::Equals)) = (self.peek(), self.peek_at(1)) {
            self.pos += 2;
            let rhs = self.collection()?;
            return Ok(CollectionExpr::Assign(id.clone(), Box::new(rhs)));
        }
        self.coll_or()
    }

    fn coll_or(&mut self) -> Result<CollectionExpr, ParseError> {
        let mut lhs = self.coll_and()?;
        while self.eat_kw(Keyword::Or) {
            let rhs = self.coll_and()?;
            lhs = CollectionExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn coll_and(&mut self) -> Result<CollectionExpr, ParseError> {
        let mut lhs = self.postfix()?;
        loop {
            if self.eat_kw(Keyword::And) {
                if self.eat_kw(Keyword::Not) {
                    let rhs = self.postfix()?;
                    lhs = CollectionExpr::Nand(Box::new(lhs), Box::new(rhs));
                } else {
                    let rhs = self.postfix()?;
                    lhs = CollectionExpr::And(Box::new(lhs), Box::new(rhs));
                }
            } else if self.eat_kw(Keyword::Nand) {
                let rhs = self.postfix()?;
                lhs = CollectionExpr::Nand(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn postfix(&mut self) -> Result<CollectionExpr, ParseError> {
        let mut base = self.primary()?;
        while self.eat(&TokenKind::Colon) {
            self.expect(&TokenKind::LBrace, "`{`")?;
            if self.peek() == Some(&TokenKind::RBrace) {
                return Err(self.error_here("empty signature", "a signature such as COL[\"name\"]"));
            }
            let sig = self.sig_or()?;
            self.expect(&TokenKind::RBrace, "`}`")?;
            base = CollectionExpr::Restrict(Box::new(base), sig);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<CollectionExpr, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(id)) => {
                self.pos += 1;
                Ok(CollectionExpr::Ident(id.clone()))
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.collection()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            Some(TokenKind::Keyword(kw)) => {
                let kw = *kw;
                let func = match kw {
                    Keyword::Select => {
                        self.pos += 1;
                        self.expect(&TokenKind::LBracket, "`[`")?;
                        let mut cols = vec![self.string("column name")?];
                        while self.eat(&TokenKind::Comma) {
                            cols.push(self.string("column name")?);
                        }
                        self.expect(&TokenKind::RBracket, "`]`")?;
                        FuncExpr::Select(cols, self.postfix()?)
                    }
                    Keyword::Filter => {
                        self.pos += 1;
                        let pd = self.bracketed_pred()?;
                        FuncExpr::Filter(pd, self.postfix()?)
                    }
                    Keyword::Union | Keyword::Diff | Keyword::Prod => {
                        self.pos += 1;
                        let a = self.postfix()?;
                        let b = self.postfix()?;
                        match kw {
                            Keyword::Union => FuncExpr::Union(a, b),
                            Keyword::Diff => FuncExpr::Diff(a, b),
                            _ => FuncExpr::Prod(a, b),
                        }
                    }
                    Keyword::Join => {
                        self.pos += 1;
                        let pd =
                            if self.peek() == Some(&TokenKind::LBracket) { Some(self.bracketed_pred()?) } else { None };
                        let a = self.postfix()?;
                        let b = self.postfix()?;
                        FuncExpr::Join(pd, a, b)
                    }
                    _ => return Err(self.error_here("expected a collection", "identifier, `(` or function")),
                };
                Ok(CollectionExpr::Func(Box::new(func)))
            }
            _ => Err(self.error_here("expected a collection", "identifier, `(` or function")),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Str(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.error_here(&format!("expected {what}"), "string literal")),
        }
    }

    /// A string literal, or a bare identifier naming a table or collection.
    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Str(s)) | Some(TokenKind::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.error_here("expected a name", "identifier or string literal")),
        }
    }

    fn bracketed<T>(&mut self, inner: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        self.expect(&TokenKind::LBracket, "`[`")?;
        let v = inner(self)?;
        self.expect(&TokenKind::RBracket, "`]`")?;
        Ok(v)
    }

    fn bracketed_pred(&mut self) -> Result<RowPred, ParseError> {
        self.bracketed(|p| p.pred_or())
    }

    fn sig_or(&mut self) -> Result<Signature, ParseError> {
        let mut lhs = self.sig_and()?;
        while self.eat_kw(Keyword::Or) {
            lhs = Signature::Or(Box::new(lhs), Box::new(self.sig_and()?));
        }
        Ok(lhs)
    }

    fn sig_and(&mut self) -> Result<Signature, ParseError> {
        let mut lhs = self.sig_not()?;
        while self.eat_kw(Keyword::And) {
            lhs = Signature::And(Box::new(lhs), Box::new(self.sig_not()?));
        }
        Ok(lhs)
    }

    fn sig_not(&mut self) -> Result<Signature, ParseError> {
        if self.eat_kw(Keyword::Not) {
            return Ok(Signature::Not(Box::new(self.sig_not()?)));
        }
        if self.eat(&TokenKind::LParen) {
            let s = self.sig_or()?;
            self.expect(&TokenKind::RParen, "`)`")?;
            return Ok(s);
        }
        let prop = match self.peek() {
            Some(TokenKind::Keyword(Keyword::Src)) => {
                self.pos += 1;
                PropExpr::Src(self.bracketed(|p| p.name())?)
            }
            Some(TokenKind::Keyword(Keyword::Col)) => {
                self.pos += 1;
                PropExpr::Col(self.bracketed(|p| p.string("column name"))?)
            }
            Some(TokenKind::Keyword(Keyword::ColStar)) => {
                self.pos += 1;
                PropExpr::ColStar(self.bracketed(|p| p.string("keyword"))?)
            }
            Some(TokenKind::Keyword(Keyword::Siml)) => {
                self.pos += 1;
                PropExpr::Siml(self.bracketed(|p| p.name())?)
            }
            Some(TokenKind::Keyword(Keyword::PfKey)) => {
                self.pos += 1;
                PropExpr::PfKey(self.bracketed(|p| p.name())?)
            }
            Some(TokenKind::Keyword(Keyword::Forall)) => {
                self.pos += 1;
                PropExpr::Forall(self.bracketed_pred()?)
            }
            Some(TokenKind::Keyword(Keyword::Exists)) => {
                self.pos += 1;
                PropExpr::Exists(self.bracketed_pred()?)
            }
            _ => {
                return Err(
                    self.error_here("expected a constraint", "SRC, COL, COL*, SIML, PFKEY, FORALL, EXISTS, NOT or `(`")
                )
            }
        };
        Ok(Signature::Prop(prop))
    }

    fn pred_or(&mut self) -> Result<RowPred, ParseError> {
        let mut lhs = self.pred_and()?;
        while self.eat_kw(Keyword::Or) {
            lhs = RowPred::Or(Box::new(lhs), Box::new(self.pred_and()?));
        }
        Ok(lhs)
    }

    fn pred_and(&mut self) -> Result<RowPred, ParseError> {
        let mut lhs = self.pred_not()?;
        while self.eat_kw(Keyword::And) {
            lhs = RowPred::And(Box::new(lhs), Box::new(self.pred_not()?));
        }
        Ok(lhs)
    }

    fn pred_not(&mut self) -> Result<RowPred, ParseError> {
        if self.eat_kw(Keyword::Not) {
            return Ok(RowPred::Not(Box::new(self.pred_not()?)));
        }
        if self.peek() == Some(&TokenKind::LParen) {
            // `(` opens either a grouped predicate or a grouped arithmetic
            // expression; try the predicate first and fall back.
            let save = self.pos;
            self.pos += 1;
            if let Ok(p) = self.pred_or() {
                if self.eat(&TokenKind::RParen) && !self.continues_expression() {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        self.comparison()
    }

    fn continues_expression(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                TokenKind::Plus
                    | TokenKind::Minus
                    | TokenKind::Star
                    | TokenKind::Slash
                    | TokenKind::Equals
                    | TokenKind::Ne
                    | TokenKind::Lt
                    | TokenKind::Le
                    | TokenKind::Gt
                    | TokenKind::Ge
            )
        )
    }

    fn comparison(&mut self) -> Result<RowPred, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(TokenKind::Equals) => CmpOp::Eq,
            Some(TokenKind::Ne) => CmpOp::Ne,
            Some(TokenKind::Lt) => CmpOp::Lt,
            Some(TokenKind::Le) => CmpOp::Le,
            Some(TokenKind::Gt) => CmpOp::Gt,
            Some(TokenKind::Ge) => CmpOp::Ge,
            _ => return Err(self.error_here("expected a comparison operator", "=, !=, <, <=, >, >=")),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(RowPred::Cmp(lhs, op, rhs))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => ArithOp::Add,
                Some(TokenKind::Minus) => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::BinOp(Box::new(lhs), op, Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Star) => ArithOp::Mul,
                Some(TokenKind::Slash) => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::BinOp(Box::new(lhs), op, Box::new(self.factor()?));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.tokens.get(self.pos) else {
            return Err(self.error_here("expected an expression", "value, attribute or `(`"));
        };
        match &tok.kind {
            TokenKind::Int(i) => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Integer(*i)))
            }
            TokenKind::Float(f) => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Float(*f)))
            }
            TokenKind::Str(s) => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Text(s.clone())))
            }
            TokenKind::Keyword(Keyword::Null) => {
                self.pos += 1;
                Ok(Expr::Lit(Value::Null))
            }
            TokenKind::Minus => {
                self.pos += 1;
                match self.bump().map(|t| &t.kind) {
                    Some(TokenKind::Int(i)) => Ok(Expr::Lit(Value::Integer(-i))),
                    Some(TokenKind::Float(f)) => Ok(Expr::Lit(Value::Float(-f))),
                    _ => {
                        self.pos -= 1;
                        Err(self.error_here("`-` must be followed by a number", "numeric literal"))
                    }
                }
            }
            TokenKind::Ident(id) => {
                self.pos += 1;
                let col = self.bracketed(|p| p.name())?;
                Ok(Expr::Attr(id.clone(), col))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.error_here("expected an expression", "value, attribute or `(`")),
        }
    }
}
