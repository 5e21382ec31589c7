use std::ops::Range;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Select,
    Filter,
    Union,
    Diff,
    Prod,
    Join,
    And,
    Or,
    Nand,
    Not,
    Src,
    Col,
    ColStar,
    Siml,
    PfKey,
    Forall,
    Exists,
    Null,
}

impl Keyword {
    fn from_word(w: &str) -> Option<Keyword> {
        Some(match w {
            "SELECT" => Keyword::Select,
            "FILTER" => Keyword::Filter,
            "UNION" => Keyword::Union,
            "DIFF" => Keyword::Diff,
            "PROD" => Keyword::Prod,
            "JOIN" => Keyword::Join,
            "AND" => Keyword::And,
            "OR" => Keyword::Or,
            "NAND" => Keyword::Nand,
            "NOT" => Keyword::Not,
            "SRC" => Keyword::Src,
            "COL" => Keyword::Col,
            "SIML" => Keyword::Siml,
            "PFKEY" => Keyword::PfKey,
            "FORALL" => Keyword::Forall,
            "EXISTS" => Keyword::Exists,
            "NULL" => Keyword::Null,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Select => "SELECT",
            Keyword::Filter => "FILTER",
            Keyword::Union => "UNION",
            Keyword::Diff => "DIFF",
            Keyword::Prod => "PROD",
            Keyword::Join => "JOIN",
            Keyword::And => "AND",
            Keyword::Or => "OR",
            Keyword::Nand => "NAND",
            Keyword::Not => "NOT",
            Keyword::Src => "SRC",
            Keyword::Col => "COL",
            Keyword::ColStar => "COL*",
            Keyword::Siml => "SIML",
            Keyword::PfKey => "PFKEY",
            Keyword::Forall => "FORALL",
            Keyword::Exists => "EXISTS",
            Keyword::Null => "NULL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    Semi,
    Colon,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    /// `=`: assignment or equality, depending on context.
    Equals,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Keyword(k) => format!("`{}`", k.as_str()),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Str(_) => "string literal".into(),
            TokenKind::Int(_) | TokenKind::Float(_) => "number".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::Ne => "`!=`".into(),
            TokenKind::Lt => "`<`".into(),
            TokenKind::Le => "`<=`".into(),
            TokenKind::Gt => "`>`".into(),
            TokenKind::Ge => "`>=`".into(),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Range<usize>,
}

/// Splits TQL source into tokens.
///
/// Keywords are case-sensitive and uppercase; `COL*` is a single token when
/// the `*` immediately follows `COL`. Numeric literals without a fractional
/// part or exponent that fit in 64 bits lex as integers.
pub fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = input.char_indices().peekable();

    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = |kind| Some((kind, start + c.len_utf8()));
        let simple = match c {
            ';' => single(TokenKind::Semi),
            ':' => single(TokenKind::Colon),
            '{' => single(TokenKind::LBrace),
            '}' => single(TokenKind::RBrace),
            '[' => single(TokenKind::LBracket),
            ']' => single(TokenKind::RBracket),
            '(' => single(TokenKind::LParen),
            ')' => single(TokenKind::RParen),
            ',' => single(TokenKind::Comma),
            '=' => single(TokenKind::Equals),
            '+' => single(TokenKind::Plus),
            '-' => single(TokenKind::Minus),
            '*' | '×' => single(TokenKind::Star),
            '/' | '÷' => single(TokenKind::Slash),
            '≠' => single(TokenKind::Ne),
            '≤' => single(TokenKind::Le),
            '≥' => single(TokenKind::Ge),
            '<' | '>' | '!' => {
                let next = input[start + 1..].chars().next();
                match (c, next) {
                    ('<', Some('=')) => Some((TokenKind::Le, start + 2)),
                    ('<', Some('>')) => Some((TokenKind::Ne, start + 2)),
                    ('<', _) => single(TokenKind::Lt),
                    ('>', Some('=')) => Some((TokenKind::Ge, start + 2)),
                    ('>', _) => single(TokenKind::Gt),
                    ('!', Some('=')) => Some((TokenKind::Ne, start + 2)),
                    _ => return Err(ParseError::new("unexpected character `!`", start..start + 1, Some("`!=`"))),
                }
            }
            _ => None,
        };
        if let Some((kind, end)) = simple {
            while chars.peek().is_some_and(|&(i, _)| i < end) {
                chars.next();
            }
            tokens.push(Token { kind, lexeme: input[start..end].to_owned(), span: start..end });
            continue;
        }

        if c == '"' {
            chars.next();
            let mut value = String::new();
            let mut end = None;
            while let Some((i, ch)) = chars.next() {
                match ch {
                    '"' => {
                        end = Some(i + 1);
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, esc)) => value.push(esc),
                        None => break,
                    },
                    other => value.push(other),
                }
            }
            let Some(end) = end else {
                return Err(ParseError::new("unterminated string literal", start..input.len(), Some("closing `\"`")));
            };
            tokens.push(Token { kind: TokenKind::Str(value), lexeme: input[start..end].to_owned(), span: start..end });
            continue;
        }

        if c.is_ascii_digit() {
            let end = scan_number(input, start);
            while chars.peek().is_some_and(|&(i, _)| i < end) {
                chars.next();
            }
            let text = &input[start..end];
            let integral = !text.contains(['.', 'e', 'E']);
            let kind = match (integral, text.parse::<i64>()) {
                (true, Ok(i)) => TokenKind::Int(i),
                _ => match text.parse::<f64>() {
                    Ok(f) if f.is_finite() => TokenKind::Float(f),
                    _ => {
                        return Err(ParseError::new(
                            format!("numeric literal `{text}` is out of range"),
                            start..end,
                            None,
                        ))
                    }
                },
            };
            tokens.push(Token { kind, lexeme: text.to_owned(), span: start..end });
            continue;
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, ch)) = chars.peek() {
                if ch.is_ascii_alphanumeric() || ch == '_' {
                    end = i + 1;
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &input[start..end];
            let kind = match Keyword::from_word(word) {
                Some(Keyword::Col) if input[end..].starts_with('*') => {
                    chars.next();
                    end += 1;
                    TokenKind::Keyword(Keyword::ColStar)
                }
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_owned()),
            };
            tokens.push(Token { kind, lexeme: input[start..end].to_owned(), span: start..end });
            continue;
        }

        return Err(ParseError::new(format!("unexpected character `{c}`"), start..start + c.len_utf8(), None));
    }
    Ok(tokens)
}

/// `digits ('.' digits)? ([eE] [+-]? digits)?`, returning the end offset.
fn scan_number(input: &str, start: usize) -> usize {
    let bytes = input.as_bytes();
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut end = digits(start);
    if end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
        end = digits(end + 1);
    }
    if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
        let mut i = end + 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        if i < bytes.len() && bytes[i].is_ascii_digit() {
            end = digits(i);
        }
    }
    end
}
