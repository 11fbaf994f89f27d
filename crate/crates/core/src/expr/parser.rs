//! Recursive-descent parser for the input language:
//!
//! ```text
//! def NAME(p1: Real, ..., pn: Real): Real = {
//!   require(lit <= p1 && p1 <= lit && ...)
//!   BODY
//! }
//! ```
//!
//! `BODY` is an arithmetic expression over `+ - * /`, unary minus, `sqrt`,
//! parentheses and decimal literals. A leading minus applies to the whole
//! product that follows it, so `- u * u / 6.0` is `-((u * u) / 6)`.

use std::collections::BTreeMap;
use std::fmt;

use super::ast::Expr;
use super::function::FunctionSpec;
use crate::exact::{InputBox, Interval, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Assign,
    Le,
    Lt,
    Ge,
    Gt,
    AndAnd,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Number(s) => return write!(f, "`{s}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::AndAnd => "&&",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| ParseError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Number(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, n) = match two.as_str() {
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "&&" => (Tok::AndAnd, 2),
            _ => match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                ':' => (Tok::Colon, 1),
                ',' => (Tok::Comma, 1),
                '=' => (Tok::Assign, 1),
                '<' => (Tok::Lt, 1),
                '>' => (Tok::Gt, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '/' => (Tok::Slash, 1),
                other => return Err(err(tl, tc, format!("unexpected character `{other}`"))),
            },
        };
        advance(n, &mut i);
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Parameters of the function being parsed, for unbound-variable checks.
    params: Vec<String>,
}

#[derive(Default)]
struct Bounds {
    lo: Option<Rational>,
    hi: Option<Rational>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(self.error_at(&t, format!("expected {want}, found {}", t.tok)))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if &self.peek().tok == want {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => Err(self.error_at(&t, format!("expected identifier, found {other}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (s, t) = self.ident()?;
        if s == kw {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected `{kw}`, found `{s}`")))
        }
    }

    fn function(&mut self) -> Result<FunctionSpec, ParseError> {
        self.keyword("def")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let (p, t) = self.ident()?;
                if params.contains(&p) {
                    return Err(self.error_at(&t, format!("parameter `{p}` declared twice")));
                }
                self.expect(Tok::Colon)?;
                self.keyword("Real")?;
                params.push(p);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        self.expect(Tok::Colon)?;
        self.keyword("Real")?;
        self.expect(Tok::Assign)?;
        let open = self.expect(Tok::LBrace)?;
        self.params = params.clone();

        let mut bounds: BTreeMap<String, Bounds> = BTreeMap::new();
        let require_tok = self.peek().clone();
        if matches!(&require_tok.tok, Tok::Ident(s) if s == "require") {
            self.next();
            self.expect(Tok::LParen)?;
            loop {
                self.conjunct(&mut bounds)?;
                if !self.eat(&Tok::AndAnd) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        let body = self.expr()?;
        self.expect(Tok::RBrace)?;

        let mut vars = Vec::with_capacity(params.len());
        for p in &params {
            let b = bounds.remove(p).unwrap_or_default();
            match (b.lo, b.hi) {
                (Some(lo), Some(hi)) => {
                    let iv = Interval::new(lo, hi).map_err(|_| {
                        self.error_at(&open, format!("empty domain for parameter `{p}`"))
                    })?;
                    vars.push((p.clone(), iv));
                }
                _ => {
                    return Err(self.error_at(
                        &open,
                        format!(
                            "parameter `{p}` needs both a lower and an upper bound in `require`"
                        ),
                    ))
                }
            }
        }
        let domain = InputBox::new(vars).map_err(|e| self.error_at(&open, e.to_string()))?;
        Ok(FunctionSpec::new_unchecked(name, params, domain, body))
    }

    /// `lit REL var` or `var REL lit`, with REL one of `<=`, `<`, `>=`, `>`.
    /// Strict bounds are widened to closed ones.
    fn conjunct(&mut self, bounds: &mut BTreeMap<String, Bounds>) -> Result<(), ParseError> {
        let first = self.peek().clone();
        let var_first = matches!(&first.tok, Tok::Ident(_));
        let (var, var_tok, lit, rel) = if var_first {
            let (v, t) = self.ident()?;
            let rel = self.relation()?;
            let lit = self.literal()?;
            (v, t, lit, rel)
        } else {
            let lit = self.literal()?;
            let rel = self.relation()?;
            let (v, t) = self.ident()?;
            (v, t, lit, rel.flip())
        };
        if !self.params.contains(&var) {
            return Err(self.error_at(&var_tok, format!("`{var}` is not a parameter")));
        }
        let entry = bounds.entry(var).or_default();
        // rel describes `var REL lit`.
        match rel {
            Rel::Below => entry.hi = Some(tighten(entry.hi.take(), lit, Rational::min)),
            Rel::Above => entry.lo = Some(tighten(entry.lo.take(), lit, Rational::max)),
        }
        Ok(())
    }

    fn relation(&mut self) -> Result<Rel, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Le | Tok::Lt => Ok(Rel::Below),
            Tok::Ge | Tok::Gt => Ok(Rel::Above),
            other => Err(self.error_at(&t, format!("expected a comparison, found {other}"))),
        }
    }

    /// Signed decimal literal, optionally `p/q`.
    fn literal(&mut self) -> Result<Rational, ParseError> {
        let negative = self.eat(&Tok::Minus);
        let mut value = self.number()?;
        if self.eat(&Tok::Slash) {
            let t = self.peek().clone();
            let den = self.number()?;
            value = value
                .checked_div(&den)
                .map_err(|_| self.error_at(&t, "zero denominator"))?;
        }
        Ok(if negative { -value } else { value })
    }

    fn number(&mut self) -> Result<Rational, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => {
                Rational::from_decimal_str(s).map_err(|e| self.error_at(&t, e.to_string()))
            }
            other => Err(self.error_at(&t, format!("expected a number, found {other}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.term()?;
                lhs = lhs + rhs;
            } else if self.eat(&Tok::Minus) {
                let rhs = self.term()?;
                lhs = lhs - rhs;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.term()?);
        }
        let mut lhs = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.factor()?;
                lhs = lhs * rhs;
            } else if self.eat(&Tok::Slash) {
                let rhs = self.factor()?;
                lhs = lhs / rhs;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.factor()?);
        }
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => Rational::from_decimal_str(s)
                .map(Expr::constant)
                .map_err(|e| self.error_at(&t, e.to_string())),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) if name == "sqrt" => {
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e.sqrt())
            }
            Tok::Ident(name) => {
                if self.params.iter().any(|p| p == name) {
                    Ok(Expr::var(name))
                } else {
                    Err(self.error_at(&t, format!("unbound variable `{name}`")))
                }
            }
            other => Err(self.error_at(&t, format!("expected an expression, found {other}"))),
        }
    }
}

#[derive(Clone, Copy)]
enum Rel {
    /// `var <= lit`
    Below,
    /// `var >= lit`
    Above,
}

impl Rel {
    fn flip(self) -> Rel {
        match self {
            Rel::Below => Rel::Above,
            Rel::Above => Rel::Below,
        }
    }
}

fn tighten(
    old: Option<Rational>,
    new: Rational,
    pick: fn(Rational, Rational) -> Rational,
) -> Rational {
    match old {
        Some(o) => pick(o, new),
        None => new,
    }
}

/// Parses every `def` block in `text`.
pub fn parse_file(text: &str) -> Result<Vec<FunctionSpec>, ParseError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        params: Vec::new(),
    };
    let mut out = Vec::new();
    while p.peek().tok != Tok::Eof {
        out.push(p.function()?);
    }
    if out.is_empty() {
        let t = p.peek().clone();
        return Err(p.error_at(&t, "no `def` block found"));
    }
    Ok(out)
}

/// Parses text holding exactly one `def` block.
pub fn parse(text: &str) -> Result<FunctionSpec, ParseError> {
    let mut specs = parse_file(text)?;
    if specs.len() != 1 {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: format!("expected one function, found {}", specs.len()),
        });
    }
    Ok(specs.remove(0))
}

/// Parses a bare arithmetic expression over the given variable names.
pub fn parse_expr(text: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        params: vars.iter().map(|s| s.to_string()).collect(),
    };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}
