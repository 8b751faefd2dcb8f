//! Expression language: lexer, recursive-descent parser and renderer.
//!
//! ```text
//! program   := statement (';' statement)* ';'?
//! statement := IDENT '=' sum | sum
//! sum       := product (('+' | '-') product)*
//! product   := unary (('*' | '/') unary)*
//! unary     := '-' unary | power
//! power     := atom ('^' unary)?
//! atom      := NUMBER | IDENT | IDENT '(' args? ')' | '(' sum ')' | '[' args? ']'
//! ```
//!
//! Numbers are exact: `0.25` and `1e-3` are read as rationals.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::algebra::Rational;

/// 1-based line and column (in characters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    /// Non-negative literal.
    Number(Rational),
    Ident(String),
    Call(String, Vec<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    List(Vec<Expr>),
}

/// A node with the position of its first token. Equality ignores positions.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Assign { name: String, pos: Pos, value: Expr },
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Equals,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(r) => write!(f, "number {r}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::Comma => write!(f, "','"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::Equals => write!(f, "'='"),
            Tok::Semi => write!(f, "';'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            let s: String = chars[start..i].iter().collect();
            Tok::Num(parse_decimal(&s).ok_or_else(|| ParseError { pos, message: format!("malformed number '{s}'") })?)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '=' => Tok::Equals,
                ';' => Tok::Semi,
                _ => return Err(ParseError { pos, message: format!("unexpected character '{c}'") }),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `1.5e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if shift >= 0 {
        Rational::from_integer(digits * Pow::pow(&ten, shift as u32))
    } else {
        Rational::new(digits, Pow::pow(&ten, (-shift) as u32))
    })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, context: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {want} {context}, found {}", self.peek())))
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { pos: self.pos(), message }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if let (Tok::Ident(name), Some((Tok::Equals, _))) = (self.peek().clone(), self.toks.get(self.at + 1)) {
            let pos = self.pos();
            self.bump();
            self.bump();
            let value = self.sum()?;
            return Ok(Statement::Assign { name, pos, value });
        }
        Ok(Statement::Expr(self.sum()?))
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            let pos = lhs.pos;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let pos = lhs.pos;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let pos = self.pos();
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), pos });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            let pos = base.pos;
            return Ok(Expr { kind: ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)), pos });
        }
        Ok(base)
    }

    fn args(&mut self, close: Tok) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.sum()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.error(format!("expected ',' or {close}, found {}", self.peek()))),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        let kind = match tok {
            Tok::Num(r) => ExprKind::Number(r),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    ExprKind::Call(name, self.args(Tok::RParen)?)
                } else {
                    ExprKind::Ident(name)
                }
            }
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "to close '('")?;
                return Ok(inner);
            }
            Tok::LBracket => ExprKind::List(self.args(Tok::RBracket)?),
            other => return Err(ParseError { pos, message: format!("expected an expression, found {other}") }),
        };
        Ok(Expr { kind, pos })
    }
}

/// Parses a single expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after the expression", p.peek())));
    }
    Ok(e)
}

/// Parses `;`-separated statements.
pub fn parse_program(text: &str) -> Result<Vec<Statement>, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut out = Vec::new();
    loop {
        while *p.peek() == Tok::Semi {
            p.bump();
        }
        if *p.peek() == Tok::Eof {
            break;
        }
        out.push(p.statement()?);
        match p.peek() {
            Tok::Semi | Tok::Eof => {}
            t => return Err(p.error(format!("expected ';' between statements, found {t}"))),
        }
    }
    if out.is_empty() {
        return Err(p.error("empty input".into()));
    }
    Ok(out)
}

/// Exact decimal form of a rational whose denominator divides a power of 10.
fn render_number(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_string();
    }
    let ten = BigInt::from(10);
    let mut scale = 0u32;
    let mut scaled = r.clone();
    while !scaled.is_integer() && scale < 4096 {
        scaled *= Rational::from_integer(ten.clone());
        scale += 1;
    }
    if !scaled.is_integer() {
        // not a literal value; fall back to a quotient
        return format!("({}/{})", r.numer(), r.denom());
    }
    let digits = scaled.to_integer().abs().to_string();
    let scale = scale as usize;
    let padded = if digits.len() <= scale { format!("{}{}", "0".repeat(scale - digits.len() + 1), digits) } else { digits };
    let (a, b) = padded.split_at(padded.len() - scale);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{a}.{b}")
}

fn render_into(e: &Expr, min_prec: u8, out: &mut String) {
    let (prec, text) = match &e.kind {
        ExprKind::Number(r) => (5, render_number(r)),
        ExprKind::Ident(s) => (5, s.clone()),
        ExprKind::Call(name, args) => (5, format!("{name}({})", render_list(args))),
        ExprKind::List(items) => (5, format!("[{}]", render_list(items))),
        ExprKind::Neg(inner) => {
            let mut s = String::from("-");
            render_into(inner, 3, &mut s);
            (3, s)
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let mut s = String::new();
            if *op == BinOp::Pow {
                render_into(l, p + 1, &mut s);
                s.push('^');
                render_into(r, 3, &mut s);
            } else {
                render_into(l, p, &mut s);
                s.push_str(&format!(" {} ", op.symbol()));
                render_into(r, p + 1, &mut s);
            }
            (p, s)
        }
    };
    if prec < min_prec {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn render_list(items: &[Expr]) -> String {
    items.iter().map(render).collect::<Vec<_>>().join(", ")
}

/// Source text for an expression, with only the parentheses it needs.
pub fn render(e: &Expr) -> String {
    let mut s = String::new();
    render_into(e, 0, &mut s);
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// Structural dump, e.g. `call(*, call(ch, call(O, 2)), call(td, T))`.
pub fn sexpr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Number(r) => render_number(r),
        ExprKind::Ident(s) => s.clone(),
        ExprKind::Call(name, args) => {
            let mut parts = vec![name.clone()];
            parts.extend(args.iter().map(sexpr));
            format!("call({})", parts.join(", "))
        }
        ExprKind::Binary(op, l, r) => format!("call({}, {}, {})", op.symbol(), sexpr(l), sexpr(r)),
        ExprKind::Neg(inner) => format!("call(neg, {})", sexpr(inner)),
        ExprKind::List(items) => format!("list({})", items.iter().map(sexpr).collect::<Vec<_>>().join(", ")),
    }
}

/// Evaluates a literal made of numbers, `+ - * /`, integer powers and
/// negation; `None` for anything else.
pub fn constant_value(e: &Expr) -> Option<Rational> {
    match &e.kind {
        ExprKind::Number(r) => Some(r.clone()),
        ExprKind::Neg(inner) => constant_value(inner).map(|r| -r),
        ExprKind::Binary(op, l, r) => {
            let (a, b) = (constant_value(l)?, constant_value(r)?);
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => (!b.is_zero()).then(|| a / b),
                BinOp::Pow => {
                    if !b.is_integer() {
                        return None;
                    }
                    let n: i32 = b.to_integer().try_into().ok()?;
                    if n < 0 && a.is_zero() {
                        return None;
                    }
                    let p = Pow::pow(&a, n.unsigned_abs());
                    Some(if n < 0 { Rational::one() / p } else { p })
                }
            }
        }
        _ => None,
    }
}
