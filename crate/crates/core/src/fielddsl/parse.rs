//! Recursive-descent parser for the field expression language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right-associative
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp ln sqrt abs sign` (one argument), `pow` (two).
//! The constant `pi` is recognised.

use std::fmt;

use thiserror::Error;

use super::expr::{Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax {
        found: String,
        expected: Vec<&'static str>,
    },
    UnknownIdentifier(String),
    Arity {
        func: String,
        expected: usize,
        found: usize,
    },
    InvalidNumber(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { found, expected } => write!(
                f,
                "syntax error at offset {}: found {found}, expected one of {}",
                self.offset,
                expected.join(", ")
            ),
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` at offset {}", self.offset)
            }
            ParseErrorKind::Arity { func, expected, found } => write!(
                f,
                "`{func}` takes {expected} argument(s), got {found} (offset {})",
                self.offset
            ),
            ParseErrorKind::InvalidNumber(s) => {
                write!(f, "invalid number `{s}` at offset {}", self.offset)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::InvalidNumber(text.to_string()),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i,
                kind: ParseErrorKind::Syntax {
                    found: format!("`{ch}`"),
                    expected: vec!["number", "identifier", "operator", "`(`"],
                },
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [(&'a str, Var)],
}

const ATOM_START: &[&str] = &["number", "identifier", "`(`", "`-`"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax {
                found: self.peek().describe(),
                expected: expected.to_vec(),
            },
        }
    }

    fn expect(&mut self, op: char, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    let args = self.args()?;
                    return self.call(&name, args, offset);
                }
                if let Some(&(_, v)) = self.vars.iter().find(|(n, _)| *n == name) {
                    return Ok(Expr::Var(v));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                Err(ParseError {
                    offset,
                    kind: ParseErrorKind::UnknownIdentifier(name),
                })
            }
            _ => Err(self.error(ATOM_START)),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::Op(')') {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Tok::Op(',') => {
                    self.bump();
                }
                Tok::Op(')') => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.error(&["`,`", "`)`"])),
            }
        }
    }

    fn call(&self, name: &str, mut args: Vec<Expr>, offset: usize) -> Result<Expr, ParseError> {
        let arity = |expected: usize, found: usize| ParseError {
            offset,
            kind: ParseErrorKind::Arity {
                func: name.to_string(),
                expected,
                found,
            },
        };
        if name == "pow" {
            if args.len() != 2 {
                return Err(arity(2, args.len()));
            }
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            return Ok(Expr::Pow(Box::new(a), Box::new(b)));
        }
        let func = Func::from_name(name).ok_or_else(|| ParseError {
            offset,
            kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
        })?;
        if args.len() != 1 {
            return Err(arity(1, args.len()));
        }
        Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
    }
}

const XYT: &[(&str, Var)] = &[("x", Var::X), ("y", Var::Y), ("t", Var::T)];

/// Parses an expression in the variables `x`, `y`, `t`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_with_vars(src, XYT)
}

/// Parses with a custom variable table, e.g. `[("r", Var::X), ("t", Var::T)]`
/// for radial profiles.
pub fn parse_with_vars(src: &str, vars: &[(&str, Var)]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}
