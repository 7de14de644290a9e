//! Line-oriented text form for expressions and programs.
//!
//! ```text
//! #L:v[,v...]     constant at level L
//! $i@L            variable i at level L
//! (+@L e e ...)   sum
//! (*@L e e ...)   product
//! (^@L e !k)      integer power
//! (^@L e e')      tower power, e' at level L+1
//! ```
//!
//! A program is `arity N`, then `let e` lines, then `out e` lines.

use std::fmt;
use std::sync::Arc;

use super::{Exponent, Expr, ExprError, Program, Tower, Val};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const { level, value } => {
                write!(f, "#{level}:")?;
                for (i, v) in value.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Expr::Var { level, index } => write!(f, "${index}@{level}"),
            Expr::Add { level, terms: v } | Expr::Mul { level, factors: v } => {
                let op = if matches!(self, Expr::Add { .. }) { '+' } else { '*' };
                write!(f, "({op}@{level}")?;
                for t in v {
                    write!(f, " {t}")?;
                }
                f.write_str(")")
            }
            Expr::Pow { level, base, exp } => {
                write!(f, "(^@{level} {base} ")?;
                match exp {
                    Exponent::Int(k) => write!(f, "!{k}")?,
                    Exponent::Expr(e) => write!(f, "{e}")?,
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ExprError {
        ExprError::Parse { line: self.line, msg: format!("{} (col {})", msg.into(), self.pos + 1) }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn number(&mut self) -> Result<u64, ExprError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected number"))
    }

    fn level(&mut self) -> Result<u8, ExprError> {
        let l = self.number()?;
        u8::try_from(l).map_err(|_| self.err("level out of range"))
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        match self.peek() {
            Some(b'#') => {
                self.pos += 1;
                let level = self.level()?;
                self.expect(b':')?;
                let mut value = Val::new();
                value.push(self.number()?);
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    value.push(self.number()?);
                }
                Ok(Expr::Const { level, value })
            }
            Some(b'$') => {
                self.pos += 1;
                let index = self.number()?;
                self.expect(b'@')?;
                let level = self.level()?;
                let index = u32::try_from(index).map_err(|_| self.err("index out of range"))?;
                Ok(Expr::Var { level, index })
            }
            Some(b'(') => {
                self.pos += 1;
                let op = self.peek().ok_or_else(|| self.err("unexpected end"))?;
                self.pos += 1;
                self.expect(b'@')?;
                let level = self.level()?;
                let node = match op {
                    b'+' | b'*' => {
                        let mut v = Vec::new();
                        loop {
                            self.skip_ws();
                            if self.peek() == Some(b')') {
                                break;
                            }
                            v.push(self.expr()?);
                        }
                        if op == b'+' {
                            Expr::Add { level, terms: v }
                        } else {
                            Expr::Mul { level, factors: v }
                        }
                    }
                    b'^' => {
                        let base = Box::new(self.expr()?);
                        self.skip_ws();
                        let exp = if self.peek() == Some(b'!') {
                            self.pos += 1;
                            Exponent::Int(self.number()?)
                        } else {
                            Exponent::Expr(Box::new(self.expr()?))
                        };
                        Expr::Pow { level, base, exp }
                    }
                    _ => return Err(self.err("unknown operator")),
                };
                self.skip_ws();
                self.expect(b')')?;
                Ok(node)
            }
            _ => Err(self.err("expected expression")),
        }
    }
}

fn parse_line(s: &str, line: usize) -> Result<Expr, ExprError> {
    let mut p = Parser { s: s.as_bytes(), pos: 0, line };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Parse a single expression.
pub fn parse_expr(s: &str) -> Result<Expr, ExprError> {
    parse_line(s, 1)
}

impl Program {
    pub fn to_text(&self) -> String {
        let mut out = format!("arity {}\n", self.arity());
        for b in self.bindings() {
            out.push_str(&format!("let {b}\n"));
        }
        for o in self.outputs() {
            out.push_str(&format!("out {o}\n"));
        }
        out
    }

    pub fn parse(text: &str, tower: Arc<Tower>) -> Result<Program, ExprError> {
        let mut arity = None;
        let mut bindings = Vec::new();
        let mut outputs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            let (kw, rest) = l.split_once(' ').unwrap_or((l, ""));
            let bad = |msg: &str| ExprError::Parse { line, msg: msg.into() };
            match kw {
                "arity" if arity.is_none() => {
                    arity = Some(rest.trim().parse::<usize>().map_err(|_| bad("bad arity"))?);
                }
                "let" if arity.is_some() && outputs.is_empty() => bindings.push(parse_line(rest, line)?),
                "out" if arity.is_some() => outputs.push(parse_line(rest, line)?),
                _ => return Err(bad("unexpected line")),
            }
        }
        let arity = arity.ok_or(ExprError::Parse { line: 1, msg: "missing arity".into() })?;
        Program::new(tower, arity, bindings, outputs)
    }
}
