//! Impedance profiles `λ(t)` over the curve parameter.
//!
//! Profiles are written in a small expression language:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number | 't' | ('sin' | 'cos') '(' expr ')' | '(' expr ')' | '-' factor
//! ```
//!
//! Whitespace is ignored. A profile must be finite and positive on
//! `[−π, π)`; this is checked on 4096 samples when it is built.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Param,
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Number(v) => *v,
            Expr::Param => t,
            Expr::Sin(e) => e.eval(t).sin(),
            Expr::Cos(e) => e.eval(t).cos(),
            Expr::Neg(e) => -e.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
        }
    }
}

/// Fully parenthesized, so printing and reparsing is the identity on values.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v:?}"),
            Expr::Param => f.write_str("t"),
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.pos, msg: msg.into() })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    b"t" => Ok(Expr::Param),
                    b"sin" | b"cos" => {
                        let is_sin = &self.src[start..self.pos] == b"sin";
                        self.expect(b'(')?;
                        let arg = Box::new(self.expr()?);
                        self.expect(b')')?;
                        Ok(if is_sin { Expr::Sin(arg) } else { Expr::Cos(arg) })
                    }
                    name => {
                        self.pos = start;
                        self.error(format!("unknown identifier '{}'", String::from_utf8_lossy(name)))
                    }
                }
            }
            Some(c) => self.error(format!("unexpected character '{}'", c as char)),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Number(v)),
            Err(_) => {
                self.pos = start;
                self.error(format!("malformed number '{text}'"))
            }
        }
    }
}

/// Parses an expression without the positivity check.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.error("trailing input");
    }
    Ok(e)
}

/// Positive impedance coefficient as a function of the curve parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ImpedanceProfile {
    source: String,
    expr: Expr,
}

impl ImpedanceProfile {
    pub fn constant(value: f64) -> Result<Self> {
        format!("{value:?}").parse()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.expr.eval(t)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// The value if the expression does not depend on `t`.
    pub fn as_constant(&self) -> Option<f64> {
        fn uses_t(e: &Expr) -> bool {
            match e {
                Expr::Number(_) => false,
                Expr::Param => true,
                Expr::Sin(a) | Expr::Cos(a) | Expr::Neg(a) => uses_t(a),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => uses_t(a) || uses_t(b),
            }
        }
        (!uses_t(&self.expr)).then(|| self.expr.eval(0.0))
    }

    pub fn min_value(&self) -> f64 {
        (0..4096).map(|i| self.eval(-PI + TAU * i as f64 / 4096.0)).fold(f64::INFINITY, f64::min)
    }
}

/// `parse_profile`: expression text to a checked profile.
pub fn parse_profile(text: &str) -> Result<ImpedanceProfile> {
    let expr = parse_expr(text)?;
    for i in 0..4096 {
        let t = -PI + TAU * i as f64 / 4096.0;
        let value = expr.eval(t);
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonpositiveProfile { t, value });
        }
    }
    Ok(ImpedanceProfile { source: text.trim().to_string(), expr })
}

impl FromStr for ImpedanceProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_profile(s)
    }
}

impl TryFrom<String> for ImpedanceProfile {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        parse_profile(&s)
    }
}

impl From<ImpedanceProfile> for String {
    fn from(p: ImpedanceProfile) -> String {
        p.source
    }
}

impl fmt::Display for ImpedanceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
