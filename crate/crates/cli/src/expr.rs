//! Polynomial expressions over Gaussian rationals.
//!
//! ```text
//! expr   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' INT)?
//! atom   := INT ('/' INT)? | 'i' | VAR | '(' expr ')'
//! ```
//!
//! `/` is only allowed between two integer literals, so every expression is
//! a polynomial.

use std::collections::BTreeMap;
use std::fmt;

use crnorm_core::algebra::{Rat, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;

pub const VARS: [&str; 13] = ["z1", "z2", "zb1", "zb2", "s", "w", "wb", "Z1", "Z2", "Z3", "Zb1", "Zb2", "Zb3"];

/// Exponents indexed like [`VARS`].
pub type Exps = [u8; 13];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub terms: BTreeMap<Exps, Scalar>,
}

impl Poly {
    fn constant(c: Scalar) -> Poly {
        let mut p = Poly::default();
        p.push([0; 13], c);
        p
    }

    fn var(k: usize) -> Poly {
        let mut e = [0; 13];
        e[k] = 1;
        let mut p = Poly::default();
        p.push(e, Scalar::one());
        p
    }

    fn push(&mut self, e: Exps, c: Scalar) {
        let entry = self.terms.entry(e).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    fn add(mut self, o: &Poly, sign: i64) -> Poly {
        for (e, c) in &o.terms {
            self.push(*e, c.scale_int(sign));
        }
        self
    }

    fn mul(&self, o: &Poly) -> Option<Poly> {
        let mut out = Poly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let mut e = [0u8; 13];
                for k in 0..13 {
                    e[k] = ea[k].checked_add(eb[k])?;
                }
                out.push(e, ca.mul(cb));
            }
        }
        Some(out)
    }

    /// Indices of the variables that occur.
    pub fn used(&self) -> Vec<usize> {
        (0..13).filter(|&k| self.terms.keys().any(|e| e[k] > 0)).collect()
    }

    /// The value when no variable occurs.
    pub fn as_constant(&self) -> Option<Scalar> {
        if !self.used().is_empty() {
            return None;
        }
        Some(self.terms.get(&[0; 13]).cloned().unwrap_or_else(Scalar::zero))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let digits: String = chars[start..k].iter().collect();
            out.push((start, Tok::Int(digits.parse().expect("ascii digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_alphanumeric() {
                k += 1;
            }
            out.push((start, Tok::Ident(chars[start..k].iter().collect())));
        } else if "+-*^/()".contains(c) {
            out.push((k, Tok::Sym(c)));
            k += 1;
        } else {
            return Err(ParseError { pos: k, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut sign = if self.eat('-') {
            -1
        } else {
            self.eat('+');
            1
        };
        let mut acc = Poly::default();
        loop {
            let t = self.term()?;
            acc = acc.add(&t, sign);
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            let pos = self.pos();
            let f = self.factor()?;
            acc = acc.mul(&f).ok_or(ParseError { pos, msg: "exponent too large".into() })?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.pos();
        let n = match self.peek() {
            Some(Tok::Int(n)) => u32::try_from(n.clone()).ok().filter(|n| *n <= 64),
            _ => return self.err("expected an integer exponent"),
        };
        let Some(n) = n else { return self.err("exponent must be at most 64") };
        self.at += 1;
        let mut out = Poly::constant(Scalar::one());
        for _ in 0..n {
            out = out.mul(&base).ok_or(ParseError { pos, msg: "exponent too large".into() })?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let Some(tok) = self.peek().cloned() else { return self.err("unexpected end of input") };
        match tok {
            Tok::Int(p) => {
                self.at += 1;
                if !self.eat('/') {
                    return Ok(Poly::constant(Scalar::from_rat(Rat::from_big(BigRational::from_integer(p)))));
                }
                match self.peek().cloned() {
                    Some(Tok::Int(q)) if q != BigInt::from(0) => {
                        self.at += 1;
                        Ok(Poly::constant(Scalar::from_rat(Rat::from_big(BigRational::new(p, q)))))
                    }
                    Some(Tok::Int(_)) => self.err("division by zero"),
                    _ => self.err("'/' is only allowed between integer literals"),
                }
            }
            Tok::Ident(name) => {
                self.at += 1;
                if name == "i" {
                    return Ok(Poly::constant(Scalar::i()));
                }
                match VARS.iter().position(|v| *v == name) {
                    Some(k) => Ok(Poly::var(k)),
                    None => {
                        self.at -= 1;
                        self.err(format!("unknown variable '{name}'"))
                    }
                }
            }
            Tok::Sym('(') => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Tok::Sym(c) => self.err(format!("unexpected '{c}'")),
        }
    }
}

pub fn parse(src: &str) -> Result<Poly, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.chars().count() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// A constant expression such as `(1/2-3*i)`.
pub fn parse_scalar(src: &str) -> Result<Scalar, ParseError> {
    parse(src)?.as_constant().ok_or(ParseError { pos: 0, msg: "expected a constant".into() })
}
