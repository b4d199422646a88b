//! Expression grammar for ODE input.
//!
//! Operators `+ - * ^`, parentheses, integer/rational/decimal literals,
//! variables `x`, `y0`..`yN` (aliases `y` for `y0`, `dy`, `d2y`, ... for
//! delta powers), and named rational parameters bound at parse time.
//! Everything expands to a canonical `PolyN2`; expansion is exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::bigfloat::dec_to_rat;
use crate::error::{Error, Result};
use crate::poly::PolyN2;
use crate::scalar::{Rat, Scalar};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    self.pos += 1;
                    out.push((start, Tok::Plus));
                }
                b'-' => {
                    self.pos += 1;
                    out.push((start, Tok::Minus));
                }
                b'*' => {
                    self.pos += 1;
                    out.push((start, Tok::Star));
                }
                b'^' => {
                    self.pos += 1;
                    out.push((start, Tok::Caret));
                }
                b'(' => {
                    self.pos += 1;
                    out.push((start, Tok::LParen));
                }
                b')' => {
                    self.pos += 1;
                    out.push((start, Tok::RParen));
                }
                b'0'..=b'9' => {
                    let n = self.number()?;
                    out.push((start, Tok::Num(n)));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let name = std::str::from_utf8(&self.src[self.pos..end])
                        .expect("ascii")
                        .to_string();
                    self.pos = end;
                    out.push((start, Tok::Ident(name)));
                }
                _ => return Err(self.error(format!("unexpected character `{}`", c as char))),
            }
        }
        Ok(out)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii").to_string()
    }

    /// Integer, rational `p/q`, or decimal literal (exact rational value).
    fn number(&mut self) -> Result<Rat> {
        let int = self.digits();
        if self.pos < self.src.len() {
            match self.src[self.pos] {
                b'/' if self.pos + 1 < self.src.len()
                    && self.src[self.pos + 1].is_ascii_digit() =>
                {
                    self.pos += 1;
                    let den = self.digits();
                    let d: BigInt = den.parse().expect("digits");
                    if d.is_zero() {
                        return Err(self.error("zero denominator"));
                    }
                    return Ok(Rat::new(int.parse().expect("digits"), d));
                }
                b'.' => {
                    self.pos += 1;
                    let frac = self.digits();
                    let mut text = format!("{int}.{frac}");
                    if self.pos < self.src.len()
                        && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E')
                        && self.peek_exponent()
                    {
                        text.push('e');
                        self.pos += 1;
                        if self.src[self.pos] == b'+' || self.src[self.pos] == b'-' {
                            text.push(self.src[self.pos] as char);
                            self.pos += 1;
                        }
                        text.push_str(&self.digits());
                    }
                    return dec_to_rat(&text)
                        .map_err(|e| self.error(format!("bad decimal literal: {e}")));
                }
                _ => {}
            }
        }
        Ok(Rat::from_integer(int.parse().expect("digits")))
    }

    fn peek_exponent(&self) -> bool {
        let mut i = self.pos + 1;
        if i < self.src.len() && (self.src[i] == b'+' || self.src[i] == b'-') {
            i += 1;
        }
        i < self.src.len() && self.src[i].is_ascii_digit()
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    n: usize,
    params: &'a BTreeMap<String, Rat>,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos(), msg: msg.into() }
    }

    fn expr(&mut self) -> Result<PolyN2> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyN2> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyN2> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        if matches!(self.peek(), Some(Tok::Plus)) {
            self.bump();
            return self.factor();
        }
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Num(r)) if r.is_integer() && !r.numer().sign().eq(&num_bigint::Sign::Minus) => {
                    let e: u32 = r.numer().try_into().map_err(|_| Error::Parse {
                        pos,
                        msg: "exponent too large".into(),
                    })?;
                    return Ok(base.pow(e));
                }
                _ => {
                    return Err(Error::Parse {
                        pos,
                        msg: "exponent must be a nonnegative integer literal".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<PolyN2> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(r)) => Ok(PolyN2::constant(self.n, Scalar::from_rat(r))),
            Some(Tok::Ident(name)) => self.variable(&name, pos),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse { pos: self.pos(), msg: "expected `)`".into() }),
                }
            }
            Some(t) => Err(Error::Parse { pos, msg: format!("unexpected token {t:?}") }),
            None => Err(Error::Parse { pos, msg: "unexpected end of input".into() }),
        }
    }

    fn variable(&mut self, name: &str, pos: usize) -> Result<PolyN2> {
        let err = |msg: String| Error::Parse { pos, msg };
        if name == "x" {
            return Ok(PolyN2::xvar(self.n));
        }
        let j = if name == "y" {
            Some(0)
        } else if let Some(rest) = name.strip_prefix('y') {
            rest.parse::<usize>().ok()
        } else if name == "dy" {
            Some(1)
        } else if let Some(mid) = name.strip_prefix('d').and_then(|r| r.strip_suffix('y')) {
            mid.parse::<usize>().ok()
        } else {
            None
        };
        if let Some(j) = j {
            if j > self.n {
                return Err(err(format!(
                    "variable `{name}` exceeds equation order {}",
                    self.n
                )));
            }
            return Ok(PolyN2::var(self.n, j));
        }
        match self.params.get(name) {
            Some(r) => Ok(PolyN2::constant(self.n, Scalar::from_rat(r.clone()))),
            None => Err(err(format!("unknown variable `{name}`"))),
        }
    }
}

/// Parses an expression into a fully expanded canonical polynomial in
/// x, y_0..y_n. Named parameters are bound to exact rationals.
pub fn parse_expression_with_params(
    text: &str,
    n: usize,
    params: &BTreeMap<String, Rat>,
) -> Result<PolyN2> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, idx: 0, n, params, src_len: text.len() };
    let poly = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(poly)
}

pub fn parse_expression(text: &str, n: usize) -> Result<PolyN2> {
    parse_expression_with_params(text, n, &BTreeMap::new())
}
