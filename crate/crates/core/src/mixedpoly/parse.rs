//! Recursive-descent parser for mixed polynomial expressions.
//!
//! ```text
//! poly   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := real ['i'] | 'i' | 'z' uint | 'zb' uint | '(' poly ')'
//! ```
//!
//! `(a+bi)` complex literals are the parenthesised sum of a real and an
//! imaginary literal. Whitespace is ignored.

use num_complex::Complex64;
use thiserror::Error;

use super::MixedPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("exponent must be a non-negative integer, found `{0}`")]
    BadExponent(String),
    #[error("variable index {index} out of range 1..={n}")]
    VariableOutOfRange { index: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Imag(String),
    Var { conj: bool, index: usize },
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn syntax(msg: impl Into<String>, pos: usize) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax(msg.into()), pos }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, i)),
            b'-' => out.push((Tok::Minus, i)),
            b'*' => out.push((Tok::Star, i)),
            b'^' => out.push((Tok::Caret, i)),
            b'(' => out.push((Tok::LParen, i)),
            b')' => out.push((Tok::RParen, i)),
            b'z' => {
                i += 1;
                let conj = bytes.get(i) == Some(&b'b');
                if conj {
                    i += 1;
                }
                let ds = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if ds == i {
                    return Err(syntax("expected variable index after `z`/`zb`", ds));
                }
                let index = text[ds..i]
                    .parse()
                    .map_err(|_| syntax("variable index too large", ds))?;
                out.push((Tok::Var { conj, index }, start));
                continue;
            }
            b'i' => out.push((Tok::Imag("1".into()), i)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let save = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    let ds = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if ds == i {
                        i = save;
                    }
                }
                let lit = text[start..i].to_string();
                if i < bytes.len() && bytes[i] == b'i' {
                    out.push((Tok::Imag(lit), start));
                    i += 1;
                } else {
                    out.push((Tok::Num(lit), start));
                }
                continue;
            }
            _ => {
                let c = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(format!("unexpected character `{c}`"), i));
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    arity: Option<usize>,
    max_index: usize,
}

/// Intermediate form: variables are collected before the arity is known, so
/// polynomials are built with a generous arity and trimmed at the end.
const WORK_ARITY_CAP: usize = 64;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn poly(&mut self, n: usize) -> Result<MixedPolynomial, ParseError> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Plus) => self.pos += 1,
            Some(Tok::Minus) => {
                negate = true;
                self.pos += 1
            }
            _ => {}
        }
        let mut acc = self.term(n)?;
        if negate {
            acc = -&acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term(n)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term(n)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, n: usize) -> Result<MixedPolynomial, ParseError> {
        let mut acc = self.factor(n)?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = &acc * &self.factor(n)?;
        }
        Ok(acc)
    }

    fn factor(&mut self, n: usize) -> Result<MixedPolynomial, ParseError> {
        let base = self.atom(n)?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.here();
        match self.toks.get(self.pos) {
            Some((Tok::Num(lit), _)) => {
                self.pos += 1;
                let k: u32 = if lit.bytes().all(|b| b.is_ascii_digit()) {
                    lit.parse().map_err(|_| ParseError {
                        kind: ParseErrorKind::BadExponent(lit.clone()),
                        pos: at,
                    })?
                } else {
                    return Err(ParseError { kind: ParseErrorKind::BadExponent(lit.clone()), pos: at });
                };
                Ok(base.pow(k))
            }
            Some((Tok::Minus, _)) => {
                let shown = match self.toks.get(self.pos + 1) {
                    Some((Tok::Num(lit), _)) => format!("-{lit}"),
                    _ => "-".into(),
                };
                Err(ParseError { kind: ParseErrorKind::BadExponent(shown), pos: at })
            }
            _ => Err(syntax("expected exponent after `^`", at)),
        }
    }

    fn atom(&mut self, n: usize) -> Result<MixedPolynomial, ParseError> {
        let at = self.here();
        let Some((tok, _)) = self.toks.get(self.pos) else {
            return Err(syntax("unexpected end of input", at));
        };
        self.pos += 1;
        match tok {
            Tok::Num(lit) => {
                let v: f64 = lit.parse().map_err(|_| syntax(format!("bad number `{lit}`"), at))?;
                Ok(MixedPolynomial::constant(n, Complex64::new(v, 0.0)))
            }
            Tok::Imag(lit) => {
                let v: f64 = lit.parse().map_err(|_| syntax(format!("bad number `{lit}`"), at))?;
                Ok(MixedPolynomial::constant(n, Complex64::new(0.0, v)))
            }
            Tok::Var { conj, index } => {
                let (conj, index) = (*conj, *index);
                let limit = self.arity.unwrap_or(WORK_ARITY_CAP);
                if index == 0 || index > limit {
                    return Err(ParseError {
                        kind: ParseErrorKind::VariableOutOfRange { index, n: limit },
                        pos: at,
                    });
                }
                self.max_index = self.max_index.max(index);
                Ok(if conj {
                    MixedPolynomial::conj_variable(n, index - 1)
                } else {
                    MixedPolynomial::variable(n, index - 1)
                })
            }
            Tok::LParen => {
                let inner = self.poly(n)?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax("expected `)`", self.here()));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(syntax(format!("unexpected token {other:?}"), at)),
        }
    }
}

fn run(text: &str, arity: Option<usize>) -> Result<MixedPolynomial, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(syntax("empty expression", 0));
    }
    let work_n = arity.unwrap_or(WORK_ARITY_CAP);
    let mut p = Parser { toks: &toks, pos: 0, end: text.len(), arity, max_index: 0 };
    let f = p.poly(work_n)?;
    if p.pos != toks.len() {
        return Err(syntax("trailing input", p.here()));
    }
    let n = arity.unwrap_or(p.max_index.max(1));
    if n == work_n {
        return Ok(f);
    }
    let keep: Vec<usize> = (1..=n).collect();
    Ok(f.restrict_to_subspace(&keep).expect("indices within working arity"))
}

/// Parses an expression; the number of variables is the largest index used
/// (at least 1).
pub fn parse_mixed_expression(text: &str) -> Result<MixedPolynomial, ParseError> {
    run(text, None)
}

/// Parses an expression in exactly `n` variables; any `z_j` / `zb_j` with
/// `j > n` is rejected.
pub fn parse_with_arity(text: &str, n: usize) -> Result<MixedPolynomial, ParseError> {
    run(text, Some(n))
}
